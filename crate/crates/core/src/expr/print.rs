use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed};

use super::node::{Expr, Node};

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e.node() {
        Node::Add(_) => PREC_ADD,
        Node::Mul(_) => PREC_MUL,
        Node::Num(r) if !r.is_integer() || r.is_negative() => PREC_MUL,
        Node::Pow(..) => PREC_POW,
        _ => PREC_ATOM,
    }
}

fn is_negative_term(e: &Expr) -> bool {
    match e.node() {
        Node::Num(r) => r.is_negative(),
        Node::Mul(fs) => fs[0].as_num().is_some_and(|r| r.is_negative()),
        _ => false,
    }
}

fn write_wrapped(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    if precedence(e) < min_prec {
        write!(f, "({})", e)
    } else {
        write!(f, "{}", e)
    }
}

fn write_rational(f: &mut fmt::Formatter<'_>, r: &BigRational) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

fn write_pow(f: &mut fmt::Formatter<'_>, base: &Expr, exp: &Expr) -> fmt::Result {
    write_wrapped(f, base, PREC_ATOM)?;
    f.write_str("^")?;
    match exp.as_num() {
        Some(r) if r.is_integer() && !r.is_negative() => write!(f, "{}", r.numer()),
        _ => write!(f, "({})", exp),
    }
}

fn write_mul(f: &mut fmt::Formatter<'_>, factors: &[Expr]) -> fmt::Result {
    let (coef, rest) = match factors[0].as_num() {
        Some(r) => (r.clone(), &factors[1..]),
        None => (BigRational::one(), factors),
    };
    let mut numer: Vec<&Expr> = Vec::new();
    let mut denom: Vec<Expr> = Vec::new();
    for x in rest {
        match x.node() {
            Node::Pow(b, e) if e.as_num().is_some_and(|r| r.is_negative()) => {
                denom.push(Expr::pow(b.clone(), e.neg()));
            }
            _ => numer.push(x),
        }
    }
    let mut first = true;
    if numer.is_empty() {
        write_rational(f, &coef)?;
        first = false;
    } else if coef == -BigRational::one() {
        f.write_str("-")?;
    } else if !coef.is_one() {
        write_rational(f, &coef)?;
        first = false;
    }
    for x in numer {
        if !first {
            f.write_str("*")?;
        }
        first = false;
        write_wrapped(f, x, PREC_MUL + 1)?;
    }
    for d in &denom {
        f.write_str("/")?;
        write_wrapped(f, d, PREC_POW)?;
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Num(r) => write_rational(f, r),
            Node::Sym(s) => f.write_str(s),
            Node::Add(terms) => {
                for (i, t) in terms.iter().enumerate() {
                    if i == 0 {
                        write!(f, "{}", t)?;
                    } else if is_negative_term(t) {
                        f.write_str(" - ")?;
                        write_wrapped(f, &t.neg(), PREC_MUL)?;
                    } else {
                        f.write_str(" + ")?;
                        write!(f, "{}", t)?;
                    }
                }
                Ok(())
            }
            Node::Mul(fs) => write_mul(f, fs),
            Node::Pow(b, e) => write_pow(f, b, e),
            Node::Func(func, a) => write!(f, "{}({})", func.name(), a),
            Node::Int(b, v) => write!(f, "int({}, {})", b, v),
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::parse;

    fn roundtrip(s: &str) -> String {
        parse(s).unwrap().to_string()
    }

    #[test]
    fn prints_common_shapes() {
        assert_eq!(roundtrip("q^2"), "q^2");
        assert_eq!(roundtrip("a - 2*x"), "a - 2*x");
        assert_eq!(roundtrip("-x^2"), "-x^2");
        assert_eq!(roundtrip("1/(x*y)"), "1/x/y");
        assert_eq!(roundtrip("x^(3/2)"), "x^(3/2)");
        assert_eq!(roundtrip("(-2)^(1/3)"), "(-2)^(1/3)");
        assert_eq!(roundtrip("3/2*x"), "3/2*x");
        assert_eq!(roundtrip("int(w_2^2, t)"), "int(w_2^2, t)");
    }
}
