//! Exact arithmetic in ℚ(√3).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::expr::{Expr, Func, Node};

/// a + b√3 with rational a, b.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Q3 {
    pub a: BigRational,
    pub b: BigRational,
}

impl Q3 {
    pub fn new(a: BigRational, b: BigRational) -> Q3 {
        Q3 { a, b }
    }

    pub fn rational(a: BigRational) -> Q3 {
        Q3 { a, b: BigRational::zero() }
    }

    pub fn int(n: i64) -> Q3 {
        Q3::rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn frac(n: i64, d: i64) -> Q3 {
        Q3::rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn sqrt3() -> Q3 {
        Q3 { a: BigRational::zero(), b: BigRational::one() }
    }

    pub fn zero() -> Q3 {
        Q3::int(0)
    }

    pub fn one() -> Q3 {
        Q3::int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn conj(&self) -> Q3 {
        Q3 { a: self.a.clone(), b: -self.b.clone() }
    }

    /// a² − 3b², the field norm.
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - BigRational::from_integer(BigInt::from(3)) * &self.b * &self.b
    }

    pub fn recip(&self) -> Q3 {
        assert!(!self.is_zero(), "division by zero in Q(sqrt 3)");
        let n = self.norm();
        Q3 { a: &self.a / &n, b: -&self.b / &n }
    }

    /// Exact sign as a real number.
    pub fn signum(&self) -> Ordering {
        let sa = self.a.cmp(&BigRational::zero());
        let sb = self.b.cmp(&BigRational::zero());
        if sb == Ordering::Equal {
            return sa;
        }
        if sa == Ordering::Equal || sa == sb {
            return sb;
        }
        // Opposite signs: the larger of a² and 3b² wins.
        if self.norm().is_positive() {
            sa
        } else {
            sb
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.a.to_f64().unwrap_or(f64::NAN) + self.b.to_f64().unwrap_or(f64::NAN) * 3f64.sqrt()
    }

    pub fn pow(&self, n: i64) -> Q3 {
        let base = if n < 0 { self.recip() } else { self.clone() };
        let mut acc = Q3::one();
        for _ in 0..n.unsigned_abs() {
            acc = &acc * &base;
        }
        acc
    }

    /// As an expression a + b·sqrt(3).
    pub fn to_expr(&self) -> Expr {
        let a = Expr::num(self.a.clone());
        if self.b.is_zero() {
            return a;
        }
        a + Expr::num(self.b.clone()) * Expr::func(Func::Sqrt, Expr::int(3))
    }

    /// Evaluates a constant expression built from rationals, +, ×, integer
    /// powers and square roots whose value lies in ℚ(√3).
    pub fn from_expr(e: &Expr) -> Option<Q3> {
        match e.node() {
            Node::Num(r) => Some(Q3::rational(r.clone())),
            Node::Add(ts) => ts.iter().try_fold(Q3::zero(), |acc, t| Some(&acc + &Q3::from_expr(t)?)),
            Node::Mul(fs) => fs.iter().try_fold(Q3::one(), |acc, f| Some(&acc * &Q3::from_expr(f)?)),
            Node::Func(Func::Sqrt, x) => sqrt_in_field(&Q3::from_expr(x)?),
            Node::Pow(b, p) => {
                let base = Q3::from_expr(b)?;
                let p = p.as_num()?;
                let two = BigInt::from(2);
                if p.is_integer() {
                    return Some(base.pow(p.to_integer().to_i64()?));
                }
                if p.denom() == &two {
                    let root = sqrt_in_field(&base)?;
                    return Some(root.pow(p.numer().to_i64()?));
                }
                None
            }
            _ => None,
        }
    }
}

/// √r for rational r of the form s² or 3s².
fn sqrt_in_field(x: &Q3) -> Option<Q3> {
    if !x.is_rational() || x.a.is_negative() {
        return None;
    }
    if let Some(s) = rational_sqrt(&x.a) {
        return Some(Q3::rational(s));
    }
    let third = &x.a / BigRational::from_integer(BigInt::from(3));
    rational_sqrt(&third).map(|s| Q3 { a: BigRational::zero(), b: s })
}

fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    let (n, d) = (r.numer(), r.denom());
    let (sn, sd) = (n.sqrt(), d.sqrt());
    (&sn * &sn == *n && &sd * &sd == *d).then(|| BigRational::new(sn, sd))
}

impl fmt::Display for Q3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a.is_zero(), self.b.is_zero()) {
            (_, true) => write!(f, "{}", self.a),
            (true, false) => write!(f, "{}*sqrt(3)", self.b),
            (false, false) => write!(f, "{} + {}*sqrt(3)", self.a, self.b),
        }
    }
}

impl Serialize for Q3 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'a> Add<&'a Q3> for &'a Q3 {
    type Output = Q3;
    fn add(self, o: &Q3) -> Q3 {
        Q3 { a: &self.a + &o.a, b: &self.b + &o.b }
    }
}

impl<'a> Sub<&'a Q3> for &'a Q3 {
    type Output = Q3;
    fn sub(self, o: &Q3) -> Q3 {
        Q3 { a: &self.a - &o.a, b: &self.b - &o.b }
    }
}

impl<'a> Mul<&'a Q3> for &'a Q3 {
    type Output = Q3;
    fn mul(self, o: &Q3) -> Q3 {
        let three = BigRational::from_integer(BigInt::from(3));
        Q3 { a: &self.a * &o.a + three * &self.b * &o.b, b: &self.a * &o.b + &self.b * &o.a }
    }
}

impl<'a> Div<&'a Q3> for &'a Q3 {
    type Output = Q3;
    fn div(self, o: &Q3) -> Q3 {
        self * &o.recip()
    }
}

impl Neg for &Q3 {
    type Output = Q3;
    fn neg(self) -> Q3 {
        Q3 { a: -self.a.clone(), b: -self.b.clone() }
    }
}

impl Add for Q3 {
    type Output = Q3;
    fn add(self, o: Q3) -> Q3 {
        &self + &o
    }
}

impl Sub for Q3 {
    type Output = Q3;
    fn sub(self, o: Q3) -> Q3 {
        &self - &o
    }
}

impl Mul for Q3 {
    type Output = Q3;
    fn mul(self, o: Q3) -> Q3 {
        &self * &o
    }
}

impl Neg for Q3 {
    type Output = Q3;
    fn neg(self) -> Q3 {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ex;

    #[test]
    fn field_operations() {
        let s = Q3::sqrt3();
        assert_eq!(&s * &s, Q3::int(3));
        let x = &Q3::int(2) + &s;
        assert_eq!(&x * &x.recip(), Q3::one());
        assert_eq!((&Q3::int(1) / &s).to_string(), "1/3*sqrt(3)");
    }

    #[test]
    fn exact_sign() {
        // 2 − √3 > 0, 1 − √3 < 0, −7 + 4√3 < 0 (48 < 49).
        assert_eq!(Q3::new(BigRational::from_integer(2.into()), -BigRational::one()).signum(), Ordering::Greater);
        assert_eq!(Q3::new(BigRational::one(), -BigRational::one()).signum(), Ordering::Less);
        let v = Q3::new(BigRational::from_integer((-7).into()), BigRational::from_integer(4.into()));
        assert_eq!(v.signum(), Ordering::Less);
        assert!(v.to_f64() < 0.0);
    }

    #[test]
    fn constants_from_text() {
        assert_eq!(Q3::from_expr(&ex("2/sqrt(3)")).unwrap(), Q3::new(BigRational::zero(), BigRational::new(2.into(), 3.into())));
        assert_eq!(Q3::from_expr(&ex("sqrt(12)*3^(1/2)")).unwrap(), Q3::int(6));
        assert_eq!(Q3::from_expr(&ex("-1/3")).unwrap(), Q3::frac(-1, 3));
        assert!(Q3::from_expr(&ex("sqrt(2)")).is_none());
        assert!(Q3::from_expr(&ex("x")).is_none());
    }
}
