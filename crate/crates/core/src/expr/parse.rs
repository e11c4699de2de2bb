//! Recursive-descent parser for the formula grammar.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := ('-' | '+') unary | power
//! power := atom ('^' unary)?
//! atom  := number | ident | ident '(' args ')' | '(' expr ')'
//! ```

use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use super::node::{Expr, Func};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { pos: usize, name: String },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Op(char),
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn next(&mut self) -> Result<(usize, Tok), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let Some(&c) = self.src.get(self.pos) else {
            return Ok((start, Tok::End));
        };
        if c.is_ascii_digit() || (c == b'.' && self.src.get(self.pos + 1).is_some_and(u8::is_ascii_digit)) {
            return self.number(start).map(|t| (start, t));
        }
        if c.is_ascii_alphabetic() {
            while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
                self.pos += 1;
            }
            let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
            return Ok((start, Tok::Ident(s)));
        }
        if b"+-*/^(),".contains(&c) {
            self.pos += 1;
            return Ok((start, Tok::Op(c as char)));
        }
        Err(ParseError::Syntax { pos: start, msg: format!("unexpected character `{}`", c as char) })
    }

    fn number(&mut self, start: usize) -> Result<Tok, ParseError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let int_part = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let mut value =
            if int_part.is_empty() { BigRational::zero() } else { BigRational::from_integer(int_part.parse::<BigInt>().unwrap()) };
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            let frac_start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let digits = std::str::from_utf8(&self.src[frac_start..self.pos]).unwrap();
            if !digits.is_empty() {
                let n: BigInt = digits.parse().unwrap();
                let d = num_traits::pow::pow(BigInt::from(10), digits.len());
                value += BigRational::new(n, d);
            }
        }
        if self.src.get(self.pos).is_some_and(|c| c.is_ascii_alphabetic() || *c == b'_') {
            return Err(ParseError::Syntax { pos: self.pos, msg: "malformed number".into() });
        }
        Ok(Tok::Num(value))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    tok_pos: usize,
    allowed: Option<&'a HashSet<String>>,
}

impl<'a> Parser<'a> {
    fn advance(&mut self) -> Result<(), ParseError> {
        let (pos, tok) = self.lexer.next()?;
        self.tok = tok;
        self.tok_pos = pos;
        Ok(())
    }

    fn error<T>(&self, msg: &str) -> Result<T, ParseError> {
        Err(ParseError::Syntax { pos: self.tok_pos, msg: msg.to_string() })
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.tok == Tok::Op(c) {
            self.advance()
        } else {
            self.error(&format!("expected `{}`", c))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.tok {
                Tok::Op('+') => {
                    self.advance()?;
                    terms.push(self.term()?);
                }
                Tok::Op('-') => {
                    self.advance()?;
                    terms.push(self.term()?.neg());
                }
                _ => break,
            }
        }
        Ok(Expr::add(terms))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.tok {
                Tok::Op('*') => {
                    self.advance()?;
                    acc = Expr::mul(vec![acc, self.unary()?]);
                }
                Tok::Op('/') => {
                    self.advance()?;
                    acc = Expr::div(&acc, &self.unary()?);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.tok {
            Tok::Op('-') => {
                self.advance()?;
                Ok(self.unary()?.neg())
            }
            Tok::Op('+') => {
                self.advance()?;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.tok == Tok::Op('^') {
            self.advance()?;
            let exp = self.unary()?;
            return Ok(Expr::pow(base, exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.tok.clone() {
            Tok::Num(r) => {
                self.advance()?;
                Ok(Expr::num(r))
            }
            Tok::Op('(') => {
                self.advance()?;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let pos = self.tok_pos;
                self.advance()?;
                if self.tok == Tok::Op('(') {
                    self.advance()?;
                    return self.call(&name, pos);
                }
                if let Some(allowed) = self.allowed {
                    if !allowed.contains(&name) {
                        return Err(ParseError::UnknownIdentifier { pos, name });
                    }
                }
                Ok(Expr::sym(&name))
            }
            Tok::End => self.error("unexpected end of input"),
            Tok::Op(c) => self.error(&format!("unexpected `{}`", c)),
        }
    }

    fn call(&mut self, name: &str, pos: usize) -> Result<Expr, ParseError> {
        if name == "int" {
            let body = self.expr()?;
            self.expect(',')?;
            let var = match self.tok.clone() {
                Tok::Ident(v) => v,
                _ => return self.error("expected integration variable"),
            };
            self.advance()?;
            self.expect(')')?;
            return Ok(Expr::integral(body, &var));
        }
        let Some(func) = Func::from_name(name) else {
            return Err(ParseError::UnknownIdentifier { pos, name: name.to_string() });
        };
        let arg = self.expr()?;
        self.expect(')')?;
        Ok(Expr::func(func, arg))
    }
}

fn run(text: &str, allowed: Option<&HashSet<String>>) -> Result<Expr, ParseError> {
    let mut p = Parser { lexer: Lexer { src: text.as_bytes(), pos: 0 }, tok: Tok::End, tok_pos: 0, allowed };
    p.advance()?;
    let e = p.expr()?;
    if p.tok != Tok::End {
        return p.error("trailing input");
    }
    Ok(e)
}

/// Parses a formula, accepting any identifier as a symbol.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    run(text, None)
}

/// Parses a formula whose symbols must all belong to `allowed`.
pub fn parse_with(text: &str, allowed: &HashSet<String>) -> Result<Expr, ParseError> {
    run(text, Some(allowed))
}

/// Parses a bare rational literal such as `3/2` or `-0.25`.
pub fn parse_rational(text: &str) -> Result<BigRational, ParseError> {
    let e = parse(text)?;
    e.as_num().cloned().ok_or(ParseError::Syntax { pos: 0, msg: format!("`{}` is not a number", text) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Node;

    #[test]
    fn power_is_right_associative() {
        let e = parse("2^3^2").unwrap();
        assert_eq!(e, Expr::int(512));
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        assert_eq!(parse("-x^2").unwrap(), Expr::sym("x").powi(2).neg());
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse("0.25").unwrap(), Expr::rational(1, 4));
    }

    #[test]
    fn syntax_error_reports_position() {
        match parse("x + * y") {
            Err(ParseError::Syntax { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{:?}", other),
        }
        assert!(matches!(parse("(x"), Err(ParseError::Syntax { pos: 2, .. })));
    }

    #[test]
    fn unknown_identifiers() {
        assert!(matches!(parse("sin(x)"), Err(ParseError::UnknownIdentifier { .. })));
        let allowed: HashSet<String> = ["q".to_string()].into();
        assert!(parse_with("q^2", &allowed).is_ok());
        assert!(matches!(parse_with("q*r", &allowed), Err(ParseError::UnknownIdentifier { pos: 2, .. })));
    }

    #[test]
    fn example_numerator_shape() {
        let e = parse("(2*q*y - p^2)^(3/2)/y^2").unwrap();
        match e.node() {
            Node::Mul(fs) => assert_eq!(fs.len(), 2),
            _ => panic!(),
        }
    }
}
