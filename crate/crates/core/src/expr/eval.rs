//! Compilation of expression DAGs to a flat instruction tape and its
//! evaluation over any [`Scalar`].

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use thiserror::Error;

use super::node::{is_integer, Expr, Func, Node, Symbol};
use super::scalar::{is_negative, Measured, Scalar, DD};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound symbol `{0}`")]
    UnboundSymbol(String),
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error("division by a vanishing quantity")]
    DivisionByZero,
    #[error("formal antiderivative left in expression; differentiate it away before evaluating")]
    ResidualIntegral,
    #[error("non-finite value")]
    NonFinite,
    #[error("singular matrix: {0}")]
    Singular(String),
}

#[derive(Debug, Clone)]
enum Op {
    Const(DD),
    Var(usize),
    Add(Vec<u32>),
    Mul(Vec<u32>),
    PowInt(u32, i64),
    PowRat(u32, BigRational),
    Pow(u32, u32),
    Sqrt(u32),
    Exp(u32),
    Log(u32),
}

/// A compiled set of expressions sharing common subexpressions.
#[derive(Debug, Clone)]
pub struct Program {
    vars: Vec<Symbol>,
    ops: Vec<Op>,
    outputs: Vec<u32>,
}

struct Compiler {
    ops: Vec<Op>,
    vars: Vec<Symbol>,
    var_index: HashMap<Symbol, usize>,
    by_ptr: HashMap<usize, u32>,
    by_value: HashMap<Expr, u32>,
}

impl Compiler {
    fn push(&mut self, op: Op) -> u32 {
        self.ops.push(op);
        (self.ops.len() - 1) as u32
    }

    fn compile(&mut self, e: &Expr) -> Result<u32, EvalError> {
        if let Some(&slot) = self.by_ptr.get(&e.ptr_id()) {
            return Ok(slot);
        }
        if let Some(&slot) = self.by_value.get(e) {
            self.by_ptr.insert(e.ptr_id(), slot);
            return Ok(slot);
        }
        let op = match e.node() {
            Node::Num(r) => Op::Const(DD::from_rational(r)),
            Node::Sym(s) => {
                let n = self.vars.len();
                let idx = *self.var_index.entry(s.clone()).or_insert(n);
                if idx == n {
                    self.vars.push(s.clone());
                }
                Op::Var(idx)
            }
            Node::Add(ts) => Op::Add(ts.iter().map(|t| self.compile(t)).collect::<Result<_, _>>()?),
            Node::Mul(fs) => Op::Mul(fs.iter().map(|f| self.compile(f)).collect::<Result<_, _>>()?),
            Node::Pow(b, x) => {
                let bs = self.compile(b)?;
                match x.as_num() {
                    Some(r) if is_integer(r) && r.numer().to_i64().is_some() => Op::PowInt(bs, r.numer().to_i64().unwrap()),
                    Some(r) => Op::PowRat(bs, r.clone()),
                    None => Op::Pow(bs, self.compile(x)?),
                }
            }
            Node::Func(f, a) => {
                let s = self.compile(a)?;
                match f {
                    Func::Sqrt => Op::Sqrt(s),
                    Func::Exp => Op::Exp(s),
                    Func::Log => Op::Log(s),
                }
            }
            Node::Int(..) => return Err(EvalError::ResidualIntegral),
        };
        let slot = self.push(op);
        self.by_ptr.insert(e.ptr_id(), slot);
        self.by_value.insert(e.clone(), slot);
        Ok(slot)
    }
}

fn vanishing<T: Scalar>(x: T) -> bool {
    let v = x.to_f64().abs();
    v == 0.0 || v <= 1e-13 * x.magnitude()
}

impl Program {
    /// Compiles `exprs`; the variable order is the order of first appearance
    /// unless `vars` fixes it.
    pub fn compile(exprs: &[Expr], vars: Option<&[Symbol]>) -> Result<Program, EvalError> {
        let mut c =
            Compiler { ops: Vec::new(), vars: Vec::new(), var_index: HashMap::new(), by_ptr: HashMap::new(), by_value: HashMap::new() };
        if let Some(vs) = vars {
            for v in vs {
                if !c.var_index.contains_key(v) {
                    c.var_index.insert(v.clone(), c.vars.len());
                    c.vars.push(v.clone());
                }
            }
        }
        let fixed = vars.map(|v| v.len());
        let outputs = exprs.iter().map(|e| c.compile(e)).collect::<Result<Vec<_>, _>>()?;
        if let Some(n) = fixed {
            if c.vars.len() > n {
                return Err(EvalError::UnboundSymbol(c.vars[n].to_string()));
            }
        }
        Ok(Program { vars: c.vars, ops: c.ops, outputs })
    }

    pub fn vars(&self) -> &[Symbol] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn n_outputs(&self) -> usize {
        self.outputs.len()
    }

    /// Evaluates every output at `point`, given in the order of [`Program::vars`].
    pub fn eval<T: Scalar>(&self, point: &[T]) -> Result<Vec<T>, EvalError> {
        if point.len() < self.vars.len() {
            return Err(EvalError::UnboundSymbol(self.vars[point.len()].to_string()));
        }
        let mut v: Vec<T> = Vec::with_capacity(self.ops.len());
        for op in &self.ops {
            let x = match op {
                Op::Const(c) => T::from_dd(*c),
                Op::Var(i) => point[*i],
                Op::Add(xs) => {
                    let mut acc = v[xs[0] as usize];
                    for &i in &xs[1..] {
                        acc = acc + v[i as usize];
                    }
                    acc
                }
                Op::Mul(xs) => {
                    let mut acc = v[xs[0] as usize];
                    for &i in &xs[1..] {
                        acc = acc * v[i as usize];
                    }
                    acc
                }
                Op::PowInt(b, n) => {
                    let b = v[*b as usize];
                    if *n < 0 && vanishing(b) {
                        return Err(EvalError::DivisionByZero);
                    }
                    b.powi(*n)
                }
                Op::PowRat(b, r) => {
                    let b = v[*b as usize];
                    if is_negative(b) {
                        return Err(EvalError::DomainViolation(format!("negative base {} under fractional power {}", b.to_f64(), r)));
                    }
                    if b.to_f64() == 0.0 {
                        if r.is_negative() {
                            return Err(EvalError::DivisionByZero);
                        }
                        T::zero()
                    } else {
                        if r.is_negative() && vanishing(b) {
                            return Err(EvalError::DivisionByZero);
                        }
                        b.powr(r)
                    }
                }
                Op::Pow(b, x) => {
                    let (b, x) = (v[*b as usize], v[*x as usize]);
                    if b.to_f64() <= 0.0 {
                        return Err(EvalError::DomainViolation(format!("non-positive base {} under symbolic power", b.to_f64())));
                    }
                    (x * b.ln()).exp()
                }
                Op::Sqrt(a) => {
                    let a = v[*a as usize];
                    if is_negative(a) {
                        return Err(EvalError::DomainViolation(format!("sqrt of negative value {}", a.to_f64())));
                    }
                    a.sqrt()
                }
                Op::Exp(a) => v[*a as usize].exp(),
                Op::Log(a) => {
                    let a = v[*a as usize];
                    if a.to_f64() <= 0.0 {
                        return Err(EvalError::DomainViolation(format!("log of non-positive value {}", a.to_f64())));
                    }
                    a.ln()
                }
            };
            if !x.to_f64().is_finite() {
                return Err(EvalError::NonFinite);
            }
            v.push(x);
        }
        Ok(self.outputs.iter().map(|&o| v[o as usize]).collect())
    }

    /// Evaluates with symbols bound by name.
    pub fn eval_named<T: Scalar>(&self, point: &HashMap<Symbol, T>) -> Result<Vec<T>, EvalError> {
        let p = self
            .vars
            .iter()
            .map(|s| point.get(s).copied().ok_or_else(|| EvalError::UnboundSymbol(s.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        self.eval(&p)
    }

    /// Double-double evaluation with rounding-error magnitudes, returning
    /// `(value, magnitude)` pairs.
    pub fn eval_measured(&self, point: &[f64]) -> Result<Vec<(f64, f64)>, EvalError> {
        let p: Vec<Measured<DD>> = point.iter().map(|&x| Measured::exact(DD::from_f64(x))).collect();
        Ok(self.eval(&p)?.into_iter().map(|m| (m.value.to_f64(), m.mag)).collect())
    }
}

/// Floating evaluation of one expression with symbols bound by name.
pub fn eval_f64(e: &Expr, point: &HashMap<Symbol, f64>) -> Result<f64, EvalError> {
    let prog = Program::compile(std::slice::from_ref(e), None)?;
    let p: HashMap<Symbol, DD> = point.iter().map(|(k, v)| (k.clone(), DD::from_f64(*v))).collect();
    Ok(prog.eval_named(&p)?[0].to_f64())
}

impl Expr {
    /// Evaluates in double-double precision and rounds to `f64`.
    pub fn eval(&self, point: &[(&str, f64)]) -> Result<f64, EvalError> {
        let map: HashMap<Symbol, f64> = point.iter().map(|(k, v)| (super::symbol(k), *v)).collect();
        eval_f64(self, &map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn fractional_power() {
        let e = parse("q^(3/2)").unwrap();
        assert_eq!(e.eval(&[("q", 4.0)]).unwrap(), 8.0);
    }

    #[test]
    fn sqrt_of_negative_is_domain_violation() {
        let e = parse("sqrt(q)").unwrap();
        assert!(matches!(e.eval(&[("q", -1.0)]), Err(EvalError::DomainViolation(_))));
    }

    #[test]
    fn unbound_symbol() {
        let e = parse("q + p").unwrap();
        assert!(matches!(e.eval(&[("q", 1.0)]), Err(EvalError::UnboundSymbol(_))));
    }

    #[test]
    fn residual_integral() {
        let e = parse("int(w_2, t)").unwrap();
        assert_eq!(e.eval(&[("w_2", 1.0), ("t", 0.0)]), Err(EvalError::ResidualIntegral));
    }

    #[test]
    fn division_by_vanishing() {
        let e = parse("1/(x - y)").unwrap();
        assert_eq!(e.eval(&[("x", 0.5), ("y", 0.5)]), Err(EvalError::DivisionByZero));
    }

    #[test]
    fn shared_subexpressions_compile_once() {
        let a = parse("(x + y)^2").unwrap();
        let b = parse("(x + y)^2 + 1").unwrap();
        let p = Program::compile(&[a, b], None).unwrap();
        assert_eq!(p.len(), 6);
    }
}
