//! Symbolic expressions over jet coordinates.

mod diff;
mod domain;
mod eval;
mod node;
mod parse;
mod print;
mod scalar;
mod subst;
mod zerotest;

pub use diff::{family_index, Differentiator};
pub use domain::{Constraint, ConstraintKind, DomainBox, DomainError, Interval, Sampler, DEFAULT_MARGIN};
pub use eval::{eval_f64, EvalError, Program};
pub use node::{symbol, Expr, Func, Node, Symbol};
pub use parse::{parse, parse_rational, parse_with, ParseError};
pub use scalar::{Measured, Scalar, DD};
pub use subst::Substitution;
pub use zerotest::{
    eval_with_scale, reevaluate, zero_test_exprs, zero_test_fn, Precision, Verdict, Witness, ZeroTestConfig, ZeroTestError, ZeroTestVerdict,
};

/// Parses a formula that is known to be well formed.
///
/// # Panics
/// On a syntax error; meant for literals in library and test code.
pub fn ex(text: &str) -> Expr {
    parse(text).unwrap_or_else(|e| panic!("bad formula `{}`: {}", text, e))
}
