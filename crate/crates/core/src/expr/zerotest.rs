//! Randomized zero testing.
//!
//! A quantity is declared identically zero on a box when at every sampled
//! point `|v| <= tol * (1 + S)`, with `S` the rounding-error magnitude
//! carried by the evaluator (for a sum of terms, at least the sum of their
//! absolute values).

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::domain::{DomainBox, DomainError};
use super::eval::{EvalError, Program};
use super::node::{Expr, Symbol};
use super::scalar::{Measured, Scalar, DD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Precision {
    F64,
    #[default]
    DoubleDouble,
}

impl std::str::FromStr for Precision {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "f64" => Ok(Precision::F64),
            "double-double" | "dd" => Ok(Precision::DoubleDouble),
            _ => Err(format!("unknown precision `{}` (f64 | double-double)", s)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroTestConfig {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub precision: Precision,
}

impl Default for ZeroTestConfig {
    fn default() -> Self {
        ZeroTestConfig { samples: 20, seed: 0, tol: 1e-9, precision: Precision::DoubleDouble }
    }
}

impl ZeroTestConfig {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    IdenticallyZero,
    Nonzero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: BTreeMap<String, f64>,
    /// Index of the offending component when several quantities are tested.
    pub component: usize,
    pub value: f64,
    pub scale: f64,
    /// `|value| / (tol (1 + scale))`; above 1 means nonzero.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroTestVerdict {
    pub verdict: Verdict,
    /// Worst sample; always present for a nonzero verdict.
    pub witness: Option<Witness>,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    /// Largest magnitude scale seen over all samples.
    pub scale: f64,
    pub worst_ratio: f64,
    pub failed_points: usize,
}

impl ZeroTestVerdict {
    pub fn is_zero(&self) -> bool {
        self.verdict == Verdict::IdenticallyZero
    }

    /// Verdict for a quantity that is exactly zero without evaluation.
    pub fn trivially_zero(cfg: &ZeroTestConfig) -> Self {
        ZeroTestVerdict {
            verdict: Verdict::IdenticallyZero,
            witness: None,
            samples: 0,
            seed: cfg.seed,
            tol: cfg.tol,
            scale: 0.0,
            worst_ratio: 0.0,
            failed_points: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZeroTestError {
    #[error("box unusable: evaluation failed at {failures} of {attempts} points (last error: {last})")]
    BoxUnusable { failures: usize, attempts: usize, last: EvalError },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Zero-tests a family of pointwise quantities. `f` maps a point (ordered as
/// `vars`) to `(value, scale)` pairs, one per component.
pub fn zero_test_fn<F>(vars: &[Symbol], domain: &DomainBox, cfg: &ZeroTestConfig, f: F) -> Result<ZeroTestVerdict, ZeroTestError>
where
    F: Fn(&[f64]) -> Result<Vec<(f64, f64)>, EvalError> + Sync,
{
    let sampler = domain.sampler(vars);
    // The sampler may add constraint symbols; map back to the caller's order.
    let positions: Vec<usize> = vars.iter().map(|v| sampler.vars().iter().position(|s| s == v).unwrap()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut results: Vec<(Vec<f64>, Vec<(f64, f64)>)> = Vec::with_capacity(cfg.samples);
    let mut failures = 0usize;
    let mut attempts = 0usize;
    let mut last_err = None;
    while results.len() < cfg.samples {
        let need = cfg.samples - results.len();
        let mut batch = Vec::with_capacity(need);
        for _ in 0..need {
            let full = sampler.draw(&mut rng)?;
            batch.push(positions.iter().map(|&i| full[i]).collect::<Vec<f64>>());
        }
        let evals: Vec<_> = batch.par_iter().map(|p| f(p)).collect();
        for (p, r) in batch.into_iter().zip(evals) {
            attempts += 1;
            match r {
                Ok(v) => results.push((p, v)),
                Err(e) => {
                    failures += 1;
                    last_err = Some(e);
                }
            }
        }
        if failures * 2 > attempts.max(cfg.samples) {
            return Err(ZeroTestError::BoxUnusable { failures, attempts, last: last_err.unwrap() });
        }
    }
    let mut worst: Option<Witness> = None;
    let mut scale: f64 = 0.0;
    for (p, vals) in &results {
        for (i, &(v, s)) in vals.iter().enumerate() {
            scale = scale.max(s);
            let ratio = v.abs() / (cfg.tol * (1.0 + s));
            let ratio = if ratio.is_nan() { f64::INFINITY } else { ratio };
            if worst.as_ref().is_none_or(|w| ratio > w.ratio) {
                worst = Some(Witness {
                    point: vars.iter().zip(p).map(|(k, x)| (k.to_string(), *x)).collect(),
                    component: i,
                    value: v,
                    scale: s,
                    ratio,
                });
            }
        }
    }
    let worst_ratio = worst.as_ref().map_or(0.0, |w| w.ratio);
    let verdict = if worst_ratio <= 1.0 { Verdict::IdenticallyZero } else { Verdict::Nonzero };
    Ok(ZeroTestVerdict {
        verdict,
        witness: worst,
        samples: results.len(),
        seed: cfg.seed,
        tol: cfg.tol,
        scale,
        worst_ratio,
        failed_points: failures,
    })
}

/// Evaluates a compiled program with the configured precision, returning
/// `(value, scale)` pairs.
pub fn eval_with_scale(prog: &Program, point: &[f64], precision: Precision) -> Result<Vec<(f64, f64)>, EvalError> {
    match precision {
        Precision::DoubleDouble => prog.eval_measured(point),
        Precision::F64 => {
            let p: Vec<Measured<f64>> = point.iter().map(|&x| Measured::exact(x)).collect();
            Ok(prog.eval(&p)?.into_iter().map(|m| (m.value, m.mag)).collect())
        }
    }
}

/// Zero-tests every expression in `exprs` jointly.
pub fn zero_test_exprs(exprs: &[Expr], domain: &DomainBox, cfg: &ZeroTestConfig) -> Result<ZeroTestVerdict, ZeroTestError> {
    if exprs.iter().all(Expr::is_zero) {
        return Ok(ZeroTestVerdict::trivially_zero(cfg));
    }
    let mut vars = std::collections::BTreeSet::new();
    for e in exprs {
        vars.extend(e.symbols());
    }
    let vars: Vec<Symbol> = vars.into_iter().collect();
    let prog = Program::compile(exprs, Some(&vars))?;
    let precision = cfg.precision;
    zero_test_fn(&vars, domain, cfg, |p| eval_with_scale(&prog, p, precision))
}

impl Expr {
    pub fn is_zero_on(&self, domain: &DomainBox, cfg: &ZeroTestConfig) -> Result<ZeroTestVerdict, ZeroTestError> {
        zero_test_exprs(std::slice::from_ref(self), domain, cfg)
    }
}

/// Re-evaluates an expression at a witness point in double-double.
pub fn reevaluate(e: &Expr, w: &Witness) -> Result<f64, EvalError> {
    let prog = Program::compile(std::slice::from_ref(e), None)?;
    let p: Vec<DD> = prog
        .vars()
        .iter()
        .map(|s| w.point.get(&**s).copied().map(DD::from_f64).ok_or_else(|| EvalError::UnboundSymbol(s.to_string())))
        .collect::<Result<_, _>>()?;
    Ok(prog.eval(&p)?[0].to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn literal_zero() {
        let v = Expr::zero().is_zero_on(&DomainBox::new(), &ZeroTestConfig::default()).unwrap();
        assert!(v.is_zero());
    }

    #[test]
    fn cancellation_is_zero() {
        let e = parse("(x + y)^2 - x^2 - 2*x*y - y^2").unwrap();
        let v = e.is_zero_on(&DomainBox::new(), &ZeroTestConfig::default()).unwrap();
        assert!(v.is_zero(), "{:?}", v);
    }

    #[test]
    fn nonzero_has_reproducible_witness() {
        let e = parse("x^2 - x").unwrap();
        let v = e.is_zero_on(&DomainBox::new(), &ZeroTestConfig::default()).unwrap();
        assert_eq!(v.verdict, Verdict::Nonzero);
        let w = v.witness.unwrap();
        assert_eq!(reevaluate(&e, &w).unwrap(), w.value);
    }

    #[test]
    fn unusable_box() {
        let e = parse("sqrt(x)").unwrap();
        let b = DomainBox::new().with("x", -2.0, -1.0).unwrap();
        assert!(matches!(e.is_zero_on(&b, &ZeroTestConfig::default()), Err(ZeroTestError::BoxUnusable { .. })));
    }

    #[test]
    fn seed_determinism() {
        let e = parse("x*y^3 - 1/7").unwrap();
        let cfg = ZeroTestConfig::default();
        let a = e.is_zero_on(&DomainBox::new(), &cfg).unwrap();
        let b = e.is_zero_on(&DomainBox::new(), &cfg).unwrap();
        assert_eq!(a, b);
    }
}
