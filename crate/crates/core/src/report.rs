//! Verdict reports shared by the equation pipelines.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curvature::CurvatureError;
use crate::expr::{EvalError, Expr, ZeroTestError, ZeroTestVerdict};
use crate::exterior::ExteriorError;

#[derive(Debug, Error)]
pub enum OdeError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
    #[error(transparent)]
    ZeroTest(#[from] ZeroTestError),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Residuals larger than this many DAG nodes are summarized, not printed.
pub const PRINT_LIMIT: usize = 400;

/// Printable form of a residual, or a size summary for large ones.
pub fn summarize(e: &Expr) -> String {
    let n = e.dag_size();
    if n <= PRINT_LIMIT {
        e.to_string()
    } else {
        format!("<expression with {} nodes>", n)
    }
}

/// One zero test inside a report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub verdict: ZeroTestVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<String>,
}

impl Check {
    pub fn new(name: &str, verdict: ZeroTestVerdict, residual: Option<&Expr>) -> Check {
        Check { name: name.into(), verdict, residual: residual.map(summarize) }
    }

    pub fn is_zero(&self) -> bool {
        self.verdict.is_zero()
    }
}

/// Classification verdict with the zero tests behind it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvariantReport {
    pub subject: String,
    pub input: BTreeMap<String, String>,
    pub classification: String,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
    /// False when the checks contradict an equivalence the construction
    /// relies on (e.g. a vanishing Weyl tensor without vanishing invariants).
    pub consistent: bool,
}

impl InvariantReport {
    pub fn new(subject: &str) -> InvariantReport {
        InvariantReport {
            subject: subject.into(),
            input: BTreeMap::new(),
            classification: String::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            consistent: true,
        }
    }

    pub fn input(mut self, k: &str, v: impl Into<String>) -> Self {
        self.input.insert(k.into(), v.into());
        self
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Whether the named check found its quantity identically zero.
    ///
    /// # Panics
    /// If no such check exists.
    pub fn is_zero(&self, name: &str) -> bool {
        self.check(name).unwrap_or_else(|| panic!("no check `{}` in report", name)).is_zero()
    }
}
