//! Charts, vector fields, differential and symmetric forms.

mod chart;
mod form;
mod symmetric;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Expr, ParseError, ZeroTestError};

pub use chart::Chart;
pub use form::{DifferentialForm, VectorField};
pub use symmetric::{conformal_transport_factor, inertia, SymmetricForm, TransportOutcome};

#[derive(Debug, Error)]
pub enum ExteriorError {
    #[error("duplicate coordinate `{0}`")]
    DuplicateCoordinate(String),
    #[error("unknown coordinate `{0}`")]
    UnknownCoordinate(String),
    #[error("chart mismatch: expected {expected}, found {found}")]
    ChartMismatch { expected: String, found: String },
    #[error("expected {expected} components, found {found}")]
    Arity { expected: usize, found: usize },
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("degree {degree} exceeds dimension {dim}")]
    DegreeOverflow { degree: usize, dim: usize },
    #[error("every component of the form vanishes on the box")]
    VanishingForm,
    #[error("malformed form document: {0}")]
    Json(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    ZeroTest(#[from] ZeroTestError),
}

/// Equation classes with their jet charts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OdeClass {
    /// y''' = F(x, y, p, q)
    ThirdOrder,
    /// y'' = Q(x, y, p), with the fiber coordinate phi
    SecondOrder,
    /// z' = F(x, y, y', z)
    Monge1,
    /// z' = F(x, y, y', y'', z)
    Monge2,
}

impl OdeClass {
    pub fn chart(self) -> Arc<Chart> {
        match self {
            OdeClass::ThirdOrder => Chart::j2_third(),
            OdeClass::SecondOrder => Chart::j1_ext(),
            OdeClass::Monge1 => Chart::monge1(),
            OdeClass::Monge2 => Chart::monge2(),
        }
    }

    pub fn parse(s: &str) -> Option<OdeClass> {
        match s {
            "3rd-order" | "third-order" | "ode3" => Some(OdeClass::ThirdOrder),
            "2nd-order" | "second-order" | "ode2" => Some(OdeClass::SecondOrder),
            "monge1" => Some(OdeClass::Monge1),
            "monge2" => Some(OdeClass::Monge2),
            _ => None,
        }
    }
}

const ALL_COORDS: &[&str] = &["x", "y", "p", "q", "z", "phi", "t", "v"];

/// Rejects defining functions that use a jet coordinate foreign to the chart.
pub fn check_chart_symbols(chart: &Chart, f: &Expr) -> Result<(), ExteriorError> {
    for s in f.symbols() {
        if ALL_COORDS.contains(&&*s) && chart.index_of(&s).is_none() {
            return Err(ExteriorError::ChartMismatch { expected: chart.name().into(), found: format!("symbol `{}`", s) });
        }
    }
    Ok(())
}

/// The total derivative of the class with `f` in its designated slot:
/// ∂x + p∂y + q∂p + F∂q (third order), ∂x + p∂y + Q∂p (second order),
/// ∂x + p∂y + F∂z (first-order Monge), ∂x + p∂y + q∂p + F∂z (second-order Monge).
pub fn total_derivative(class: OdeClass, f: &Expr) -> Result<VectorField, ExteriorError> {
    let chart = class.chart();
    check_chart_symbols(&chart, f)?;
    let (one, p, q, zero) = (Expr::one(), Expr::sym("p"), Expr::sym("q"), Expr::zero());
    let comps = match class {
        OdeClass::ThirdOrder => vec![one, p, q, f.clone()],
        OdeClass::SecondOrder => vec![one, p, f.clone(), zero],
        OdeClass::Monge1 => vec![one, p, zero, f.clone()],
        OdeClass::Monge2 => vec![one, p, q, zero, f.clone()],
    };
    VectorField::new(chart, comps)
}

/// Contact forms of the class; each annihilates the total derivative.
pub fn contact_forms(class: OdeClass, f: &Expr) -> Result<Vec<DifferentialForm>, ExteriorError> {
    let chart = class.chart();
    check_chart_symbols(&chart, f)?;
    let one = Expr::one();
    let neg = |e: Expr| e.neg();
    let mk = |pairs: &[(&str, Expr)]| DifferentialForm::from_pairs(chart.clone(), pairs);
    let dy = mk(&[("y", one.clone()), ("x", neg(Expr::sym("p")))])?;
    Ok(match class {
        OdeClass::ThirdOrder => {
            vec![dy, mk(&[("p", one.clone()), ("x", neg(Expr::sym("q")))])?, mk(&[("q", one.clone()), ("x", neg(f.clone()))])?]
        }
        OdeClass::SecondOrder => vec![dy, mk(&[("p", one.clone()), ("x", neg(f.clone()))])?],
        OdeClass::Monge1 => vec![dy, mk(&[("z", one.clone()), ("x", neg(f.clone()))])?],
        OdeClass::Monge2 => {
            vec![dy, mk(&[("p", one.clone()), ("x", neg(Expr::sym("q")))])?, mk(&[("z", one.clone()), ("x", neg(f.clone()))])?]
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ex;

    #[test]
    fn third_order_flat() {
        let d = total_derivative(OdeClass::ThirdOrder, &Expr::zero()).unwrap();
        assert_eq!(d.components, vec![Expr::one(), ex("p"), ex("q"), Expr::zero()]);
    }

    #[test]
    fn monge2_slot() {
        let d = total_derivative(OdeClass::Monge2, &ex("q^2")).unwrap();
        assert_eq!(d.components, vec![Expr::one(), ex("p"), ex("q"), Expr::zero(), ex("q^2")]);
    }

    #[test]
    fn monge1_condition_for_y() {
        let f = ex("y");
        let d = total_derivative(OdeClass::Monge1, &f).unwrap();
        let fp = f.diff("p");
        let r = d.apply(&fp) - f.diff("y") - fp.clone() * f.diff("z");
        assert_eq!(r, Expr::int(-1));
    }

    #[test]
    fn foreign_symbols_rejected() {
        assert!(total_derivative(OdeClass::Monge1, &ex("q")).is_err());
        assert!(total_derivative(OdeClass::ThirdOrder, &ex("alpha*q")).is_ok());
    }

    #[test]
    fn contact_forms_annihilate_total_derivative() {
        for class in [OdeClass::ThirdOrder, OdeClass::SecondOrder, OdeClass::Monge1, OdeClass::Monge2] {
            let f = match class {
                OdeClass::Monge1 => ex("p^2 + z*y"),
                OdeClass::SecondOrder => ex("p^3 + x*y"),
                _ => ex("q^2 + p*y"),
            };
            let d = total_derivative(class, &f).unwrap();
            for w in contact_forms(class, &f).unwrap() {
                let r = w.interior(&d).unwrap().coefficient(&[]);
                assert!(r.is_zero(), "{:?} {}", class, r);
            }
        }
    }
}
