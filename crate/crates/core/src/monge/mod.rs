//! Monge equations z' = F(x, y, y', z) and z' = F(x, y, y', y'', z):
//! classification, parametrized solutions, the (3,2) conformal metric and
//! the single-variable family F = F(y'').

mod g32;
mod single_variable;

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::expr::{symbol, zero_test_exprs, Differentiator, DomainBox, Expr, ZeroTestConfig, ZeroTestVerdict, DEFAULT_MARGIN};
use crate::exterior::{check_chart_symbols, total_derivative, Chart, OdeClass, VectorField};
use crate::report::{Check, InvariantReport, OdeError};

pub use g32::{g32_metric, g32_term_table, transcription_check, G32Term, SlotCheck, TranscriptionReport};
pub use single_variable::{
    einstein_scale_metric, einstein_scale_residual, frame_metric, frame_weyl, psi_invariant, single_variable_a5, single_variable_coframe,
    single_variable_metric, weyl_frame_pattern_check, PsiInvariants, ScaleRelation, SingleVariableCoframe, FRAME_A5_SIGN,
};

/// z' = F(x, y, p, z).
#[derive(Clone, Debug)]
pub struct MongeFirst {
    pub f: Expr,
    pub domain: DomainBox,
}

impl MongeFirst {
    pub fn new(f: Expr, domain: DomainBox) -> Result<MongeFirst, OdeError> {
        check_chart_symbols(&Chart::monge1(), &f)?;
        Ok(MongeFirst { f, domain })
    }

    pub fn with_inferred_domain(f: Expr, mut domain: DomainBox) -> Result<MongeFirst, OdeError> {
        domain.infer_margins(&f, DEFAULT_MARGIN);
        MongeFirst::new(f, domain)
    }

    /// D = ∂x + p∂y + F∂z.
    pub fn total_derivative(&self) -> VectorField {
        total_derivative(OdeClass::Monge1, &self.f).expect("chart checked on construction")
    }
}

/// z' = F(x, y, p, q, z).
#[derive(Clone, Debug)]
pub struct MongeSecond {
    pub f: Expr,
    pub domain: DomainBox,
}

impl MongeSecond {
    pub fn new(f: Expr, domain: DomainBox) -> Result<MongeSecond, OdeError> {
        check_chart_symbols(&Chart::monge2(), &f)?;
        Ok(MongeSecond { f, domain })
    }

    pub fn with_inferred_domain(f: Expr, mut domain: DomainBox) -> Result<MongeSecond, OdeError> {
        domain.infer_margins(&f, DEFAULT_MARGIN);
        MongeSecond::new(f, domain)
    }

    pub fn chart(&self) -> Arc<Chart> {
        Chart::monge2()
    }

    /// D = ∂x + p∂y + q∂p + F∂z.
    pub fn total_derivative(&self) -> VectorField {
        total_derivative(OdeClass::Monge2, &self.f).expect("chart checked on construction")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Monge1Branch {
    /// F_pp ≡ 0 and DF_p − F_y − F_p F_z ≡ 0: solutions use w, w'.
    Cc2,
    /// Otherwise: solutions use w, w', w''.
    Cc1,
}

impl Monge1Branch {
    pub fn name(self) -> &'static str {
        match self {
            Monge1Branch::Cc2 => "branch-cc2",
            Monge1Branch::Cc1 => "branch-cc1",
        }
    }
}

/// The two residuals F_pp and DF_p − F_y − F_p F_z.
pub fn monge1_conditions(m: &MongeFirst) -> [Expr; 2] {
    let f = &m.f;
    let fp = f.diff("p");
    let second = m.total_derivative().apply(&fp) - f.diff("y") - &fp * &f.diff("z");
    [fp.diff("p"), second]
}

pub fn classify_monge1(m: &MongeFirst, cfg: &ZeroTestConfig) -> Result<(Monge1Branch, InvariantReport), OdeError> {
    let [c1, c2] = monge1_conditions(m);
    let v1 = c1.is_zero_on(&m.domain, cfg)?;
    let v2 = c2.is_zero_on(&m.domain, cfg)?;
    let b = if v1.is_zero() && v2.is_zero() { Monge1Branch::Cc2 } else { Monge1Branch::Cc1 };
    let mut rep = InvariantReport::new("monge1").input("F", m.f.to_string());
    rep.push(Check::new("F_pp", v1, Some(&c1)));
    rep.push(Check::new("DF_p - F_y - F_p F_z", v2, Some(&c2)));
    rep.classification = b.name().into();
    rep.notes.push(
        match b {
            Monge1Branch::Cc2 => "general solution uses w(t), w'(t) only",
            Monge1Branch::Cc1 => "general solution uses w(t), w'(t), w''(t)",
        }
        .into(),
    );
    Ok((b, rep))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Monge2Class {
    /// F_qq ≡ 0.
    IntegralFree,
    /// F_qq ≢ 0: the (3,2) conformal structure exists.
    G2,
}

pub fn classify_monge2(m: &MongeSecond, cfg: &ZeroTestConfig) -> Result<(Monge2Class, InvariantReport), OdeError> {
    let fqq = m.f.diff("q").diff("q");
    let v = fqq.is_zero_on(&m.domain, cfg)?;
    let c = if v.is_zero() { Monge2Class::IntegralFree } else { Monge2Class::G2 };
    let mut rep = InvariantReport::new("monge2").input("F", m.f.to_string());
    rep.push(Check::new("F_qq", v, Some(&fqq)));
    rep.classification = match c {
        Monge2Class::IntegralFree => "fqq-zero",
        Monge2Class::G2 => "g2",
    }
    .into();
    Ok((c, rep))
}

/// x(t), y(t), z(t) in terms of t and the jets w_k of an arbitrary function;
/// `Int` nodes are allowed.
#[derive(Clone, Debug)]
pub struct ParametrizedSolution {
    pub x: Expr,
    pub y: Expr,
    pub z: Expr,
}

impl ParametrizedSolution {
    pub fn new(x: Expr, y: Expr, z: Expr) -> Result<ParametrizedSolution, OdeError> {
        for e in [&x, &y, &z] {
            for s in e.symbols() {
                if Chart::monge2().index_of(&s).is_some() {
                    return Err(OdeError::Precondition(format!("solution uses the jet coordinate `{}`", s)));
                }
            }
        }
        Ok(ParametrizedSolution { x, y, z })
    }

    /// From formula text, e.g. the `x`, `y`, `z` fields of a solution file.
    pub fn parse(x: &str, y: &str, z: &str) -> Result<ParametrizedSolution, OdeError> {
        let p = |s: &str| crate::expr::parse(s).map_err(|e| OdeError::Precondition(e.to_string()));
        ParametrizedSolution::new(p(x)?, p(y)?, p(z)?)
    }
}

#[derive(Clone, Copy, Debug)]
pub enum MongeEquation<'a> {
    First(&'a MongeFirst),
    Second(&'a MongeSecond),
}

/// Substitutes the solution into the equation and zero-tests
/// z'/x' − F(x, y, y'/x', (y'/x')'/x', z) over t and the w_k.
pub fn verify_parametrized_solution(
    eq: MongeEquation,
    sol: &ParametrizedSolution,
    domain: &DomainBox,
    cfg: &ZeroTestConfig,
) -> Result<ZeroTestVerdict, OdeError> {
    let mut d = Differentiator::new();
    let xt = d.diff(&sol.x, "t");
    let yt = d.diff(&sol.y, "t");
    let zt = d.diff(&sol.z, "t");
    let mut dom = domain.clone();
    for e in [&sol.x, &sol.y, &sol.z] {
        dom.infer_margins(e, DEFAULT_MARGIN);
    }
    if xt.is_zero_on(&dom, cfg)?.is_zero() {
        return Err(OdeError::Precondition("dx/dt vanishes on the box".into()));
    }
    let yp = yt.div(&xt);
    let zp = zt.div(&xt);
    let (f, yq) = match eq {
        MongeEquation::First(m) => (&m.f, None),
        MongeEquation::Second(m) => (&m.f, Some(d.diff(&yp, "t").div(&xt))),
    };
    let mut b: HashMap<_, Expr> = HashMap::new();
    b.insert(symbol("x"), sol.x.clone());
    b.insert(symbol("y"), sol.y.clone());
    b.insert(symbol("z"), sol.z.clone());
    b.insert(symbol("p"), yp);
    if let Some(q) = yq {
        b.insert(symbol("q"), q);
    }
    let residual = zp - f.substitute(&b);
    if residual.contains_int() {
        return Err(OdeError::Precondition("an integral survives differentiation".into()));
    }
    Ok(zero_test_exprs(&[residual], &dom, cfg)?)
}
