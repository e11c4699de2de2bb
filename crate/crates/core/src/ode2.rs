//! Second-order equations y'' = Q(x, y, p): the split-signature metric on
//! J¹ × R and the point invariants w1, w2.

use std::sync::Arc;

use crate::curvature::{weyl, MetricTensor};
use crate::expr::{Differentiator, DomainBox, Expr, ZeroTestConfig, DEFAULT_MARGIN};
use crate::exterior::{check_chart_symbols, total_derivative, Chart, DifferentialForm, OdeClass, SymmetricForm, VectorField};
use crate::report::{Check, InvariantReport, OdeError};

#[derive(Clone, Debug)]
pub struct SecondOrderODE {
    pub q: Expr,
    pub domain: DomainBox,
}

impl SecondOrderODE {
    pub fn new(q: Expr, domain: DomainBox) -> Result<SecondOrderODE, OdeError> {
        check_chart_symbols(&Chart::j1_ext(), &q)?;
        if q.symbols().iter().any(|s| &**s == "phi") {
            return Err(OdeError::Precondition("Q must not depend on the fiber coordinate phi".into()));
        }
        Ok(SecondOrderODE { q, domain })
    }

    pub fn with_inferred_domain(q: Expr, mut domain: DomainBox) -> Result<SecondOrderODE, OdeError> {
        domain.infer_margins(&q, DEFAULT_MARGIN);
        SecondOrderODE::new(q, domain)
    }

    pub fn chart(&self) -> Arc<Chart> {
        Chart::j1_ext()
    }

    /// D = ∂x + p∂y + Q∂p.
    pub fn total_derivative(&self) -> VectorField {
        total_derivative(OdeClass::SecondOrder, &self.q).expect("chart checked on construction")
    }
}

/// g = 2[(dp − Q dx) dx − (dy − p dx)(dφ + ⅔Q_p dx + ⅙Q_pp (dy − p dx))],
/// declared with signature (2, 2).
pub fn fefferman_metric(ode: &SecondOrderODE) -> MetricTensor {
    let c = ode.chart();
    let q = &ode.q;
    let qp = q.diff("p");
    let qpp = qp.diff("p");
    let p = Expr::sym("p");
    let form = |v: [Expr; 4]| DifferentialForm::one_form(c.clone(), v.to_vec()).unwrap();
    let (one, zero) = (Expr::one(), Expr::zero());
    let dx = DifferentialForm::dx(c.clone(), 0);
    let w2 = form([q.neg(), zero.clone(), one.clone(), zero.clone()]);
    let w1 = form([p.neg(), one.clone(), zero.clone(), zero.clone()]);
    let sixth = Expr::rational(1, 6) * qpp;
    let b = form([Expr::rational(2, 3) * qp - &sixth * &p, sixth, zero, one]);
    let s = SymmetricForm::product(&w2, &dx).unwrap().sub(&SymmetricForm::product(&w1, &b).unwrap()).unwrap().scale(&Expr::int(2));
    MetricTensor::from_symmetric_form(&s, ode.domain.clone()).expect("symmetric by construction").with_signature(2, 2)
}

#[derive(Clone, Debug)]
pub struct Ode2Invariants {
    pub w1: Expr,
    pub w2: Expr,
}

/// w1 = D²Q_pp − 4DQ_py − Q_p DQ_pp + 4Q_p Q_py − 3Q_pp Q_y + 6Q_yy, w2 = Q_pppp.
pub fn ode2_invariants(ode: &SecondOrderODE) -> Ode2Invariants {
    let q = &ode.q;
    let d = ode.total_derivative();
    let mut dd = Differentiator::new();
    let qp = dd.diff(q, "p");
    let qy = dd.diff(q, "y");
    let qpp = dd.diff(&qp, "p");
    let qpy = dd.diff(&qp, "y");
    let qyy = dd.diff(&qy, "y");
    let w2 = dd.diff(&qpp, "p");
    let w2 = dd.diff(&w2, "p");
    let dqpp = d.apply_with(&mut dd, &qpp);
    let w1 = d.apply_with(&mut dd, &dqpp) - Expr::int(4) * d.apply_with(&mut dd, &qpy) - &qp * &dqpp + Expr::int(4) * (&qp * &qpy)
        - Expr::int(3) * (&qpp * &qy)
        + Expr::int(6) * qyy;
    Ode2Invariants { w1, w2 }
}

/// Tests w1, w2 and the Weyl tensor of the metric; the report is consistent
/// when Weyl ≡ 0 exactly when both invariants vanish.
pub fn fefferman_flatness_check(ode: &SecondOrderODE, cfg: &ZeroTestConfig) -> Result<InvariantReport, OdeError> {
    let inv = ode2_invariants(ode);
    let g = fefferman_metric(ode);
    g.check_nondegenerate(cfg)?;
    let v1 = inv.w1.is_zero_on(&ode.domain, cfg)?;
    let v2 = inv.w2.is_zero_on(&ode.domain, cfg)?;
    let vw = weyl(&g)?.zero_test(cfg)?;
    let flat = vw.is_zero();
    let mut rep = InvariantReport::new("ode2").input("Q", ode.q.to_string());
    rep.consistent = flat == (v1.is_zero() && v2.is_zero());
    if !rep.consistent {
        rep.notes.push("Weyl vanishing disagrees with joint vanishing of w1, w2".into());
    }
    rep.push(Check::new("w1", v1, Some(&inv.w1)));
    rep.push(Check::new("w2", v2, Some(&inv.w2)));
    rep.push(Check::new("Weyl", vw, None));
    rep.classification = if flat { "conformally-flat" } else { "not-conformally-flat" }.into();
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::curvature_package;
    use crate::expr::ex;

    fn ode(q: &str) -> SecondOrderODE {
        SecondOrderODE::new(ex(q), DomainBox::new()).unwrap()
    }

    #[test]
    fn flat_metric_components() {
        // Q = 0: g = 2 dp·dx − 2 (dy − p dx)·dφ.
        let g = fefferman_metric(&ode("0"));
        assert_eq!(*g.component(0, 2), Expr::one());
        assert_eq!(*g.component(1, 3), Expr::int(-1));
        assert_eq!(*g.component(0, 3), ex("p"));
        assert!(g.component(0, 0).is_zero() && g.component(3, 3).is_zero());
        let cfg = ZeroTestConfig::default();
        assert!(g.check_nondegenerate(&cfg).is_ok());
        // Not flat: Ric = −½ dφ² (independent symbolic expansion), but Weyl ≡ 0.
        let ric = curvature_package(&g).unwrap().ricci;
        let v = ric.values_at(&[("p".to_string(), 0.3)].into_iter().collect()).unwrap();
        for (i, x) in v.iter().enumerate() {
            let want = if i == 15 { -0.5 } else { 0.0 };
            assert!((x - want).abs() < 1e-14, "{:?}", v);
        }
        assert!(weyl(&g).unwrap().zero_test(&cfg).unwrap().is_zero());
    }

    #[test]
    fn fiber_is_null() {
        let g = fefferman_metric(&ode("p^3 + x*y"));
        assert!(g.component(3, 3).is_zero());
        assert!(g.component(3, 2).is_zero());
        assert_eq!(*g.component(3, 1), Expr::int(-1));
    }

    #[test]
    fn quartic_invariants() {
        let inv = ode2_invariants(&ode("p^4"));
        let cfg = ZeroTestConfig::default();
        assert!((inv.w1 - ex("24*p^8")).is_zero_on(&DomainBox::new(), &cfg).unwrap().is_zero());
        assert_eq!(inv.w2, Expr::int(24));
    }

    #[test]
    fn rejects_phi() {
        assert!(SecondOrderODE::new(ex("phi*p"), DomainBox::new()).is_err());
        assert!(SecondOrderODE::new(ex("q"), DomainBox::new()).is_err());
    }
}
