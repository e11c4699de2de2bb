use odeconf::catalog::Catalog;
use odeconf::curvature::{bianchi_residual, metric_compatibility, weyl, weyl_traces};
use odeconf::expr::{ex, DomainBox, Expr, ZeroTestConfig};
use odeconf::ode2::*;

#[test]
fn catalog_flatness_matches_invariants() {
    let cfg = ZeroTestConfig::default();
    for e in &Catalog::builtin().ode2 {
        let o = SecondOrderODE::with_inferred_domain(ex(&e.q), e.region.domain().unwrap()).unwrap();
        let rep = fefferman_flatness_check(&o, &cfg).unwrap();
        assert!(rep.consistent, "{}", e.id);
        assert_eq!(rep.classification, e.expect, "{}", e.id);
        let inv = ode2_invariants(&o);
        if let Some(w1) = &e.w1 {
            assert!((inv.w1.clone() - ex(w1)).is_zero_on(&o.domain, &cfg).unwrap().is_zero(), "{}", e.id);
        }
        if let Some(w2) = &e.w2 {
            assert_eq!(inv.w2, ex(w2), "{}", e.id);
        }
    }
}

#[test]
fn signature_is_split_everywhere_sampled() {
    let cfg = ZeroTestConfig { samples: 40, ..Default::default() };
    for e in &Catalog::builtin().ode2 {
        let o = SecondOrderODE::with_inferred_domain(ex(&e.q), DomainBox::new()).unwrap();
        fefferman_metric(&o).check_nondegenerate(&cfg).unwrap();
    }
}

#[test]
fn quartic_curvature_identities() {
    let cfg = ZeroTestConfig::default();
    let o = SecondOrderODE::new(ex("p^4"), DomainBox::new()).unwrap();
    let g = fefferman_metric(&o);
    assert!(weyl_traces(&g).unwrap().zero_test(&cfg).unwrap().is_zero());
    assert!(bianchi_residual(&g).unwrap().zero_test(&cfg).unwrap().is_zero());
    assert!(metric_compatibility(&g).unwrap().zero_test(&cfg).unwrap().is_zero());
    let v = weyl(&g).unwrap().zero_test(&cfg).unwrap();
    assert!(!v.is_zero() && v.witness.is_some());
}

#[test]
fn mixed_equation_is_consistent() {
    // w2 = 0 but w1 = 6 Q_yy ≠ 0.
    let cfg = ZeroTestConfig::default();
    let o = SecondOrderODE::new(ex("y^3"), DomainBox::new()).unwrap();
    let inv = ode2_invariants(&o);
    assert!(inv.w2.is_zero());
    assert!((inv.w1.clone() - ex("36*y")).is_zero_on(&o.domain, &cfg).unwrap().is_zero());
    let rep = fefferman_flatness_check(&o, &cfg).unwrap();
    assert!(rep.consistent);
    assert_eq!(rep.classification, "not-conformally-flat");
    assert!(rep.is_zero("w2") && !rep.is_zero("w1"));
}

#[test]
fn invariant_degrees() {
    let o = SecondOrderODE::new(ex("x*p^2 + y^2"), DomainBox::new()).unwrap();
    assert_eq!(ode2_invariants(&o).w2, Expr::zero());
}
