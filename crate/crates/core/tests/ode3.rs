use odeconf::catalog::{formula, Catalog, Ode3Entry};
use odeconf::expr::{ex, DomainBox, Expr, ZeroTestConfig};
use odeconf::ode3::*;
use proptest::prelude::*;

fn build(e: &Ode3Entry) -> ThirdOrderODE {
    ThirdOrderODE::with_inferred_domain(formula(&e.f, &e.params).unwrap(), e.region.domain().unwrap()).unwrap()
}

#[test]
fn catalog_classifications() {
    let cfg = ZeroTestConfig::default();
    for e in &Catalog::builtin().ode3 {
        let o = build(e);
        let (c, rep) = classify3(&o, &cfg).unwrap();
        assert!(rep.consistent, "{}", e.id);
        if let Some(want) = &e.expect {
            assert_eq!(c.name(), want, "{}", e.id);
        }
        for (k, &z) in &e.zero {
            let name = if k == "C" { "C1..C5" } else { k.as_str() };
            assert_eq!(rep.is_zero(name), z, "{}: {}", e.id, k);
        }
    }
}

#[test]
fn contact_family_all_alphas() {
    let cfg = ZeroTestConfig::default();
    let c = Catalog::builtin();
    for id in ["contact-family-alpha-half", "contact-family-alpha-1", "contact-family-alpha-2"] {
        let o = build(c.ode3_entry(id).unwrap());
        let v = ode3_invariants(&o).a.is_zero_on(&o.domain, &cfg).unwrap();
        assert!(v.is_zero(), "{}", id);
    }
}

#[test]
fn q_squared_witness_matches_closed_form() {
    let cfg = ZeroTestConfig::default();
    let o = ThirdOrderODE::with_inferred_domain(ex("q^2"), DomainBox::new()).unwrap();
    let inv = ode3_invariants(&o);
    let v = inv.a.is_zero_on(&o.domain, &cfg).unwrap();
    let w = v.witness.expect("nonzero A has a witness");
    let q = w.point["q"];
    let want = -2.0 / 27.0 * q.powi(3);
    assert!((w.value - want).abs() <= 1e-9 * want.abs().max(1e-300), "{} vs {}", w.value, want);
}

#[test]
fn transport_and_closedness_track_invariants() {
    let cfg = ZeroTestConfig::default();
    for e in &Catalog::builtin().ode3 {
        let o = build(e);
        let inv = ode3_invariants(&o);
        let a0 = inv.a.is_zero_on(&o.domain, &cfg).unwrap().is_zero();
        let g0 = inv.g.is_zero_on(&o.domain, &cfg).unwrap().is_zero();
        assert_eq!(transport_check(&o, &cfg).unwrap().conformal, a0, "{}", e.id);
        assert_eq!(lie_nu_exactness(&o).zero_test(&o.domain, &cfg).unwrap().is_zero(), g0, "{}", e.id);
    }
}

#[test]
fn degenerate_direction_is_total_derivative() {
    let cfg = ZeroTestConfig::default();
    for e in &Catalog::builtin().ode3 {
        let o = build(e);
        let k = metric_tilde(&o).contract(&o.total_derivative()).unwrap();
        assert!(k.zero_test(&o.domain, &cfg).unwrap().is_zero(), "{}", e.id);
    }
}

#[test]
fn metric_tilde_signature() {
    let o = ThirdOrderODE::with_inferred_domain(ex("q^(3/2)"), DomainBox::new().with("q", 0.1, 10.0).unwrap()).unwrap();
    let g = metric_tilde(&o);
    let m = odeconf::curvature::MetricTensor::new(o.chart(), g.matrix().clone(), o.domain.clone()).unwrap();
    let pt = [("x", 0.2), ("y", -0.3), ("p", 0.5), ("q", 1.5)].iter().map(|(k, v)| (odeconf::expr::symbol(k), *v)).collect();
    assert_eq!(m.signature_at(&pt).unwrap(), (1, 2, 1));
}

#[test]
fn fourth_derivative_is_first_cotton_component() {
    for e in &Catalog::builtin().ode3 {
        let o = build(e);
        assert_eq!(ode3_invariants(&o).c[0], o.f.diff_n("q", 4), "{}", e.id);
    }
}

#[test]
fn dkp_catalog() {
    let cfg = ZeroTestConfig::default();
    for e in &Catalog::builtin().dkp {
        let u = ex(&e.u);
        let d = e.region.domain().unwrap();
        let r = dkp_residual(&u, &d, &cfg).unwrap();
        assert!(r.factor_check.is_zero(), "{}", e.id);
        let mut dd = d.clone();
        dd.infer_margins(&u, 0.05);
        assert_eq!(r.scalar.is_zero_on(&dd, &cfg).unwrap().is_zero(), e.solution, "{}", e.id);
        if let (Some(x), Some(m)) = (&e.x, e.member) {
            let c = dkp_coframe(&u, Some(&ex(x)), &d, &cfg).unwrap();
            assert_eq!(c.membership.unwrap().is_zero(), m, "{}", e.id);
        }
    }
    assert!(dkp_coframe(&ex("x"), None, &DomainBox::new(), &cfg).is_err());
    let c = dkp_coframe(&ex("0"), Some(&ex("t")), &DomainBox::new(), &cfg).unwrap();
    assert!(!c.membership.unwrap().is_zero());
}

const CUBIC_MONOMIALS: [&str; 20] = [
    "1", "x", "y", "t", "x^2", "x*y", "x*t", "y^2", "y*t", "t^2", "x^3", "x^2*y", "x^2*t", "x*y^2", "x*y*t", "x*t^2", "y^3", "y^2*t",
    "y*t^2", "t^3",
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn dkp_forms_reduce_to_scalar(coefs in prop::collection::vec(-4i64..=4, 20)) {
        let u = Expr::add(coefs.iter().zip(CUBIC_MONOMIALS).map(|(&c, m)| Expr::int(c) * ex(m)).collect());
        let r = dkp_residual(&u, &DomainBox::new(), &ZeroTestConfig { samples: 8, ..Default::default() }).unwrap();
        prop_assert!(r.factor_check.is_zero());
        prop_assert_eq!(r.factors, [0, -1]);
    }
}

#[test]
fn classify_report_carries_gauge_note() {
    let o = ThirdOrderODE::with_inferred_domain(ex("q^2"), DomainBox::new()).unwrap();
    let (_, rep) = classify3(&o, &ZeroTestConfig::default()).unwrap();
    assert!(rep.notes.iter().any(|n| n.contains("β = 1")));
}
