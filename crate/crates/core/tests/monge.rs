use std::collections::BTreeMap;

use odeconf::curvature::{curvature_package, metric_field, weyl, weyl_square, TensorField};
use odeconf::expr::{ex, zero_test_exprs, DomainBox, ZeroTestConfig};
use odeconf::monge::*;

fn qbox() -> DomainBox {
    DomainBox::new().with("q", 0.5, 2.0).unwrap()
}

fn m1(f: &str) -> MongeFirst {
    MongeFirst::new(ex(f), DomainBox::new()).unwrap()
}

fn m2(f: &str, d: DomainBox) -> MongeSecond {
    MongeSecond::with_inferred_domain(ex(f), d).unwrap()
}

fn verifies(eq: MongeEquation, sol: [&str; 3], d: &DomainBox) -> bool {
    let s = ParametrizedSolution::parse(sol[0], sol[1], sol[2]).unwrap();
    verify_parametrized_solution(eq, &s, d, &ZeroTestConfig::default()).unwrap().is_zero()
}

#[test]
fn monge1_catalog_branches() {
    let cfg = ZeroTestConfig::default();
    for (f, b) in [("z", Monge1Branch::Cc2), ("y", Monge1Branch::Cc1), ("p^2", Monge1Branch::Cc1)] {
        let (got, rep) = classify_monge1(&m1(f), &cfg).unwrap();
        assert_eq!(got, b, "{}", f);
        assert_eq!(rep.classification, b.name());
    }
}

#[test]
fn squared_slope_solution_and_mutations() {
    let eq = m1("p^2");
    let d = DomainBox::new();
    let good = ["w_2/2", "(t*w_2 - w_1)/2", "t^2*w_2/2 - t*w_1 + w_0"];
    assert!(verifies(MongeEquation::First(&eq), good, &d));
    // Each printed coefficient raised by one.
    let bad = [
        ["3*w_2/2", good[1], good[2]],
        ["w_2/2", "3*t*w_2/2 - w_1/2", good[2]],
        ["w_2/2", "(t*w_2 + w_1)/2", good[2]],
        ["w_2/2", good[1], "3*t^2*w_2/2 - t*w_1 + w_0"],
        ["w_2/2", good[1], "t^2*w_2/2 + w_0"],
        ["w_2/2", good[1], "t^2*w_2/2 - t*w_1 + 2*w_0"],
    ];
    for b in bad {
        assert!(!verifies(MongeEquation::First(&eq), b, &d), "{:?}", b);
    }
}

#[test]
fn cubic_curvature_solution_with_integral() {
    let d = DomainBox::new().with("t", 0.5, 2.0).unwrap();
    let eq = m2("q^3/3", DomainBox::new());
    let good = ["2*t^(1/2)*w_2", "2*t^(3/2)*w_2^2 - 2*t^(1/2)*w_1*w_2 + int(t^(1/2)*w_2^2, t)", "2/3*t^2*w_2 - t*w_1 + w_0"];
    assert!(verifies(MongeEquation::Second(&eq), good, &d));
    let bad = [
        ["3*t^(1/2)*w_2", good[1], good[2]],
        [good[0], "3*t^(3/2)*w_2^2 - 2*t^(1/2)*w_1*w_2 + int(t^(1/2)*w_2^2, t)", good[2]],
        [good[0], "2*t^(3/2)*w_2^2 - t^(1/2)*w_1*w_2 + int(t^(1/2)*w_2^2, t)", good[2]],
        [good[0], "2*t^(3/2)*w_2^2 - 2*t^(1/2)*w_1*w_2 + 2*int(t^(1/2)*w_2^2, t)", good[2]],
        [good[0], good[1], "5/3*t^2*w_2 - t*w_1 + w_0"],
        [good[0], good[1], "2/3*t^2*w_2 + w_0"],
        [good[0], good[1], "2/3*t^2*w_2 - t*w_1 + 2*w_0"],
    ];
    for b in bad {
        assert!(!verifies(MongeEquation::Second(&eq), b, &d), "{:?}", b);
    }
}

#[test]
fn solution_needs_moving_x() {
    let s = ParametrizedSolution::parse("1", "t", "t").unwrap();
    let r = verify_parametrized_solution(MongeEquation::First(&m1("p")), &s, &DomainBox::new(), &ZeroTestConfig::default());
    assert!(r.is_err());
}

#[test]
fn hilbert_model_is_conformally_flat() {
    let cfg = ZeroTestConfig { tol: 1e-8, ..Default::default() };
    let g = g32_metric(&m2("q^2", DomainBox::new()), &cfg).unwrap();
    assert!(weyl(&g).unwrap().zero_test(&cfg).unwrap().is_zero());
    assert!(single_variable_a5(&ex("q^2")).unwrap().is_zero());
}

#[test]
fn point_transformed_flat_models() {
    // Images of z' = (y'')² under point transformations stay flat; this
    // exercises the table monomials that vanish for F = F(q).
    let cfg = ZeroTestConfig::default();
    let d = DomainBox::new().with("q", 0.5, 2.0).unwrap();
    for f in ["q^2 + p*y", "z + exp(x)*q^2", "(q - 6*x)^2", "q^2 + y + p*x"] {
        let g = g32_metric(&m2(f, d.clone()), &cfg).unwrap();
        assert!(weyl(&g).unwrap().zero_test(&cfg).unwrap().is_zero(), "{}", f);
    }
    // A generic equation is not flat.
    let g = g32_metric(&m2("q^3/6 + y*q^2", d), &cfg).unwrap();
    assert!(!weyl(&g).unwrap().zero_test(&cfg).unwrap().is_zero());
}

#[test]
fn transcription_matches_frame_form() {
    let cfg = ZeroTestConfig { tol: 1e-8, ..Default::default() };
    for f in ["q^3/6", "exp(q)", "q^(5/2)"] {
        let r = transcription_check(&ex(f), &qbox(), &cfg).unwrap();
        assert!(r.ok, "{}: {:?}", f, r.slots.iter().filter(|s| !s.verdict.is_zero()).map(|s| s.slot).collect::<Vec<_>>());
        assert!(!r.slots.is_empty());
    }
}

#[test]
fn explicit_representative_equals_table_metric() {
    let cfg = ZeroTestConfig::default();
    for f in ["q^3/6", "exp(q)", "q^(5/2)"] {
        let g = g32_metric(&m2(f, qbox()), &cfg).unwrap();
        let h = single_variable_metric(&ex(f), &qbox(), &cfg).unwrap();
        let diffs: Vec<_> = (0..5).flat_map(|i| (0..5).map(move |j| (i, j))).map(|(i, j)| g.component(i, j) - h.component(i, j)).collect();
        assert!(zero_test_exprs(&diffs, &g.domain, &cfg).unwrap().is_zero(), "{}", f);
    }
}

#[test]
fn single_variable_weyl_square_vanishes() {
    let cfg = ZeroTestConfig::default();
    for f in ["q^3/6", "exp(q)", "q^(5/2)"] {
        let g = single_variable_metric(&ex(f), &qbox(), &cfg).unwrap();
        assert!(weyl_square(&g).unwrap().zero_test(&cfg).unwrap().is_zero(), "{}", f);
        assert!(!weyl(&g).unwrap().zero_test(&cfg).unwrap().is_zero(), "{}", f);
    }
}

#[test]
fn cubic_a5_closed_form() {
    let a = single_variable_a5(&ex("q^3/6")).unwrap();
    let v = (a - ex("-56/25*q^(-20/3)")).is_zero_on(&qbox(), &ZeroTestConfig::default()).unwrap();
    assert!(v.is_zero());
}

#[test]
fn einstein_scale_and_controls() {
    let cfg = ZeroTestConfig::default();
    for f in ["q^3/6", "exp(q)", "q^(5/2)"] {
        let f = ex(f);
        let r = einstein_scale_residual(&f, &ScaleRelation::quoted(&f), &qbox(), &cfg).unwrap();
        assert!(r.zero_test(&cfg).unwrap().is_zero(), "{}", f);
        let r = einstein_scale_residual(&f, &ScaleRelation::without_source_term(&f), &qbox(), &cfg).unwrap();
        assert!(!r.zero_test(&cfg).unwrap().is_zero(), "{}", f);
    }
    // Dropping 17F''F'''' only matters when F'''' ≢ 0.
    for f in ["exp(q)", "q^(5/2)"] {
        let f = ex(f);
        let r = einstein_scale_residual(&f, &ScaleRelation::without_fourth_derivative(&f), &qbox(), &cfg).unwrap();
        let v = r.zero_test(&cfg).unwrap();
        assert!(!v.is_zero() && v.witness.is_some(), "{}", f);
    }
}

#[test]
fn hilbert_representative_is_ricci_flat() {
    let cfg = ZeroTestConfig::default();
    let g = single_variable_metric(&ex("q^2"), &DomainBox::new(), &cfg).unwrap();
    assert!(curvature_package(&g).unwrap().ricci.zero_test(&cfg).unwrap().is_zero());
}

#[test]
fn frame_weyl_confined_to_a5() {
    let cfg = ZeroTestConfig::default();
    let r = weyl_frame_pattern_check(&ex("q^3/6"), &qbox(), &cfg).unwrap();
    assert_eq!(r.classification, "a5-only");
    assert!(r.consistent);
    // Surviving magnitude at q = 1 is 224/100.
    let w = frame_weyl(&ex("q^3/6"), &qbox(), &cfg).unwrap();
    let pt: BTreeMap<String, f64> =
        [("q", 1.0), ("x", 0.1), ("y", 0.2), ("p", 0.3), ("z", 0.4)].iter().map(|(k, v)| (k.to_string(), *v)).collect();
    let v = w.values_at(&pt).unwrap();
    let big: Vec<usize> = (0..v.len()).filter(|&i| v[i].abs() > 1e-9).collect();
    assert_eq!(big, vec![234, 246, 534, 546]);
    assert!((v[234] - 2.24).abs() < 1e-12 && (v[246] + 2.24).abs() < 1e-12);
    assert!((v[234] - FRAME_A5_SIGN * -2.24).abs() < 1e-12);

    let r = weyl_frame_pattern_check(&ex("q^2"), &DomainBox::new(), &cfg).unwrap();
    assert_eq!(r.classification, "conformally-flat");
    for f in ["q^3/6 + q^4/10", "q^3/6 + q^4/1000", "exp(q)"] {
        assert_eq!(weyl_frame_pattern_check(&ex(f), &qbox(), &cfg).unwrap().classification, "a5-only", "{}", f);
    }
}

#[test]
fn frame_metric_is_constant() {
    let cfg = ZeroTestConfig::default();
    let c = single_variable_coframe(&ex("exp(q)"), &qbox(), &cfg).unwrap();
    let g = frame_metric(&c).unwrap();
    let alpha = odeconf::curvature::frame_components(&metric_field(&g).unwrap(), &c.alpha).unwrap();
    let want = TensorField::symbolic(
        g.chart().clone(),
        "eta",
        0,
        2,
        (0..25)
            .map(|k| match (k / 5, k % 5) {
                (0, 4) | (4, 0) => ex("1"),
                (1, 3) | (3, 1) => ex("-1"),
                (2, 2) => ex("1"),
                _ => ex("0"),
            })
            .collect(),
        c.domain.clone(),
    )
    .unwrap();
    let one = TensorField::scalar(g.chart().clone(), ex("1"), c.domain.clone()).unwrap();
    assert!(alpha.sub_weighted(&want, &one).zero_test(&cfg).unwrap().is_zero());
}

#[test]
fn classify_second_order() {
    let cfg = ZeroTestConfig::default();
    let (c, _) = classify_monge2(&m2("q^3/6", DomainBox::new()), &cfg).unwrap();
    assert_eq!(c, Monge2Class::G2);
    let (c, rep) = classify_monge2(&m2("q + y", DomainBox::new()), &cfg).unwrap();
    assert_eq!(c, Monge2Class::IntegralFree);
    assert_eq!(rep.classification, "fqq-zero");
}
