use std::collections::HashMap;

use odeconf::expr::{eval_f64, parse, symbol, DomainBox, Expr, ZeroTestConfig};
use odeconf::exterior::{Chart, DifferentialForm};
use proptest::prelude::*;

const VARS: [&str; 3] = ["x", "y", "p"];

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![(-5i64..=5, 1i64..=4).prop_map(|(n, d)| Expr::rational(n, d)), prop::sample::select(VARS.to_vec()).prop_map(Expr::sym),]
}

fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::add),
            prop::collection::vec(inner.clone(), 2..3).prop_map(Expr::mul),
            (inner.clone(), 1i64..=3).prop_map(|(b, n)| b.powi(n)),
            inner.clone().prop_map(|a| (a * Expr::rational(1, 3)).exp()),
        ]
    })
}

fn at() -> HashMap<odeconf::expr::Symbol, f64> {
    [(symbol("x"), 0.37), (symbol("y"), -0.61), (symbol("p"), 0.83)].into_iter().collect()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sums_and_products_commute(a in expr(), b in expr()) {
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a + &b, &b + &a);
    }

    #[test]
    fn printing_round_trips(a in expr()) {
        let back = parse(&a.to_string()).unwrap();
        let (u, v) = (eval_f64(&a, &at()), eval_f64(&back, &at()));
        if let (Ok(u), Ok(v)) = (u, v) {
            prop_assert!(close(u, v), "{} -> {}: {} vs {}", a, back, u, v);
        }
    }

    #[test]
    fn derivative_is_linear_and_leibniz(a in expr(), b in expr()) {
        let cfg = ZeroTestConfig { samples: 6, ..Default::default() };
        let d = DomainBox::new();
        let lin = (&a + &b).diff("x") - a.diff("x") - b.diff("x");
        prop_assert!(lin.is_zero_on(&d, &cfg).unwrap().is_zero());
        let leib = (&a * &b).diff("y") - &a.diff("y") * &b - &a * &b.diff("y");
        prop_assert!(leib.is_zero_on(&d, &cfg).unwrap().is_zero());
    }

    #[test]
    fn exterior_derivative_squares_to_zero(a in expr(), b in expr(), c in expr()) {
        let chart = Chart::new("R3", &VARS).unwrap();
        let w = DifferentialForm::one_form(chart, vec![a, b, c]).unwrap();
        let dd = w.d().d();
        let cfg = ZeroTestConfig { samples: 4, ..Default::default() };
        prop_assert!(dd.zero_test(&DomainBox::new(), &cfg).unwrap().is_zero());
    }
}
