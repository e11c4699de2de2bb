//! Python bindings. Every function returns the JSON text of the
//! corresponding report; the `odeconf` package decodes it.

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

use odeconf::catalog::{formula, RunConfig};
use odeconf::expr::{parse, DomainBox, Expr, ZeroTestConfig};
use odeconf::lie::{self, LieSystem};
use odeconf::monge::{classify_monge1, classify_monge2, MongeFirst, MongeSecond};
use odeconf::ode2::{fefferman_flatness_check, ode2_invariants, SecondOrderODE};
use odeconf::ode3::{classify3, dkp_residual, ode3_invariants, ThirdOrderODE};
use odeconf::report::summarize;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_json<T: Serialize>(v: &T) -> PyResult<String> {
    serde_json::to_string(v).map_err(err)
}

fn config(tol: Option<f64>, samples: Option<usize>, seed: Option<u64>) -> PyResult<RunConfig> {
    let d = RunConfig::default();
    let c = RunConfig { tol: tol.unwrap_or(d.tol), samples: samples.unwrap_or(d.samples), seed: seed.unwrap_or(d.seed), catalog: None };
    c.validate().map_err(err)?;
    Ok(c)
}

struct Settings {
    cfg: ZeroTestConfig,
    domain: DomainBox,
}

fn settings(boxes: Option<Vec<String>>, tol: Option<f64>, samples: Option<usize>, seed: Option<u64>) -> PyResult<Settings> {
    let cfg = config(tol, samples, seed)?.zero_test();
    let mut domain = DomainBox::new();
    for b in boxes.unwrap_or_default() {
        domain.apply_spec(&b).map_err(err)?;
    }
    Ok(Settings { cfg, domain })
}

fn expr(text: &str) -> PyResult<Expr> {
    parse(text).map_err(|e| PyValueError::new_err(format!("malformed formula `{}`: {}", text, e)))
}

fn ode3(f: &str, params: Option<BTreeMap<String, String>>, s: &Settings) -> PyResult<ThirdOrderODE> {
    expr(f)?;
    let f = formula(f, &params.unwrap_or_default()).map_err(err)?;
    ThirdOrderODE::with_inferred_domain(f, s.domain.clone()).map_err(err)
}

/// Classification report of y''' = F(x, y, p, q).
#[pyfunction]
#[pyo3(signature = (f, params=None, boxes=None, tol=None, samples=None, seed=None))]
fn ode3_classify(
    f: &str,
    params: Option<BTreeMap<String, String>>,
    boxes: Option<Vec<String>>,
    tol: Option<f64>,
    samples: Option<usize>,
    seed: Option<u64>,
) -> PyResult<String> {
    let s = settings(boxes, tol, samples, seed)?;
    let o = ode3(f, params, &s)?;
    to_json(&classify3(&o, &s.cfg).map_err(err)?.1)
}

/// K, A, G, L, N, C1..C5 with their zero verdicts.
#[pyfunction]
#[pyo3(signature = (f, params=None, boxes=None, tol=None, samples=None, seed=None))]
fn ode3_invariants_json(
    f: &str,
    params: Option<BTreeMap<String, String>>,
    boxes: Option<Vec<String>>,
    tol: Option<f64>,
    samples: Option<usize>,
    seed: Option<u64>,
) -> PyResult<String> {
    let s = settings(boxes, tol, samples, seed)?;
    let o = ode3(f, params, &s)?;
    let inv = ode3_invariants(&o);
    let mut out = serde_json::Map::new();
    for (name, e) in inv.named() {
        let v = e.is_zero_on(&o.domain, &s.cfg).map_err(err)?;
        out.insert(name.into(), serde_json::json!({ "expression": summarize(e), "verdict": v }));
    }
    to_json(&out)
}

/// dKP scalar and the factor check of the two Frobenius residuals.
#[pyfunction]
#[pyo3(signature = (u, boxes=None, tol=None, samples=None, seed=None))]
fn dkp(u: &str, boxes: Option<Vec<String>>, tol: Option<f64>, samples: Option<usize>, seed: Option<u64>) -> PyResult<String> {
    let s = settings(boxes, tol, samples, seed)?;
    let u = expr(u)?;
    let r = dkp_residual(&u, &s.domain, &s.cfg).map_err(err)?;
    let mut d = s.domain.clone();
    d.infer_margins(&u, odeconf::expr::DEFAULT_MARGIN);
    let v = r.scalar.is_zero_on(&d, &s.cfg).map_err(err)?;
    to_json(&serde_json::json!({
        "scalar": summarize(&r.scalar),
        "scalar_verdict": v,
        "factors": r.factors,
        "factor_check": r.factor_check,
    }))
}

/// Fefferman flatness report and w1, w2 of y'' = Q(x, y, p).
#[pyfunction]
#[pyo3(signature = (q, boxes=None, tol=None, samples=None, seed=None))]
fn ode2_flatness(q: &str, boxes: Option<Vec<String>>, tol: Option<f64>, samples: Option<usize>, seed: Option<u64>) -> PyResult<String> {
    let s = settings(boxes, tol, samples, seed)?;
    let o = SecondOrderODE::with_inferred_domain(expr(q)?, s.domain.clone()).map_err(err)?;
    let rep = fefferman_flatness_check(&o, &s.cfg).map_err(err)?;
    let inv = ode2_invariants(&o);
    to_json(&serde_json::json!({ "report": rep, "w1": summarize(&inv.w1), "w2": summarize(&inv.w2) }))
}

/// Branch (order 1) or class (order 2) of a Monge equation.
#[pyfunction]
#[pyo3(signature = (f, order, boxes=None, tol=None, samples=None, seed=None))]
fn monge_classify(
    f: &str,
    order: u8,
    boxes: Option<Vec<String>>,
    tol: Option<f64>,
    samples: Option<usize>,
    seed: Option<u64>,
) -> PyResult<String> {
    let s = settings(boxes, tol, samples, seed)?;
    let f = expr(f)?;
    let rep = match order {
        1 => classify_monge1(&MongeFirst::with_inferred_domain(f, s.domain.clone()).map_err(err)?, &s.cfg).map_err(err)?.1,
        2 => classify_monge2(&MongeSecond::with_inferred_domain(f, s.domain.clone()).map_err(err)?, &s.cfg).map_err(err)?.1,
        n => return Err(PyValueError::new_err(format!("order must be 1 or 2, got {}", n))),
    };
    to_json(&rep)
}

/// Exact Lie-algebra report for syspoint, g2-flat, conpoint, caln or ccg2.
#[pyfunction]
fn lie_verify(system: &str) -> PyResult<String> {
    let s: LieSystem = system.parse().map_err(err)?;
    to_json(&lie::verify(s).map_err(err)?)
}

/// Zero test of an expression on a box.
#[pyfunction]
#[pyo3(signature = (e, boxes=None, tol=None, samples=None, seed=None))]
fn zero_test(e: &str, boxes: Option<Vec<String>>, tol: Option<f64>, samples: Option<usize>, seed: Option<u64>) -> PyResult<String> {
    let s = settings(boxes, tol, samples, seed)?;
    let e = expr(e)?;
    let mut d = s.domain.clone();
    d.infer_margins(&e, odeconf::expr::DEFAULT_MARGIN);
    to_json(&e.is_zero_on(&d, &s.cfg).map_err(err)?)
}

/// Every catalog claim, Lie system and infrastructure check.
#[pyfunction]
#[pyo3(signature = (tol=None, samples=None, seed=None))]
fn verify_paper(py: Python<'_>, tol: Option<f64>, samples: Option<usize>, seed: Option<u64>) -> PyResult<String> {
    let c = config(tol, samples, seed)?;
    let s = py.detach(|| odeconf::verify::verify_paper(&c)).map_err(err)?;
    to_json(&s)
}

#[pymodule]
fn _odeconf(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(ode3_classify, m)?)?;
    m.add_function(wrap_pyfunction!(ode3_invariants_json, m)?)?;
    m.add_function(wrap_pyfunction!(dkp, m)?)?;
    m.add_function(wrap_pyfunction!(ode2_flatness, m)?)?;
    m.add_function(wrap_pyfunction!(monge_classify, m)?)?;
    m.add_function(wrap_pyfunction!(lie_verify, m)?)?;
    m.add_function(wrap_pyfunction!(zero_test, m)?)?;
    m.add_function(wrap_pyfunction!(verify_paper, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
