//! Pointwise tensor calculus for nondegenerate metrics.
//!
//! Metric derivatives are taken symbolically, compiled into one program and
//! evaluated at a sample point; the curvature algebra then runs on truncated
//! Taylor jets at that point. Nothing is expanded symbolically beyond the
//! derivatives of g itself.

mod geometry;
mod jet;
mod metric;
mod tensor;

use std::sync::Arc;

use thiserror::Error;

use crate::expr::{EvalError, Expr, Measured, Precision, Scalar, ZeroTestError};
use crate::exterior::DifferentialForm;

use geometry::Geometry;
pub use jet::{Jet, JetLayout};
pub use metric::MetricTensor;
use metric::{JetEngine, QuantityFn};
pub use tensor::TensorField;

#[derive(Debug, Error)]
pub enum CurvatureError {
    #[error("{op} needs dimension {need}, metric has dimension {dim}")]
    Dimension { op: &'static str, need: &'static str, dim: usize },
    #[error("metric is not symmetric at ({0}, {1})")]
    Asymmetric(usize, usize),
    #[error("metric is degenerate at {0}")]
    Singular(String),
    #[error("signature {found:?} differs from the declared {expected:?}")]
    Signature { expected: (usize, usize), found: (usize, usize) },
    #[error("{0}")]
    Shape(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    ZeroTest(#[from] ZeroTestError),
}

#[derive(Clone, Copy, Debug)]
enum Quantity {
    Christoffel,
    Compatibility,
    Riemann,
    Ricci,
    ScalarCurvature,
    Bianchi,
    Weyl,
    WeylSquare,
    WeylTraces,
    Cotton,
    CottonTraces,
    TraceFreeRicci,
}

impl Quantity {
    fn jet_order(self) -> usize {
        match self {
            Quantity::Christoffel | Quantity::Compatibility => 1,
            Quantity::Cotton | Quantity::CottonTraces => 3,
            _ => 2,
        }
    }
}

impl QuantityFn for Quantity {
    fn compute<T: Scalar>(&self, geo: &Geometry<T>) -> Vec<Jet<T>> {
        match self {
            Quantity::Christoffel => geo.christoffel(),
            Quantity::Compatibility => geo.metric_compatibility(),
            Quantity::Riemann => geo.riemann(),
            Quantity::Ricci => geo.ricci(&geo.riemann()),
            Quantity::ScalarCurvature => vec![geo.trace(&geo.ricci(&geo.riemann()))],
            Quantity::Bianchi => geo.bianchi(&geo.riemann()),
            Quantity::Weyl => geo.weyl(&geo.riemann()),
            Quantity::WeylSquare => vec![geo.full_contraction(&geo.weyl(&geo.riemann()), 4)],
            Quantity::WeylTraces => geo.rank4_traces(&geo.weyl(&geo.riemann())),
            Quantity::Cotton => geo.cotton(),
            Quantity::CottonTraces => {
                let n = geo.n;
                let c = geo.cotton();
                let o = c[0].order();
                let mut out = Vec::new();
                // g^ij C_ijk, g^ik C_ijk and the cyclic sum C_ijk + C_jki + C_kij.
                for k in 0..n {
                    let mut a = Jet::zero(geo.layout.clone(), o);
                    let mut b = Jet::zero(geo.layout.clone(), o);
                    for i in 0..n {
                        for j in 0..n {
                            let gij = &geo.ginv[i * n + j];
                            a = a.add(&gij.mul(&c[(i * n + j) * n + k]));
                            b = b.add(&gij.mul(&c[(i * n + k) * n + j]));
                        }
                    }
                    out.push(a);
                    out.push(b);
                }
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            let s = c[(i * n + j) * n + k].add(&c[(j * n + k) * n + i]).add(&c[(k * n + i) * n + j]);
                            out.push(s);
                        }
                    }
                }
                out
            }
            Quantity::TraceFreeRicci => geo.trace_free_ricci(&geo.ricci(&geo.riemann())),
        }
    }
}

fn field(engine: &Arc<JetEngine>, g: &MetricTensor, q: Quantity, name: &str, upper: usize, lower: usize) -> TensorField {
    let e = engine.clone();
    let f = move |p: &[f64], prec: Precision| e.run(p, prec, q);
    TensorField::pointwise(g.chart().clone(), name, upper, lower, engine.vars().to_vec(), g.domain.clone(), Arc::new(f))
}

fn single(
    g: &MetricTensor,
    nu: Option<&DifferentialForm>,
    q: Quantity,
    name: &str,
    upper: usize,
    lower: usize,
) -> Result<TensorField, CurvatureError> {
    let engine = Arc::new(JetEngine::new(g, nu, q.jet_order())?);
    Ok(field(&engine, g, q, name, upper, lower))
}

#[derive(Clone, Debug)]
pub struct CurvaturePackage {
    /// Γ^k_ij
    pub christoffel: TensorField,
    /// R^a_bcd
    pub riemann: TensorField,
    /// R_bd = R^a_bad
    pub ricci: TensorField,
    pub scalar: TensorField,
}

/// Levi-Civita connection, Riemann and Ricci tensors, and scalar curvature.
pub fn curvature_package(g: &MetricTensor) -> Result<CurvaturePackage, CurvatureError> {
    let engine = Arc::new(JetEngine::new(g, None, 2)?);
    Ok(CurvaturePackage {
        christoffel: field(&engine, g, Quantity::Christoffel, "christoffel", 1, 2),
        riemann: field(&engine, g, Quantity::Riemann, "riemann", 1, 3),
        ricci: field(&engine, g, Quantity::Ricci, "ricci", 0, 2),
        scalar: field(&engine, g, Quantity::ScalarCurvature, "scalar-curvature", 0, 0),
    })
}

fn need_dim(op: &'static str, g: &MetricTensor, ok: bool, need: &'static str) -> Result<(), CurvatureError> {
    if ok {
        Ok(())
    } else {
        Err(CurvatureError::Dimension { op, need, dim: g.dim() })
    }
}

/// All-lower conformal Weyl tensor C_abcd.
pub fn weyl(g: &MetricTensor) -> Result<TensorField, CurvatureError> {
    need_dim("weyl", g, g.dim() >= 4, ">= 4")?;
    single(g, None, Quantity::Weyl, "weyl", 0, 4)
}

/// C^abcd C_abcd, as a pointwise scalar field.
pub fn weyl_square(g: &MetricTensor) -> Result<TensorField, CurvatureError> {
    need_dim("weyl_square", g, g.dim() >= 4, ">= 4")?;
    single(g, None, Quantity::WeylSquare, "weyl-square", 0, 0)
}

/// The single traces of the Weyl tensor over the slot pairs (1,3), (1,2),
/// (1,4), as one flat table.
pub fn weyl_traces(g: &MetricTensor) -> Result<TensorField, CurvatureError> {
    need_dim("weyl_traces", g, g.dim() >= 4, ">= 4")?;
    single(g, None, Quantity::WeylTraces, "weyl-traces", 0, 0)
}

/// C_ijk = ∇_k P_ij − ∇_j P_ik with P the Schouten tensor.
pub fn cotton3(g: &MetricTensor) -> Result<TensorField, CurvatureError> {
    need_dim("cotton3", g, g.dim() == 3, "3")?;
    single(g, None, Quantity::Cotton, "cotton", 0, 3)
}

/// Traces g^ij C_ijk, g^ik C_ijk and the cyclic sum of the Cotton tensor.
pub fn cotton_identities(g: &MetricTensor) -> Result<TensorField, CurvatureError> {
    need_dim("cotton3", g, g.dim() == 3, "3")?;
    single(g, None, Quantity::CottonTraces, "cotton-identities", 0, 0)
}

/// R_(ij) − (R/3) g_ij for the Weyl connection with ∇g = −ν ⊗ g.
pub fn weyl_connection_residual(g: &MetricTensor, nu: &DifferentialForm) -> Result<TensorField, CurvatureError> {
    need_dim("weyl_connection_residual", g, g.dim() == 3, "3")?;
    single(g, Some(nu), Quantity::TraceFreeRicci, "einstein-weyl", 0, 2)
}

/// Ric − (R/n) g.
pub fn einstein_residual(g: &MetricTensor) -> Result<TensorField, CurvatureError> {
    single(g, None, Quantity::TraceFreeRicci, "einstein", 0, 2)
}

/// R^a_bcd + R^a_cdb + R^a_dbc.
pub fn bianchi_residual(g: &MetricTensor) -> Result<TensorField, CurvatureError> {
    single(g, None, Quantity::Bianchi, "bianchi", 1, 3)
}

/// ∇_k g_ij for the Levi-Civita connection.
pub fn metric_compatibility(g: &MetricTensor) -> Result<TensorField, CurvatureError> {
    single(g, None, Quantity::Compatibility, "nabla-g", 0, 3)
}

/// e^{2Υ} g.
pub fn conformal_rescale(g: &MetricTensor, ups: &Expr) -> MetricTensor {
    g.conformal_rescale(ups)
}

/// The metric itself as a symbolic (0,2) tensor.
pub fn metric_field(g: &MetricTensor) -> Result<TensorField, CurvatureError> {
    let comps = g.matrix().iter().flatten().cloned().collect();
    TensorField::symbolic(g.chart().clone(), "metric", 0, 2, comps, g.domain.clone())
}

/// Components of `t` in the frame dual to `coframe`: lower indices are
/// contracted with the dual frame e_a, upper ones with θ^a.
pub fn frame_components(t: &TensorField, coframe: &[DifferentialForm]) -> Result<TensorField, CurvatureError> {
    let chart = t.chart().clone();
    let n = chart.dim();
    if coframe.len() != n {
        return Err(CurvatureError::Shape(format!("coframe needs {} forms, found {}", n, coframe.len())));
    }
    let mut comps = Vec::with_capacity(n * n);
    for th in coframe {
        if th.degree() != 1 || th.chart().coords() != chart.coords() {
            return Err(CurvatureError::Shape("coframe entries must be 1-forms on the tensor's chart".into()));
        }
        for i in 0..n {
            comps.push(th.coefficient(&[i]));
        }
    }
    let theta = TensorField::symbolic(chart, "coframe", 0, 2, comps, t.domain().clone())?;
    let (upper, lower) = t.arity();
    Ok(TensorField::combine(&[t, &theta], &format!("{}-frame", t.name()), upper, lower, move |v| to_frame(&v[0], &v[1], n, upper, lower)))
}

fn to_frame(t: &[(f64, f64)], theta: &[(f64, f64)], n: usize, upper: usize, lower: usize) -> Result<Vec<(f64, f64)>, EvalError> {
    type M = Measured<f64>;
    let m = |&(value, mag): &(f64, f64)| M { value, mag };
    let layout = JetLayout::new(0, 0);
    let rows: Vec<Vec<Jet<M>>> = (0..n).map(|a| (0..n).map(|i| Jet::constant(layout.clone(), 0, m(&theta[a * n + i]))).collect()).collect();
    let inv = jet::invert(&rows).ok_or_else(|| EvalError::Singular("coframe is degenerate at the point".into()))?;
    let th = |a: usize, i: usize| m(&theta[a * n + i]);
    let e = |a: usize, i: usize| inv[i][a].value();
    let rank = upper + lower;
    let mut cur: Vec<M> = t.iter().map(m).collect();
    for slot in 0..rank {
        let stride = n.pow((rank - 1 - slot) as u32);
        let mut next = Vec::with_capacity(cur.len());
        for flat in 0..cur.len() {
            let a = (flat / stride) % n;
            let base = flat - a * stride;
            let mut acc = M::zero();
            for i in 0..n {
                let c = if slot < upper { th(a, i) } else { e(a, i) };
                acc = acc + c * cur[base + i * stride];
            }
            next.push(acc);
        }
        cur = next;
    }
    Ok(cur.into_iter().map(|x| (x.value, x.mag)).collect())
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::expr::{ex, DomainBox, ZeroTestConfig};
    use crate::exterior::Chart;

    fn chart3() -> Arc<Chart> {
        Chart::new("R3", &["x", "y", "z"]).unwrap()
    }

    fn diag(chart: Arc<Chart>, d: &[&str], domain: DomainBox) -> MetricTensor {
        let d: Vec<Expr> = d.iter().map(|s| ex(s)).collect();
        MetricTensor::diagonal(chart, &d).unwrap().with_domain(domain)
    }

    fn point(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn flat_is_flat() {
        let g = diag(chart3(), &["1", "-1", "-1"], DomainBox::new());
        let pk = curvature_package(&g).unwrap();
        let cfg = ZeroTestConfig::default();
        for f in [&pk.christoffel, &pk.riemann, &pk.ricci, &pk.scalar] {
            assert!(f.zero_test(&cfg).unwrap().is_zero(), "{:?}", f);
        }
    }

    #[test]
    fn sphere_scalar_curvature() {
        // With u = cos θ: dr^2 + r^2 (du^2/(1-u^2) + (1-u^2) dφ^2) is flat,
        // while dr^2 + a^2 (...) has R = 2/a^2.
        let c = Chart::new("S", &["r", "u", "ph"]).unwrap();
        let dom = DomainBox::new().with("r", 0.5, 2.0).unwrap().with("u", -0.8, 0.8).unwrap();
        let flat = diag(c.clone(), &["1", "r^2/(1 - u^2)", "r^2*(1 - u^2)"], dom.clone());
        let pk = curvature_package(&flat).unwrap();
        assert!(pk.riemann.zero_test(&ZeroTestConfig::default()).unwrap().is_zero());
        let sph = diag(c, &["1", "a^2/(1 - u^2)", "a^2*(1 - u^2)"], dom.with("a", 0.5, 2.0).unwrap());
        let pk = curvature_package(&sph).unwrap();
        let v = pk.scalar.values_at(&point(&[("a", 1.5), ("u", 0.3)])).unwrap();
        assert!((v[0] - 2.0 / 2.25).abs() < 1e-14, "{:?}", v);
    }

    #[test]
    fn constant_curvature_is_einstein() {
        // Round 3-sphere in stereographic coordinates.
        let dom = DomainBox::new();
        let f = "4/(1 + x^2 + y^2 + z^2)^2";
        let g = diag(chart3(), &[f, f, f], dom);
        let cfg = ZeroTestConfig::default();
        assert!(einstein_residual(&g).unwrap().zero_test(&cfg).unwrap().is_zero());
        let pk = curvature_package(&g).unwrap();
        let v = pk.scalar.values_at(&point(&[("x", 0.1), ("y", -0.4), ("z", 0.7)])).unwrap();
        assert!((v[0] - 6.0).abs() < 1e-13, "{:?}", v);
        assert!(!pk.riemann.zero_test(&cfg).unwrap().is_zero());
    }

    fn lumpy3() -> MetricTensor {
        let c = chart3();
        let g = vec![
            vec![ex("2 + x*y"), ex("z/3"), ex("x^2/5")],
            vec![ex("z/3"), ex("3 + y^2"), ex("x*z/4")],
            vec![ex("x^2/5"), ex("x*z/4"), ex("-2 + y*z/2")],
        ];
        MetricTensor::new(c, g, DomainBox::new()).unwrap()
    }

    #[test]
    fn structural_identities() {
        let g = lumpy3();
        let cfg = ZeroTestConfig::default();
        assert!(bianchi_residual(&g).unwrap().zero_test(&cfg).unwrap().is_zero());
        assert!(metric_compatibility(&g).unwrap().zero_test(&cfg).unwrap().is_zero());
        assert!(cotton_identities(&g).unwrap().zero_test(&cfg).unwrap().is_zero());
        assert!(!cotton3(&g).unwrap().zero_test(&cfg).unwrap().is_zero());
    }

    #[test]
    fn cotton_conformally_flat() {
        let g = diag(chart3(), &["1", "1", "-1"], DomainBox::new());
        let g = g.conformal_rescale(&ex("x*y/3 + z^2/5 - x^3/7"));
        assert!(cotton3(&g).unwrap().zero_test(&ZeroTestConfig::default()).unwrap().is_zero());
    }

    #[test]
    fn weyl_connection_with_zero_nu_matches_einstein() {
        let g = lumpy3();
        let nu = DifferentialForm::zero(g.chart().clone(), 1);
        let a = weyl_connection_residual(&g, &nu).unwrap();
        let b = einstein_residual(&g).unwrap();
        let one = TensorField::scalar(g.chart().clone(), Expr::one(), DomainBox::new()).unwrap();
        assert!(a.sub_weighted(&b, &one).zero_test(&ZeroTestConfig::default()).unwrap().is_zero());
    }

    #[test]
    fn identity_coframe_keeps_components() {
        let g = lumpy3();
        let t = cotton3(&g).unwrap();
        let dx: Vec<DifferentialForm> = (0..3).map(|i| DifferentialForm::dx(g.chart().clone(), i)).collect();
        let f = frame_components(&t, &dx).unwrap();
        let one = TensorField::scalar(g.chart().clone(), Expr::one(), DomainBox::new()).unwrap();
        assert!(f.sub_weighted(&t, &one).zero_test(&ZeroTestConfig::default()).unwrap().is_zero());
    }

    #[test]
    fn dimension_guards() {
        let g = lumpy3();
        assert!(matches!(weyl(&g), Err(CurvatureError::Dimension { .. })));
        let g4 = diag(Chart::dkp(), &["1", "1", "1", "1"], DomainBox::new());
        assert!(matches!(cotton3(&g4), Err(CurvatureError::Dimension { .. })));
    }

    #[test]
    fn asymmetric_rejected() {
        let c = Chart::new("P", &["x", "y"]).unwrap();
        let g = vec![vec![ex("1"), ex("x")], vec![ex("y"), ex("1")]];
        assert!(matches!(MetricTensor::new(c, g, DomainBox::new()), Err(CurvatureError::Asymmetric(1, 0))));
    }
}
