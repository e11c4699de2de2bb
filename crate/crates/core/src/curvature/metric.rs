use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::expr::{DomainBox, EvalError, Expr, Measured, Precision, Program, Scalar, Substitution, Symbol, ZeroTestConfig, DD};
use crate::exterior::{inertia, Chart, DifferentialForm, SymmetricForm};

use super::geometry::Geometry;
use super::jet::{Jet, JetLayout};
use super::CurvatureError;

/// A nondegenerate symmetric metric g_ij dx^i dx^j on a chart.
#[derive(Clone, Debug)]
pub struct MetricTensor {
    chart: Arc<Chart>,
    g: Vec<Vec<Expr>>,
    /// (positive, negative) eigenvalue counts when known.
    pub signature: Option<(usize, usize)>,
    pub domain: DomainBox,
    /// Lower bound for |det g| on the box.
    pub det_floor: f64,
    /// Rewrites applied, in order, after differentiation: used to impose an
    /// ODE on auxiliary symbols such as Ups_k.
    reductions: Vec<(Symbol, Expr)>,
}

impl MetricTensor {
    pub fn new(chart: Arc<Chart>, g: Vec<Vec<Expr>>, domain: DomainBox) -> Result<MetricTensor, CurvatureError> {
        let n = chart.dim();
        if g.len() != n || g.iter().any(|r| r.len() != n) {
            return Err(CurvatureError::Shape(format!("expected a {}x{} matrix", n, n)));
        }
        for i in 0..n {
            for j in 0..i {
                if g[i][j] != g[j][i] {
                    return Err(CurvatureError::Asymmetric(i, j));
                }
            }
        }
        Ok(MetricTensor { chart, g, signature: None, domain, det_floor: 1e-12, reductions: Vec::new() })
    }

    pub fn from_symmetric_form(s: &SymmetricForm, domain: DomainBox) -> Result<MetricTensor, CurvatureError> {
        MetricTensor::new(s.chart().clone(), s.matrix().clone(), domain)
    }

    /// Constant diagonal metric.
    pub fn diagonal(chart: Arc<Chart>, diag: &[Expr]) -> Result<MetricTensor, CurvatureError> {
        let n = chart.dim();
        if diag.len() != n {
            return Err(CurvatureError::Shape(format!("expected {} diagonal entries", n)));
        }
        let g = (0..n).map(|i| (0..n).map(|j| if i == j { diag[i].clone() } else { Expr::zero() }).collect()).collect();
        MetricTensor::new(chart, g, DomainBox::new())
    }

    pub fn with_signature(mut self, pos: usize, neg: usize) -> Self {
        self.signature = Some((pos, neg));
        self
    }

    pub fn with_domain(mut self, domain: DomainBox) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_reduction(mut self, sym: &str, e: Expr) -> Self {
        self.reductions.push((crate::expr::symbol(sym), e));
        self
    }

    pub fn reductions(&self) -> &[(Symbol, Expr)] {
        &self.reductions
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn component(&self, i: usize, j: usize) -> &Expr {
        &self.g[i][j]
    }

    pub fn matrix(&self) -> &Vec<Vec<Expr>> {
        &self.g
    }

    pub fn to_symmetric_form(&self) -> SymmetricForm {
        SymmetricForm::from_matrix(self.chart.clone(), self.g.clone()).expect("shape checked on construction")
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> MetricTensor {
        let mut m = self.clone();
        m.g = self.g.iter().map(|r| r.iter().map(&f).collect()).collect();
        m
    }

    /// e^{2Υ} g.
    pub fn conformal_rescale(&self, ups: &Expr) -> MetricTensor {
        if ups.is_zero() {
            return self.clone();
        }
        let w = (Expr::int(2) * ups.clone()).exp();
        let mut m = self.map(|e| w.clone() * e.clone());
        m.domain.infer_margins(ups, crate::expr::DEFAULT_MARGIN);
        m
    }

    fn matrix_program(&self) -> Result<Program, EvalError> {
        let flat: Vec<Expr> = self.g.iter().flatten().cloned().collect();
        Program::compile(&flat, None)
    }

    fn eval_matrix(&self, prog: &Program, point: &HashMap<Symbol, f64>) -> Result<nalgebra::DMatrix<f64>, EvalError> {
        let n = self.dim();
        let p: HashMap<Symbol, DD> = point.iter().map(|(k, v)| (k.clone(), DD::from_f64(*v))).collect();
        let vals = prog.eval_named(&p)?;
        Ok(nalgebra::DMatrix::from_fn(n, n, |i, j| vals[i * n + j].to_f64()))
    }

    /// (positive, negative, zero) eigenvalue counts at a point.
    pub fn signature_at(&self, point: &HashMap<Symbol, f64>) -> Result<(usize, usize, usize), EvalError> {
        let m = self.eval_matrix(&self.matrix_program()?, point)?;
        Ok(inertia(&m, 1e-10))
    }

    /// Samples the box and checks |det g| >= det_floor and, when declared,
    /// the signature. Returns the smallest |det g| seen.
    pub fn check_nondegenerate(&self, cfg: &ZeroTestConfig) -> Result<f64, CurvatureError> {
        let prog = self.matrix_program()?;
        let vars: Vec<Symbol> = prog.vars().to_vec();
        let sampler = self.domain.sampler(&vars);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut min_det = f64::INFINITY;
        let mut ok = 0;
        let mut attempts = 0;
        while ok < cfg.samples.max(1) {
            attempts += 1;
            if attempts > 4 * cfg.samples.max(1) + 8 {
                return Err(CurvatureError::Eval(EvalError::DomainViolation("metric not evaluable on the box".into())));
            }
            let pt = sampler.draw(&mut rng).map_err(|e| CurvatureError::Eval(EvalError::DomainViolation(e.to_string())))?;
            let named: HashMap<Symbol, f64> = sampler.vars().iter().cloned().zip(pt).collect();
            let m = match self.eval_matrix(&prog, &named) {
                Ok(m) => m,
                Err(_) => continue,
            };
            ok += 1;
            let det = m.determinant().abs();
            min_det = min_det.min(det);
            if det < self.det_floor {
                return Err(CurvatureError::Singular(describe_point(&named)));
            }
            if let Some((p, q)) = self.signature {
                let (ip, iq, _) = inertia(&m, 1e-10);
                if (ip, iq) != (p, q) {
                    return Err(CurvatureError::Signature { expected: (p, q), found: (ip, iq) });
                }
            }
        }
        Ok(min_det)
    }

    pub fn to_json(&self) -> Value {
        let mut s = self.to_symmetric_form().to_json();
        if let Some((p, q)) = self.signature {
            s["signature"] = json!([p, q]);
        }
        s
    }
}

fn describe_point(p: &HashMap<Symbol, f64>) -> String {
    let mut v: Vec<String> = p.iter().map(|(k, x)| format!("{}={}", k, x)).collect();
    v.sort();
    v.join(", ")
}

/// Taylor coefficients of the metric (and optional Weyl 1-form) at a point,
/// compiled into one program.
pub(crate) struct JetEngine {
    n: usize,
    order: usize,
    layout: Arc<JetLayout>,
    prog: Program,
    /// 1/α! per monomial.
    factorials: Vec<BigRational>,
    has_nu: bool,
}

impl JetEngine {
    pub fn new(metric: &MetricTensor, nu: Option<&DifferentialForm>, order: usize) -> Result<JetEngine, CurvatureError> {
        let n = metric.dim();
        let chart = metric.chart();
        if let Some(nu) = nu {
            if nu.degree() != 1 || nu.chart().coords() != chart.coords() {
                return Err(CurvatureError::Shape("Weyl 1-form must be a 1-form on the metric's chart".into()));
            }
        }
        let layout = JetLayout::new(n, order);
        let mut parents = vec![(0usize, 0usize); layout.monomials.len()];
        for (t, m) in layout.monomials.iter().enumerate().skip(1) {
            let i = m.iter().rposition(|&e| e > 0).unwrap();
            let mut p = m.clone();
            p[i] -= 1;
            parents[t] = (layout.index_of(&p).unwrap(), i);
        }
        let mut diff = crate::expr::Differentiator::new();
        let mut jet_exprs = |e: &Expr, ord: usize| -> Vec<Expr> {
            let len = layout.len(ord);
            let mut out: Vec<Expr> = Vec::with_capacity(len);
            out.push(e.clone());
            for t in 1..len {
                let (p, i) = parents[t];
                let d = diff.diff(&out[p], &chart.coords()[i]);
                out.push(d);
            }
            out
        };
        let mut exprs = Vec::new();
        for i in 0..n {
            for j in i..n {
                exprs.extend(jet_exprs(metric.component(i, j), order));
            }
        }
        if let Some(nu) = nu {
            for i in 0..n {
                exprs.extend(jet_exprs(&nu.coefficient(&[i]), order - 1));
            }
        }
        for (s, r) in metric.reductions() {
            let map: HashMap<Symbol, Expr> = [(s.clone(), r.clone())].into_iter().collect();
            let mut sub = Substitution::new(&map);
            exprs = exprs.iter().map(|e| sub.apply(e)).collect();
        }
        for e in &exprs {
            if e.contains_int() {
                return Err(CurvatureError::Eval(EvalError::ResidualIntegral));
            }
        }
        let prog = Program::compile(&exprs, None)?;
        let factorials = layout
            .monomials
            .iter()
            .map(|m| {
                let f: BigInt = m.iter().map(|&e| (1..=e as u64).product::<u64>()).map(BigInt::from).product();
                BigRational::new(BigInt::from(1), f)
            })
            .collect();
        Ok(JetEngine { n, order, layout, prog, factorials, has_nu: nu.is_some() })
    }

    pub fn vars(&self) -> &[Symbol] {
        self.prog.vars()
    }

    pub fn geometry<T: Scalar>(&self, point: &[T]) -> Result<Geometry<T>, EvalError> {
        let vals = self.prog.eval(point)?;
        let n = self.n;
        let len = self.layout.len(self.order);
        let mut it = vals.into_iter();
        let mut take = |ord: usize| -> Jet<T> {
            let l = self.layout.len(ord);
            let c: Vec<T> = (0..l).map(|t| it.next().unwrap() * T::from_rational(&self.factorials[t])).collect();
            Jet::from_coefficients(self.layout.clone(), ord, c)
        };
        let mut upper: Vec<Jet<T>> = Vec::new();
        for _ in 0..n * (n + 1) / 2 {
            upper.push(take(self.order));
        }
        let nu = if self.has_nu { Some((0..n).map(|_| take(self.order - 1)).collect::<Vec<_>>()) } else { None };
        debug_assert!(len > 0);
        let mut g = vec![Jet::zero(self.layout.clone(), self.order); n * n];
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                g[i * n + j] = upper[k].clone();
                g[j * n + i] = upper[k].clone();
                k += 1;
            }
        }
        Geometry::new(self.layout.clone(), n, g, nu)
    }

    /// Evaluates a quantity computed from the geometry and reports
    /// `(value, scale)` per component.
    pub fn run<F>(&self, point: &[f64], precision: Precision, f: F) -> Result<Vec<(f64, f64)>, EvalError>
    where
        F: QuantityFn,
    {
        fn go<T: Scalar, F: QuantityFn>(e: &JetEngine, pt: Vec<T>, f: &F) -> Result<Vec<(f64, f64)>, EvalError> {
            let geo = e.geometry(&pt)?;
            let out = f.compute(&geo);
            out.iter()
                .map(|j| {
                    let v = j.value();
                    let x = v.to_f64();
                    if x.is_finite() {
                        Ok((x, v.magnitude()))
                    } else {
                        Err(EvalError::NonFinite)
                    }
                })
                .collect()
        }
        match precision {
            Precision::DoubleDouble => go::<Measured<DD>, F>(self, point.iter().map(|&x| Measured::exact(DD::from_f64(x))).collect(), &f),
            Precision::F64 => go::<Measured<f64>, F>(self, point.iter().map(|&x| Measured::exact(x)).collect(), &f),
        }
    }
}

/// A pointwise quantity derived from the connection and curvature.
pub(crate) trait QuantityFn {
    fn compute<T: Scalar>(&self, g: &Geometry<T>) -> Vec<Jet<T>>;
}
