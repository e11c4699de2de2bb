use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::expr::{
    eval_with_scale, zero_test_fn, DomainBox, EvalError, Expr, Precision, Program, Symbol, ZeroTestConfig, ZeroTestError, ZeroTestVerdict,
};
use crate::exterior::Chart;

use super::CurvatureError;

pub(crate) type PointFn = dyn Fn(&[f64], Precision) -> Result<Vec<(f64, f64)>, EvalError> + Send + Sync;

#[derive(Clone)]
enum Repr {
    Symbolic { comps: Vec<Expr>, prog: Arc<Program> },
    Pointwise(Arc<PointFn>),
}

/// A tensor with `upper` contravariant indices followed by `lower`
/// covariant ones, stored row-major over `dim^(upper+lower)` slots.
///
/// Components are either symbolic or available only pointwise (large
/// curvature computations are never expanded).
#[derive(Clone)]
pub struct TensorField {
    chart: Arc<Chart>,
    name: String,
    upper: usize,
    lower: usize,
    vars: Vec<Symbol>,
    domain: DomainBox,
    repr: Repr,
}

impl fmt::Debug for TensorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TensorField({}, {:?}, ^{} _{})", self.name, self.chart, self.upper, self.lower)
    }
}

impl TensorField {
    pub fn symbolic(
        chart: Arc<Chart>,
        name: &str,
        upper: usize,
        lower: usize,
        comps: Vec<Expr>,
        domain: DomainBox,
    ) -> Result<TensorField, CurvatureError> {
        let want = chart.dim().pow((upper + lower) as u32);
        if comps.len() != want {
            return Err(CurvatureError::Shape(format!("expected {} components, found {}", want, comps.len())));
        }
        let mut vars = BTreeSet::new();
        for c in &comps {
            vars.extend(c.symbols());
        }
        let vars: Vec<Symbol> = vars.into_iter().collect();
        let prog = Arc::new(Program::compile(&comps, Some(&vars))?);
        Ok(TensorField { chart, name: name.into(), upper, lower, vars, domain, repr: Repr::Symbolic { comps, prog } })
    }

    pub(crate) fn pointwise(
        chart: Arc<Chart>,
        name: &str,
        upper: usize,
        lower: usize,
        vars: Vec<Symbol>,
        domain: DomainBox,
        f: Arc<PointFn>,
    ) -> TensorField {
        TensorField { chart, name: name.into(), upper, lower, vars, domain, repr: Repr::Pointwise(f) }
    }

    /// A scalar field given by an expression.
    pub fn scalar(chart: Arc<Chart>, e: Expr, domain: DomainBox) -> Result<TensorField, CurvatureError> {
        TensorField::symbolic(chart, "scalar", 0, 0, vec![e], domain)
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> (usize, usize) {
        (self.upper, self.lower)
    }

    pub fn len(&self) -> usize {
        self.chart.dim().pow((self.upper + self.lower) as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Symbols a point must bind, in order.
    pub fn vars(&self) -> &[Symbol] {
        &self.vars
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn with_domain(mut self, domain: DomainBox) -> Self {
        self.domain = domain;
        self
    }

    pub fn components(&self) -> Option<&[Expr]> {
        match &self.repr {
            Repr::Symbolic { comps, .. } => Some(comps),
            Repr::Pointwise(_) => None,
        }
    }

    /// `(value, scale)` per component at a point ordered as [`vars`](Self::vars).
    pub fn at(&self, point: &[f64], precision: Precision) -> Result<Vec<(f64, f64)>, EvalError> {
        match &self.repr {
            Repr::Symbolic { prog, .. } => eval_with_scale(prog, point, precision),
            Repr::Pointwise(f) => f(point, precision),
        }
    }

    pub fn at_named(&self, point: &BTreeMap<String, f64>, precision: Precision) -> Result<Vec<(f64, f64)>, EvalError> {
        let p = self
            .vars
            .iter()
            .map(|s| point.get(&**s).copied().ok_or_else(|| EvalError::UnboundSymbol(s.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        self.at(&p, precision)
    }

    pub fn values_at(&self, point: &BTreeMap<String, f64>) -> Result<Vec<f64>, EvalError> {
        Ok(self.at_named(point, Precision::DoubleDouble)?.into_iter().map(|(v, _)| v).collect())
    }

    /// Zero-tests every component jointly on the field's own box.
    pub fn zero_test(&self, cfg: &ZeroTestConfig) -> Result<ZeroTestVerdict, ZeroTestError> {
        self.zero_test_on(&self.domain, cfg)
    }

    pub fn zero_test_on(&self, domain: &DomainBox, cfg: &ZeroTestConfig) -> Result<ZeroTestVerdict, ZeroTestError> {
        if let Some(c) = self.components() {
            if c.iter().all(Expr::is_zero) {
                return Ok(ZeroTestVerdict::trivially_zero(cfg));
            }
        }
        let precision = cfg.precision;
        zero_test_fn(&self.vars, domain, cfg, |p| self.at(p, precision))
    }

    /// Pointwise combination of several fields at a shared point. The result
    /// binds the union of their symbols and uses the first field's box.
    pub fn combine<F>(parts: &[&TensorField], name: &str, upper: usize, lower: usize, f: F) -> TensorField
    where
        F: Fn(&[Vec<(f64, f64)>]) -> Result<Vec<(f64, f64)>, EvalError> + Send + Sync + 'static,
    {
        let mut vars = BTreeSet::new();
        let mut domain = parts[0].domain.clone();
        for p in parts {
            vars.extend(p.vars.iter().cloned());
            domain = domain.merged(&p.domain);
        }
        let vars: Vec<Symbol> = vars.into_iter().collect();
        let maps: Vec<Vec<usize>> =
            parts.iter().map(|p| p.vars.iter().map(|v| vars.iter().position(|w| w == v).unwrap()).collect()).collect();
        let owned: Vec<TensorField> = parts.iter().map(|p| (*p).clone()).collect();
        let func = move |pt: &[f64], prec: Precision| -> Result<Vec<(f64, f64)>, EvalError> {
            let mut vals = Vec::with_capacity(owned.len());
            for (p, m) in owned.iter().zip(&maps) {
                let sub: Vec<f64> = m.iter().map(|&i| pt[i]).collect();
                vals.push(p.at(&sub, prec)?);
            }
            f(&vals)
        };
        TensorField::pointwise(parts[0].chart.clone(), name, upper, lower, vars, domain, Arc::new(func))
    }

    /// self − w·other, componentwise, with w a scalar field.
    pub fn sub_weighted(&self, other: &TensorField, w: &TensorField) -> TensorField {
        TensorField::combine(&[self, other, w], &format!("{}-residual", self.name), self.upper, self.lower, |v| {
            let (wv, wm) = v[2][0];
            Ok(v[0].iter().zip(&v[1]).map(|(&(a, am), &(b, bm))| (a - wv * b, am + wm * bm)).collect())
        })
    }

    pub fn to_json(&self) -> Value {
        let chart = json!({"name": self.chart.name(), "coords": self.chart.coords().iter().map(|c| c.to_string()).collect::<Vec<_>>()});
        let mut v = json!({"name": self.name, "chart": chart, "arity": {"upper": self.upper, "lower": self.lower}});
        if let Some(c) = self.components() {
            v["components"] = json!(c.iter().map(|e| e.to_string()).collect::<Vec<_>>());
        }
        v
    }

    /// Numeric table at a point.
    pub fn to_json_at(&self, point: &BTreeMap<String, f64>) -> Result<Value, EvalError> {
        let vals = self.values_at(point)?;
        let mut v = self.to_json();
        if let Some(o) = v.as_object_mut() {
            o.remove("components");
        }
        v["point"] = json!(point);
        v["values"] = json!(vals);
        Ok(v)
    }
}
