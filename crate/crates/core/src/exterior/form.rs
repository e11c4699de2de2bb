use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::expr::{parse, zero_test_exprs, Differentiator, DomainBox, Expr, ZeroTestConfig, ZeroTestError, ZeroTestVerdict};

use super::{Chart, ExteriorError};

/// A vector field `X = X^i ∂_i` on a chart.
#[derive(Clone, Debug)]
pub struct VectorField {
    pub chart: Arc<Chart>,
    pub components: Vec<Expr>,
}

impl VectorField {
    pub fn new(chart: Arc<Chart>, components: Vec<Expr>) -> Result<VectorField, ExteriorError> {
        if components.len() != chart.dim() {
            return Err(ExteriorError::Arity { expected: chart.dim(), found: components.len() });
        }
        Ok(VectorField { chart, components })
    }

    /// The coordinate field ∂_i.
    pub fn coordinate(chart: Arc<Chart>, i: usize) -> VectorField {
        let components = (0..chart.dim()).map(|j| if i == j { Expr::one() } else { Expr::zero() }).collect();
        VectorField { chart, components }
    }

    /// X(f) = X^i ∂_i f.
    pub fn apply(&self, f: &Expr) -> Expr {
        self.apply_with(&mut Differentiator::new(), f)
    }

    pub fn apply_with(&self, d: &mut Differentiator, f: &Expr) -> Expr {
        let mut terms = Vec::new();
        for (c, x) in self.chart.coords().iter().zip(&self.components) {
            if x.is_zero() {
                continue;
            }
            let df = d.diff(f, c);
            if !df.is_zero() {
                terms.push(x * &df);
            }
        }
        Expr::add(terms)
    }

    /// Applies the field `n` times.
    pub fn apply_n(&self, f: &Expr, n: usize) -> Expr {
        let mut d = Differentiator::new();
        (0..n).fold(f.clone(), |acc, _| self.apply_with(&mut d, &acc))
    }
}

/// Sorts `idx` in place, returning the permutation sign, or `None` if an
/// index repeats.
fn sort_sign(idx: &mut [usize]) -> Option<i64> {
    let mut sign = 1;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

fn signed(c: Expr, sign: i64) -> Expr {
    if sign < 0 {
        c.neg()
    } else {
        c
    }
}

/// A k-form with coefficients on strictly increasing index tuples.
#[derive(Clone, Debug)]
pub struct DifferentialForm {
    chart: Arc<Chart>,
    degree: usize,
    coeffs: BTreeMap<Vec<usize>, Expr>,
}

impl DifferentialForm {
    pub fn zero(chart: Arc<Chart>, degree: usize) -> DifferentialForm {
        DifferentialForm { chart, degree, coeffs: BTreeMap::new() }
    }

    /// A 0-form.
    pub fn function(chart: Arc<Chart>, f: Expr) -> DifferentialForm {
        let mut w = DifferentialForm::zero(chart, 0);
        w.add_term(vec![], f);
        w
    }

    /// dx^i.
    pub fn dx(chart: Arc<Chart>, i: usize) -> DifferentialForm {
        let mut w = DifferentialForm::zero(chart, 1);
        w.add_term(vec![i], Expr::one());
        w
    }

    /// The 1-form Σ c_i dx^i.
    pub fn one_form(chart: Arc<Chart>, components: Vec<Expr>) -> Result<DifferentialForm, ExteriorError> {
        if components.len() != chart.dim() {
            return Err(ExteriorError::Arity { expected: chart.dim(), found: components.len() });
        }
        let mut w = DifferentialForm::zero(chart, 1);
        for (i, c) in components.into_iter().enumerate() {
            w.add_term(vec![i], c);
        }
        Ok(w)
    }

    /// Builds a 1-form from `(coordinate name, coefficient)` pairs.
    pub fn from_pairs(chart: Arc<Chart>, pairs: &[(&str, Expr)]) -> Result<DifferentialForm, ExteriorError> {
        let mut w = DifferentialForm::zero(chart.clone(), 1);
        for (name, c) in pairs {
            let i = chart.index_of(name).ok_or_else(|| ExteriorError::UnknownCoordinate(name.to_string()))?;
            w.add_term(vec![i], c.clone());
        }
        Ok(w)
    }

    /// Volume form dx^0 ∧ … ∧ dx^{n-1}.
    pub fn volume(chart: Arc<Chart>) -> DifferentialForm {
        let n = chart.dim();
        let mut w = DifferentialForm::zero(chart, n);
        w.add_term((0..n).collect(), Expr::one());
        w
    }

    /// Adds `c dx^{idx}`; `idx` need not be sorted.
    pub fn add_term(&mut self, mut idx: Vec<usize>, c: Expr) {
        assert_eq!(idx.len(), self.degree, "index tuple length must equal the degree");
        assert!(idx.iter().all(|&i| i < self.chart.dim()), "coordinate index out of range");
        if c.is_zero() {
            return;
        }
        let Some(sign) = sort_sign(&mut idx) else { return };
        let c = signed(c, sign);
        match self.coeffs.remove(&idx) {
            Some(old) => {
                let s = &old + &c;
                if !s.is_zero() {
                    self.coeffs.insert(idx, s);
                }
            }
            None => {
                self.coeffs.insert(idx, c);
            }
        }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &Expr)> {
        self.coeffs.iter()
    }

    /// Coefficient on an arbitrary (possibly unsorted) index tuple.
    pub fn coefficient(&self, idx: &[usize]) -> Expr {
        let mut v = idx.to_vec();
        match sort_sign(&mut v) {
            None => Expr::zero(),
            Some(sign) => signed(self.coeffs.get(&v).cloned().unwrap_or_else(Expr::zero), sign),
        }
    }

    /// Components of a 1-form, one per coordinate.
    pub fn components(&self) -> Vec<Expr> {
        assert_eq!(self.degree, 1);
        (0..self.chart.dim()).map(|i| self.coefficient(&[i])).collect()
    }

    pub fn coefficients(&self) -> Vec<Expr> {
        self.coeffs.values().cloned().collect()
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn check_chart(&self, other: &DifferentialForm) -> Result<(), ExteriorError> {
        if self.chart != other.chart {
            return Err(ExteriorError::ChartMismatch { expected: self.chart.name().into(), found: other.chart.name().into() });
        }
        Ok(())
    }

    pub fn add(&self, other: &DifferentialForm) -> Result<DifferentialForm, ExteriorError> {
        self.check_chart(other)?;
        if self.degree != other.degree {
            return Err(ExteriorError::DegreeMismatch(self.degree, other.degree));
        }
        let mut out = self.clone();
        for (k, v) in &other.coeffs {
            out.add_term(k.clone(), v.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &DifferentialForm) -> Result<DifferentialForm, ExteriorError> {
        self.add(&other.scale(&Expr::int(-1)))
    }

    pub fn scale(&self, f: &Expr) -> DifferentialForm {
        let mut out = DifferentialForm::zero(self.chart.clone(), self.degree);
        for (k, v) in &self.coeffs {
            out.add_term(k.clone(), f * v);
        }
        out
    }

    pub fn map_coefficients(&self, f: impl Fn(&Expr) -> Expr) -> DifferentialForm {
        let mut out = DifferentialForm::zero(self.chart.clone(), self.degree);
        for (k, v) in &self.coeffs {
            out.add_term(k.clone(), f(v));
        }
        out
    }

    pub fn wedge(&self, other: &DifferentialForm) -> Result<DifferentialForm, ExteriorError> {
        self.check_chart(other)?;
        let degree = self.degree + other.degree;
        if degree > self.chart.dim() {
            return Err(ExteriorError::DegreeOverflow { degree, dim: self.chart.dim() });
        }
        let mut out = DifferentialForm::zero(self.chart.clone(), degree);
        for (a, ca) in &self.coeffs {
            for (b, cb) in &other.coeffs {
                let mut idx = a.clone();
                idx.extend_from_slice(b);
                out.add_term(idx, ca * cb);
            }
        }
        Ok(out)
    }

    /// Wedge of several forms, left to right.
    pub fn wedge_all(forms: &[&DifferentialForm]) -> Result<DifferentialForm, ExteriorError> {
        let mut acc = forms[0].clone();
        for f in &forms[1..] {
            acc = acc.wedge(f)?;
        }
        Ok(acc)
    }

    /// Exterior derivative.
    pub fn d(&self) -> DifferentialForm {
        self.d_with(&mut Differentiator::new())
    }

    pub fn d_with(&self, diff: &mut Differentiator) -> DifferentialForm {
        let n = self.chart.dim();
        let mut out = DifferentialForm::zero(self.chart.clone(), (self.degree + 1).min(n));
        if self.degree >= n {
            return out;
        }
        for (idx, c) in &self.coeffs {
            for j in 0..n {
                if idx.contains(&j) {
                    continue;
                }
                let dc = diff.diff(c, &self.chart.coords()[j]);
                if dc.is_zero() {
                    continue;
                }
                let mut full = vec![j];
                full.extend_from_slice(idx);
                out.add_term(full, dc);
            }
        }
        out
    }

    /// Interior product i_X.
    pub fn interior(&self, x: &VectorField) -> Result<DifferentialForm, ExteriorError> {
        if *x.chart != *self.chart {
            return Err(ExteriorError::ChartMismatch { expected: self.chart.name().into(), found: x.chart.name().into() });
        }
        if self.degree == 0 {
            return Ok(DifferentialForm::zero(self.chart.clone(), 0));
        }
        let mut out = DifferentialForm::zero(self.chart.clone(), self.degree - 1);
        for (idx, c) in &self.coeffs {
            for (k, &i) in idx.iter().enumerate() {
                let xi = &x.components[i];
                if xi.is_zero() {
                    continue;
                }
                let mut rest = idx.clone();
                rest.remove(k);
                out.add_term(rest, signed(xi * c, if k % 2 == 0 { 1 } else { -1 }));
            }
        }
        Ok(out)
    }

    /// Lie derivative by Cartan's formula, L_X = i_X d + d i_X.
    pub fn lie_derivative(&self, x: &VectorField) -> Result<DifferentialForm, ExteriorError> {
        let a = self.d().interior(x)?;
        let b = self.interior(x)?.d();
        if self.degree == 0 {
            return Ok(a);
        }
        a.add(&b)
    }

    /// Lie derivative from the coordinate component formula
    /// (L_X ω)_I = X^j ∂_j ω_I + Σ_k ω_{I[k→j]} ∂_{I_k} X^j.
    /// Independent of [`DifferentialForm::lie_derivative`]; used to check it.
    pub fn lie_derivative_components(&self, x: &VectorField) -> Result<DifferentialForm, ExteriorError> {
        if *x.chart != *self.chart {
            return Err(ExteriorError::ChartMismatch { expected: self.chart.name().into(), found: x.chart.name().into() });
        }
        let mut diff = Differentiator::new();
        let n = self.chart.dim();
        let coords = self.chart.coords().to_vec();
        let mut out = DifferentialForm::zero(self.chart.clone(), self.degree);
        for (idx, c) in &self.coeffs {
            out.add_term(idx.clone(), x.apply_with(&mut diff, c));
            // ω_{...j...} dx^{...i_k...} gets ∂_{i_k} X^j; iterate over slots k
            // and target coordinates m for the transported index.
            for k in 0..idx.len() {
                let j = idx[k];
                for (m, cm) in coords.iter().enumerate().take(n) {
                    let dxj = diff.diff(&x.components[j], cm);
                    if dxj.is_zero() {
                        continue;
                    }
                    let mut target = idx.clone();
                    target[k] = m;
                    out.add_term(target, c * &dxj);
                }
            }
        }
        Ok(out)
    }

    pub fn substitute(&self, bindings: &std::collections::HashMap<crate::expr::Symbol, Expr>) -> DifferentialForm {
        self.map_coefficients(|c| c.substitute(bindings))
    }

    /// Zero-tests all coefficients jointly.
    pub fn zero_test(&self, domain: &DomainBox, cfg: &ZeroTestConfig) -> Result<ZeroTestVerdict, ZeroTestError> {
        zero_test_exprs(&self.coefficients(), domain, cfg)
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self.coeffs.iter().map(|(k, v)| json!({"indices": k, "coefficient": v.to_string()})).collect();
        json!({
            "chart": {"name": self.chart.name(), "coords": self.chart.coords().iter().map(|c| c.to_string()).collect::<Vec<_>>()},
            "degree": self.degree,
            "terms": terms,
        })
    }

    pub fn from_json(v: &Value) -> Result<DifferentialForm, ExteriorError> {
        let bad = |m: &str| ExteriorError::Json(m.to_string());
        let chart = &v["chart"];
        let name = chart["name"].as_str().ok_or_else(|| bad("chart.name"))?;
        let coords: Vec<&str> = chart["coords"]
            .as_array()
            .ok_or_else(|| bad("chart.coords"))?
            .iter()
            .map(|c| c.as_str().ok_or_else(|| bad("coordinate")))
            .collect::<Result<_, _>>()?;
        let chart = Chart::new(name, &coords)?;
        let degree = v["degree"].as_u64().ok_or_else(|| bad("degree"))? as usize;
        if degree > chart.dim() {
            return Err(ExteriorError::DegreeOverflow { degree, dim: chart.dim() });
        }
        let mut w = DifferentialForm::zero(chart.clone(), degree);
        for t in v["terms"].as_array().ok_or_else(|| bad("terms"))? {
            let idx: Vec<usize> = t["indices"]
                .as_array()
                .ok_or_else(|| bad("indices"))?
                .iter()
                .map(|i| i.as_u64().map(|i| i as usize).ok_or_else(|| bad("index")))
                .collect::<Result<_, _>>()?;
            if idx.len() != degree || idx.iter().any(|&i| i >= chart.dim()) {
                return Err(bad("index tuple"));
            }
            let c = parse(t["coefficient"].as_str().ok_or_else(|| bad("coefficient"))?)?;
            w.add_term(idx, c);
        }
        Ok(w)
    }
}
