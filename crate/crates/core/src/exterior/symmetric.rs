use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::expr::{zero_test_exprs, Differentiator, DomainBox, Expr, Program, Symbol, ZeroTestConfig, ZeroTestVerdict};

use super::{Chart, DifferentialForm, ExteriorError, VectorField};

/// A symmetric bilinear form g_ij dx^i dx^j, possibly degenerate.
///
/// Products of 1-forms use the symmetrized convention
/// αβ = ½(α⊗β + β⊗α), so `square(α)` has components α_i α_j.
#[derive(Clone, Debug)]
pub struct SymmetricForm {
    chart: Arc<Chart>,
    g: Vec<Vec<Expr>>,
}

impl SymmetricForm {
    pub fn zero(chart: Arc<Chart>) -> SymmetricForm {
        let n = chart.dim();
        SymmetricForm { chart, g: vec![vec![Expr::zero(); n]; n] }
    }

    /// From a full matrix; the strict lower triangle is ignored.
    pub fn from_matrix(chart: Arc<Chart>, m: Vec<Vec<Expr>>) -> Result<SymmetricForm, ExteriorError> {
        let n = chart.dim();
        if m.len() != n || m.iter().any(|r| r.len() != n) {
            return Err(ExteriorError::Arity { expected: n, found: m.len() });
        }
        let mut g = m;
        for i in 0..n {
            for j in 0..i {
                g[i][j] = g[j][i].clone();
            }
        }
        Ok(SymmetricForm { chart, g })
    }

    /// Symmetric product αβ.
    pub fn product(a: &DifferentialForm, b: &DifferentialForm) -> Result<SymmetricForm, ExteriorError> {
        if a.degree() != 1 || b.degree() != 1 {
            return Err(ExteriorError::DegreeMismatch(a.degree(), 1));
        }
        if a.chart() != b.chart() {
            return Err(ExteriorError::ChartMismatch { expected: a.chart().name().into(), found: b.chart().name().into() });
        }
        let (ac, bc) = (a.components(), b.components());
        let n = ac.len();
        let half = Expr::rational(1, 2);
        let mut g = vec![vec![Expr::zero(); n]; n];
        for i in 0..n {
            for j in i..n {
                let s = Expr::add(vec![&ac[i] * &bc[j], &ac[j] * &bc[i]]);
                let v = Expr::mul(vec![half.clone(), s]);
                g[i][j] = v.clone();
                g[j][i] = v;
            }
        }
        Ok(SymmetricForm { chart: a.chart().clone(), g })
    }

    pub fn square(a: &DifferentialForm) -> Result<SymmetricForm, ExteriorError> {
        let c = a.components();
        let n = c.len();
        let mut g = vec![vec![Expr::zero(); n]; n];
        for i in 0..n {
            for j in i..n {
                let v = &c[i] * &c[j];
                g[i][j] = v.clone();
                g[j][i] = v;
            }
        }
        Ok(SymmetricForm { chart: a.chart().clone(), g })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn component(&self, i: usize, j: usize) -> &Expr {
        &self.g[i][j]
    }

    pub fn matrix(&self) -> &Vec<Vec<Expr>> {
        &self.g
    }

    /// Upper-triangle components in row order.
    pub fn upper(&self) -> Vec<Expr> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                out.push(self.g[i][j].clone());
            }
        }
        out
    }

    pub fn upper_index(&self, k: usize) -> (usize, usize) {
        let n = self.dim();
        let mut c = 0;
        for i in 0..n {
            for j in i..n {
                if c == k {
                    return (i, j);
                }
                c += 1;
            }
        }
        panic!("index out of range")
    }

    fn zip(&self, other: &SymmetricForm, f: impl Fn(&Expr, &Expr) -> Expr) -> Result<SymmetricForm, ExteriorError> {
        if self.chart != other.chart {
            return Err(ExteriorError::ChartMismatch { expected: self.chart.name().into(), found: other.chart.name().into() });
        }
        let n = self.dim();
        let g = (0..n).map(|i| (0..n).map(|j| f(&self.g[i][j], &other.g[i][j])).collect()).collect();
        Ok(SymmetricForm { chart: self.chart.clone(), g })
    }

    pub fn add(&self, other: &SymmetricForm) -> Result<SymmetricForm, ExteriorError> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SymmetricForm) -> Result<SymmetricForm, ExteriorError> {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, f: &Expr) -> SymmetricForm {
        let g = self.g.iter().map(|r| r.iter().map(|c| f * c).collect()).collect();
        SymmetricForm { chart: self.chart.clone(), g }
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> SymmetricForm {
        let g = self.g.iter().map(|r| r.iter().map(&f).collect()).collect();
        SymmetricForm { chart: self.chart.clone(), g }
    }

    /// The 1-form g(X, ·).
    pub fn contract(&self, x: &VectorField) -> Result<DifferentialForm, ExteriorError> {
        let n = self.dim();
        let comps = (0..n).map(|j| Expr::add((0..n).map(|i| &x.components[i] * &self.g[i][j]).collect())).collect();
        DifferentialForm::one_form(self.chart.clone(), comps)
    }

    /// g(X, Y).
    pub fn evaluate(&self, x: &VectorField, y: &VectorField) -> Expr {
        let n = self.dim();
        let mut terms = Vec::new();
        for i in 0..n {
            for j in 0..n {
                terms.push(Expr::mul(vec![x.components[i].clone(), y.components[j].clone(), self.g[i][j].clone()]));
            }
        }
        Expr::add(terms)
    }

    /// (L_X g)_ij = X^k ∂_k g_ij + g_kj ∂_i X^k + g_ik ∂_j X^k.
    pub fn lie_derivative(&self, x: &VectorField) -> Result<SymmetricForm, ExteriorError> {
        if *x.chart != *self.chart {
            return Err(ExteriorError::ChartMismatch { expected: self.chart.name().into(), found: x.chart.name().into() });
        }
        let n = self.dim();
        let coords = self.chart.coords();
        let mut d = Differentiator::new();
        let dx: Vec<Vec<Expr>> = (0..n).map(|k| (0..n).map(|i| d.diff(&x.components[k], &coords[i])).collect()).collect();
        let mut g = vec![vec![Expr::zero(); n]; n];
        for i in 0..n {
            for j in i..n {
                let mut terms = vec![x.apply_with(&mut d, &self.g[i][j])];
                for k in 0..n {
                    terms.push(&self.g[k][j] * &dx[k][i]);
                    terms.push(&self.g[i][k] * &dx[k][j]);
                }
                let v = Expr::add(terms);
                g[i][j] = v.clone();
                g[j][i] = v;
            }
        }
        Ok(SymmetricForm { chart: self.chart.clone(), g })
    }

    /// Numeric matrix at a point given in chart-coordinate order, with
    /// extra symbols bound by `extra`.
    pub fn eval_matrix(&self, point: &[(&str, f64)]) -> Result<nalgebra::DMatrix<f64>, crate::expr::EvalError> {
        let n = self.dim();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.g[i][j].eval(point)?;
            }
        }
        Ok(m)
    }

    pub fn to_json(&self) -> Value {
        let n = self.dim();
        let mut comps = Vec::new();
        for i in 0..n {
            for j in i..n {
                if !self.g[i][j].is_zero() {
                    comps.push(json!({"indices": [i, j], "coefficient": self.g[i][j].to_string()}));
                }
            }
        }
        json!({
            "chart": {"name": self.chart.name(), "coords": self.chart.coords().iter().map(|c| c.to_string()).collect::<Vec<_>>()},
            "kind": "symmetric",
            "components": comps,
        })
    }
}

/// Inertia (positive, negative, zero) of a symmetric matrix, with
/// eigenvalues below `rel_tol * max|λ|` counted as zero.
pub fn inertia(m: &nalgebra::DMatrix<f64>, rel_tol: f64) -> (usize, usize, usize) {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let scale = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let (mut p, mut n, mut z) = (0, 0, 0);
    for &l in eig.eigenvalues.iter() {
        if l.abs() <= rel_tol * scale.max(f64::MIN_POSITIVE) {
            z += 1;
        } else if l > 0.0 {
            p += 1;
        } else {
            n += 1;
        }
    }
    (p, n, z)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransportOutcome {
    /// Whether L_X g = λ g holds on the box.
    pub conformal: bool,
    /// Candidate factor λ = (L_X g)_p / g_p for the pivot component p.
    pub lambda: String,
    pub pivot: (usize, usize),
    pub residual: ZeroTestVerdict,
}

/// Tests whether L_X g is proportional to g.
///
/// The pivot is the first upper-triangle component of g whose magnitude at
/// the box center exceeds 1e-6 of the largest; the residuals
/// (L_X g)_ij g_p − (L_X g)_p g_ij are then zero-tested jointly, which avoids
/// dividing by g_p.
pub fn conformal_transport_factor(
    x: &VectorField,
    g: &SymmetricForm,
    domain: &DomainBox,
    cfg: &ZeroTestConfig,
) -> Result<TransportOutcome, ExteriorError> {
    let comps = g.upper();
    if comps.iter().all(Expr::is_zero) {
        return Err(ExteriorError::VanishingForm);
    }
    let pivot_k = choose_pivot(&comps, domain, cfg.seed)?;
    let l = g.lie_derivative(x)?;
    let lu = l.upper();
    let (gp, lp) = (&comps[pivot_k], &lu[pivot_k]);
    let residuals: Vec<Expr> = comps.iter().zip(&lu).map(|(gij, lij)| lij * gp - lp * gij).collect();
    let verdict = zero_test_exprs(&residuals, domain, cfg)?;
    Ok(TransportOutcome { conformal: verdict.is_zero(), lambda: (lp / gp).to_string(), pivot: g.upper_index(pivot_k), residual: verdict })
}

fn choose_pivot(comps: &[Expr], domain: &DomainBox, seed: u64) -> Result<usize, ExteriorError> {
    let mut vars = std::collections::BTreeSet::new();
    for c in comps {
        vars.extend(c.symbols());
    }
    let vars: Vec<Symbol> = vars.into_iter().collect();
    let prog = Program::compile(comps, Some(&vars)).map_err(crate::expr::ZeroTestError::from)?;
    let sampler = domain.sampler(&vars);
    let pos: Vec<usize> = vars.iter().map(|v| sampler.vars().iter().position(|s| s == v).unwrap()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..16 {
        let full = if attempt == 0 {
            sampler.center(&mut rng).map_err(crate::expr::ZeroTestError::from)?
        } else {
            sampler.draw(&mut rng).map_err(crate::expr::ZeroTestError::from)?
        };
        let p: Vec<f64> = pos.iter().map(|&i| full[i]).collect();
        let Ok(vals) = prog.eval::<f64>(&p) else { continue };
        let max = vals.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if max == 0.0 {
            continue;
        }
        if let Some(k) = vals.iter().position(|v| v.abs() > 1e-6 * max) {
            return Ok(k);
        }
    }
    Err(ExteriorError::VanishingForm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ex;

    #[test]
    fn product_convention() {
        let c = Chart::new("R2", &["x", "y"]).unwrap();
        let dx = DifferentialForm::dx(c.clone(), 0);
        let dy = DifferentialForm::dx(c.clone(), 1);
        let g = SymmetricForm::product(&dx, &dy).unwrap();
        assert_eq!(g.component(0, 1), &Expr::rational(1, 2));
        assert!(g.component(0, 0).is_zero());
    }

    #[test]
    fn lie_derivative_of_euclidean_metric_along_rotation_vanishes() {
        let c = Chart::new("R2", &["x", "y"]).unwrap();
        let g = SymmetricForm::from_matrix(c.clone(), vec![vec![Expr::one(), Expr::zero()], vec![Expr::zero(), Expr::one()]]).unwrap();
        let rot = VectorField::new(c.clone(), vec![ex("-y"), ex("x")]).unwrap();
        let l = g.lie_derivative(&rot).unwrap();
        assert!(l.upper().iter().all(Expr::is_zero), "{:?}", l);
        let dil = VectorField::new(c, vec![ex("x"), ex("y")]).unwrap();
        let out = conformal_transport_factor(&dil, &g, &DomainBox::new(), &ZeroTestConfig::default()).unwrap();
        assert!(out.conformal);
        assert_eq!(out.lambda, "2");
    }

    #[test]
    fn inertia_counts() {
        let m = nalgebra::DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, -2.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(inertia(&m, 1e-12), (1, 1, 1));
    }
}
