//! Structure constants of a Lie algebra given by its Maurer–Cartan system.
//!
//! Convention: dθ^k = −½ c^k_ij θ^i∧θ^j for the dual coframe, equivalently
//! [e_i, e_j] = c^k_ij e_k.

use std::collections::HashMap;

use serde::Serialize;

use super::field::Q3;
use super::linalg::{inertia, rank, Inertia, Matrix};
use super::LieError;
use crate::expr::{parse, Differentiator, Expr};
use crate::exterior::{Chart, DifferentialForm};

#[derive(Debug, Clone, PartialEq)]
pub struct StructureTable {
    labels: Vec<String>,
    /// c[k][i][j].
    c: Vec<Vec<Vec<Q3>>>,
}

/// First (i, j, k; m) with a nonzero Jacobi sum.
#[derive(Debug, Clone, Serialize)]
pub struct JacobiViolation {
    pub triple: [String; 3],
    pub component: String,
    pub value: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct JacobiReport {
    pub holds: bool,
    pub violation: Option<JacobiViolation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct KillingReport {
    pub rank: usize,
    pub inertia: Inertia,
    pub nondegenerate: bool,
}

impl StructureTable {
    pub fn zero(labels: Vec<String>) -> StructureTable {
        let n = labels.len();
        StructureTable { labels, c: vec![vec![vec![Q3::zero(); n]; n]; n] }
    }

    /// Sets c^k_ij and c^k_ji = −c^k_ij.
    pub fn set(&mut self, k: usize, i: usize, j: usize, v: Q3) {
        self.c[k][j][i] = -&v;
        self.c[k][i][j] = v;
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> &Q3 {
        &self.c[k][i][j]
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Parses lines `d<label> = Σ ±[coef*] A ^ B`, where A and B are linear
    /// combinations of labels. Every label needs exactly one line.
    pub fn from_system(labels: &[&str], text: &str) -> Result<StructureTable, LieError> {
        let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        let mut t = StructureTable::zero(labels.clone());
        let mut seen = vec![false; labels.len()];
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (lhs, rhs) = line.split_once('=').ok_or_else(|| LieError::Syntax(format!("missing `=` in `{}`", line)))?;
            let name = lhs.trim().strip_prefix('d').ok_or_else(|| LieError::Syntax(format!("`{}` is not d<label>", lhs.trim())))?;
            let k = labels.iter().position(|l| l == name).ok_or_else(|| LieError::UnknownLabel(name.into()))?;
            if std::mem::replace(&mut seen[k], true) {
                return Err(LieError::Syntax(format!("d{} is given twice", name)));
            }
            for term in split_top_level(rhs) {
                let Some((a, b)) = split_wedge(&term)? else {
                    let e = parse(&term).map_err(|e| LieError::Syntax(e.to_string()))?;
                    if !e.is_zero() {
                        return Err(LieError::Syntax(format!("term `{}` is not a wedge product", term)));
                    }
                    continue;
                };
                let u = linear_combination(&a, &labels)?;
                let v = linear_combination(&b, &labels)?;
                // u∧v = Σ_{i<j} (u_i v_j − u_j v_i) θ^i∧θ^j, and dθ^k = −Σ_{i<j} c^k_ij θ^i∧θ^j.
                for i in 0..labels.len() {
                    for j in i + 1..labels.len() {
                        let w = &(&u[i] * &v[j]) - &(&u[j] * &v[i]);
                        if !w.is_zero() {
                            let v = &t.c[k][i][j] - &w;
                            t.set(k, i, j, v);
                        }
                    }
                }
            }
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(LieError::Syntax(format!("no equation for d{}", labels[k])));
        }
        Ok(t)
    }

    /// The table with every constant negated (the opposite algebra).
    pub fn negated(&self) -> StructureTable {
        StructureTable {
            labels: self.labels.clone(),
            c: self.c.iter().map(|m| m.iter().map(|r| r.iter().map(|x| -x).collect()).collect()).collect(),
        }
    }

    /// The same table with its generators listed in the order of `labels`.
    pub fn reordered(&self, labels: &[String]) -> Result<StructureTable, LieError> {
        if labels.len() != self.dim() {
            return Err(LieError::Dimension { expected: self.dim(), found: labels.len() });
        }
        let p: Vec<usize> =
            labels.iter().map(|l| self.index_of(l).ok_or_else(|| LieError::UnknownLabel(l.clone()))).collect::<Result<_, _>>()?;
        let n = self.dim();
        let mut t = StructureTable::zero(labels.to_vec());
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    t.c[k][i][j] = self.c[p[k]][p[i]][p[j]].clone();
                }
            }
        }
        Ok(t)
    }

    /// Exact equality after matching generators by label.
    pub fn same_brackets(&self, other: &StructureTable) -> bool {
        other.reordered(&self.labels).is_ok_and(|o| o.c == self.c)
    }

    pub fn is_antisymmetric(&self) -> bool {
        let n = self.dim();
        (0..n).all(|k| (0..n).all(|i| (0..n).all(|j| (&self.c[k][i][j] + &self.c[k][j][i]).is_zero())))
    }

    /// Σ_cyclic [[e_i, e_j], e_k] for all i < j < k.
    pub fn jacobi_check(&self) -> JacobiReport {
        let n = self.dim();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    for m in 0..n {
                        let mut s = Q3::zero();
                        for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
                            for l in 0..n {
                                if !self.c[l][a][b].is_zero() && !self.c[m][l][c].is_zero() {
                                    s = &s + &(&self.c[l][a][b] * &self.c[m][l][c]);
                                }
                            }
                        }
                        if !s.is_zero() {
                            let lab = |x: usize| self.labels[x].clone();
                            return JacobiReport {
                                holds: false,
                                violation: Some(JacobiViolation {
                                    triple: [lab(i), lab(j), lab(k)],
                                    component: lab(m),
                                    value: s.to_string(),
                                }),
                            };
                        }
                    }
                }
            }
        }
        JacobiReport { holds: true, violation: None }
    }

    /// d(dθ^k) computed with the exterior module, extending d from the
    /// structure equations to 2-forms by the Leibniz rule. Returns the labels
    /// whose second derivative fails to vanish.
    pub fn d_squared_check(&self) -> Result<Vec<String>, LieError> {
        let names: Vec<&str> = self.labels.iter().map(String::as_str).collect();
        let chart = Chart::new("maurer-cartan", &names)?;
        let n = self.dim();
        let theta: Vec<DifferentialForm> = (0..n).map(|i| DifferentialForm::dx(chart.clone(), i)).collect();
        let mut dtheta = Vec::with_capacity(n);
        for k in 0..n {
            let mut w = DifferentialForm::zero(chart.clone(), 2);
            for i in 0..n {
                for j in i + 1..n {
                    if !self.c[k][i][j].is_zero() {
                        w.add_term(vec![i, j], (-&self.c[k][i][j]).to_expr());
                    }
                }
            }
            dtheta.push(w);
        }
        let mut failing = Vec::new();
        for k in 0..n {
            let mut dd = DifferentialForm::zero(chart.clone(), 3);
            for (idx, coef) in dtheta[k].terms() {
                let (i, j) = (idx[0], idx[1]);
                // d(θ^i∧θ^j) = dθ^i∧θ^j − θ^i∧dθ^j.
                let piece = dtheta[i].wedge(&theta[j])?.sub(&theta[i].wedge(&dtheta[j])?)?;
                dd = dd.add(&piece.scale(coef))?;
            }
            let vanishes = dd.terms().all(|(_, c)| c.is_zero() || Q3::from_expr(c).is_some_and(|q| q.is_zero()));
            if !vanishes {
                failing.push(self.labels[k].clone());
            }
        }
        Ok(failing)
    }

    /// Matrix of ad(e_i): (ad e_i)^k_j = c^k_ij.
    pub fn ad(&self, i: usize) -> Matrix {
        let n = self.dim();
        (0..n).map(|k| (0..n).map(|j| self.c[k][i][j].clone()).collect()).collect()
    }

    /// K_ij = tr(ad e_i ad e_j).
    pub fn killing_form(&self) -> Matrix {
        let n = self.dim();
        let mut k = vec![vec![Q3::zero(); n]; n];
        for i in 0..n {
            for j in i..n {
                let mut s = Q3::zero();
                for a in 0..n {
                    for b in 0..n {
                        if !self.c[a][i][b].is_zero() && !self.c[b][j][a].is_zero() {
                            s = &s + &(&self.c[a][i][b] * &self.c[b][j][a]);
                        }
                    }
                }
                k[j][i] = s.clone();
                k[i][j] = s;
            }
        }
        k
    }

    pub fn killing_analysis(&self) -> KillingReport {
        let k = self.killing_form();
        let r = rank(&k);
        let inertia = inertia(&k);
        KillingReport { rank: r, inertia, nondegenerate: r == self.dim() }
    }

    /// Nonzero constants as `([a, b], label) -> value` lines, for reports.
    pub fn brackets(&self) -> Vec<String> {
        let n = self.dim();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let terms: Vec<String> =
                    (0..n).filter(|&k| !self.c[k][i][j].is_zero()).map(|k| format!("({})*{}", self.c[k][i][j], self.labels[k])).collect();
                if !terms.is_empty() {
                    out.push(format!("[{}, {}] = {}", self.labels[i], self.labels[j], terms.join(" + ")));
                }
            }
        }
        out
    }
}

/// Splits at top-level `+`/`-`, keeping each sign with its term.
fn split_top_level(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0i32;
    let mut prev: Option<char> = None;
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        let after_operator = matches!(prev, None | Some('*' | '/' | '^' | '(' | '+' | '-'));
        if depth == 0 && (ch == '+' || ch == '-') && !after_operator && !cur.trim().is_empty() {
            out.push(cur.trim().to_string());
            cur.clear();
        }
        if !ch.is_whitespace() {
            prev = Some(ch);
        }
        cur.push(ch);
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

/// Splits `A ^ B` at its single top-level `^`.
fn split_wedge(term: &str) -> Result<Option<(String, String)>, LieError> {
    let mut depth = 0i32;
    let mut at = Vec::new();
    for (i, ch) in term.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '^' if depth == 0 => at.push(i),
            _ => {}
        }
    }
    match at.as_slice() {
        [] => Ok(None),
        [i] => Ok(Some((term[..*i].to_string(), term[i + 1..].to_string()))),
        _ => Err(LieError::Syntax(format!("`{}` has more than one wedge", term))),
    }
}

/// Coefficients of a linear combination of `labels` given as a formula.
pub(crate) fn linear_combination(text: &str, labels: &[String]) -> Result<Vec<Q3>, LieError> {
    let e = parse(text).map_err(|e| LieError::Syntax(format!("`{}`: {}", text, e)))?;
    linear_coefficients(&e, labels).ok_or_else(|| LieError::NotLinear(text.trim().to_string()))
}

fn linear_coefficients(e: &Expr, labels: &[String]) -> Option<Vec<Q3>> {
    if e.symbols().iter().any(|s| !labels.iter().any(|l| **l == **s)) {
        return None;
    }
    let mut d = Differentiator::new();
    let coefs: Vec<Q3> = labels.iter().map(|l| Q3::from_expr(&d.diff(e, l))).collect::<Option<_>>()?;
    let at_origin: HashMap<_, _> = e.symbols().into_iter().map(|s| (s, Expr::zero())).collect();
    Q3::from_expr(&e.substitute(&at_origin))?.is_zero().then_some(coefs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn splitting_terms() {
        assert_eq!(split_top_level("a^b - 2/3*c^(d - e) + f^g"), vec!["a^b", "- 2/3*c^(d - e)", "+ f^g"]);
        assert_eq!(split_top_level("-a^b"), vec!["-a^b"]);
    }

    #[test]
    fn linear_combinations() {
        let l = labels(&["a", "b"]);
        assert_eq!(linear_combination("2*a - b/sqrt(3)", &l).unwrap(), vec![Q3::int(2), -&(&Q3::one() / &Q3::sqrt3())]);
        assert!(linear_combination("a*b", &l).is_err());
        assert!(linear_combination("a + 1", &l).is_err());
        assert!(linear_combination("c", &l).is_err());
    }

    #[test]
    fn sign_convention() {
        // dθ¹ = Ω∧θ¹ gives c^{θ¹}_{Ω θ¹} = −1, i.e. [Ω, e₁] = −e₁.
        let t = StructureTable::from_system(&["O", "t1"], "dO = 0\ndt1 = O^t1").unwrap();
        assert_eq!(t.get(1, 0, 1), &Q3::int(-1));
        assert_eq!(t.get(1, 1, 0), &Q3::int(1));
        assert!(StructureTable::from_system(&["O", "t1"], "dO = 0").is_err());
        assert!(StructureTable::from_system(&["O", "t1"], "dO = 0\ndt1 = O*t1").is_err());
    }

    #[test]
    fn so3_killing_form_is_definite() {
        let t = StructureTable::from_system(&["a", "b", "c"], "da = -b^c\ndb = -c^a\ndc = -a^b").unwrap();
        assert_eq!(t.get(2, 0, 1), &Q3::one());
        assert!(t.jacobi_check().holds);
        assert!(t.d_squared_check().unwrap().is_empty());
        assert_eq!(t.killing_analysis().inertia.triple(), (0, 3, 0));
    }

    #[test]
    fn abelian_killing_form_vanishes() {
        let t = StructureTable::zero(labels(&["a", "b", "c"]));
        let k = t.killing_analysis();
        assert_eq!((k.rank, k.inertia.triple(), k.nondegenerate), (0, (0, 0, 3), false));
    }
}
