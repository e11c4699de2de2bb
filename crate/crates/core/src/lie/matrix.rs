//! Matrix-valued connection forms read as Lie algebra bases.
//!
//! A flat connection ω = Σ X_i θ^i with dω + ω∧ω = 0 has
//! [X_i, X_j] = c^k_ij X_k for the constants of its coframe.

use std::collections::BTreeMap;

use serde::Serialize;

use super::field::Q3;
use super::linalg::{commutator, inertia, mat_mul, nullspace, rank, solve_in_span, transpose, Inertia, Matrix};
use super::table::{linear_combination, StructureTable};
use super::LieError;

#[derive(Debug, Clone)]
pub struct MatrixBasis {
    labels: Vec<String>,
    size: usize,
    mats: Vec<Matrix>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosureReport {
    pub closed: bool,
    /// First pair whose commutator leaves the span.
    pub escape: Option<[String; 2]>,
    #[serde(skip)]
    pub table: Option<StructureTable>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BilinearFormReport {
    /// Dimension of the space of invariant symmetric forms.
    pub dimension: usize,
    pub basis_inertia: Vec<Inertia>,
    /// Inertia of Σ (k+1) B_k over the basis.
    pub generic_inertia: Option<Inertia>,
    #[serde(skip)]
    pub basis: Vec<Matrix>,
}

impl BilinearFormReport {
    /// Some invariant form (a basis element or the generic combination)
    /// has the given unsigned signature.
    pub fn contains_signature(&self, p: usize, q: usize) -> bool {
        self.basis_inertia.iter().chain(self.generic_inertia.iter()).any(|i| i.zero == 0 && i.unsigned() == (p.max(q), p.min(q)))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ThreeFormReport {
    pub dimension: usize,
    /// Inertia of B_φ(u,v) = ι_uφ∧ι_vφ∧φ for the first basis form.
    pub induced_inertia: Option<Inertia>,
    /// Induced form nondegenerate, i.e. φ lies in an open orbit.
    pub generic: bool,
    /// B_φ is a multiple of the invariant bilinear form, when that is unique.
    pub proportional_to_invariant_form: Option<bool>,
    #[serde(skip)]
    pub basis: Vec<BTreeMap<[usize; 3], Q3>>,
}

impl MatrixBasis {
    pub fn new(labels: Vec<String>, mats: Vec<Matrix>) -> Result<MatrixBasis, LieError> {
        if labels.len() != mats.len() {
            return Err(LieError::Dimension { expected: labels.len(), found: mats.len() });
        }
        let size = mats.first().map_or(0, Vec::len);
        if mats.iter().any(|m| m.len() != size || m.iter().any(|r| r.len() != size)) {
            return Err(LieError::Syntax("generators must be square matrices of one size".into()));
        }
        Ok(MatrixBasis { labels, size, mats })
    }

    /// Reads the coefficient matrices X_i off a matrix of 1-forms whose
    /// entries are linear combinations of `labels`.
    pub fn from_connection(labels: &[&str], entries: &[&[&str]]) -> Result<MatrixBasis, LieError> {
        let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        let size = entries.len();
        let mut mats = vec![vec![vec![Q3::zero(); size]; size]; labels.len()];
        for (r, row) in entries.iter().enumerate() {
            if row.len() != size {
                return Err(LieError::Syntax(format!("row {} has {} entries, expected {}", r, row.len(), size)));
            }
            for (c, text) in row.iter().enumerate() {
                for (i, v) in linear_combination(text, &labels)?.into_iter().enumerate() {
                    mats[i][r][c] = v;
                }
            }
        }
        MatrixBasis::new(labels, mats)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.mats.len()
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn matrix(&self, i: usize) -> &Matrix {
        &self.mats[i]
    }

    fn flat(m: &Matrix) -> Vec<Q3> {
        m.iter().flatten().cloned().collect()
    }

    pub fn is_independent(&self) -> bool {
        let rows: Matrix = self.mats.iter().map(MatrixBasis::flat).collect();
        rank(&rows) == self.dim()
    }

    /// Expresses each commutator in the basis; the induced constants form a table.
    pub fn commutator_closure_check(&self) -> ClosureReport {
        let vecs: Vec<Vec<Q3>> = self.mats.iter().map(MatrixBasis::flat).collect();
        let n = self.dim();
        let mut t = StructureTable::zero(self.labels.clone());
        for i in 0..n {
            for j in i + 1..n {
                let br = MatrixBasis::flat(&commutator(&self.mats[i], &self.mats[j]));
                match solve_in_span(&vecs, &br) {
                    Some(c) => {
                        for (k, v) in c.into_iter().enumerate() {
                            t.set(k, i, j, v);
                        }
                    }
                    None => {
                        return ClosureReport {
                            closed: false,
                            escape: Some([self.labels[i].clone(), self.labels[j].clone()]),
                            table: None,
                        };
                    }
                }
            }
        }
        ClosureReport { closed: true, escape: None, table: Some(t) }
    }

    /// Symmetric B with XᵀB + BX = 0 for every generator X.
    pub fn invariant_bilinear_form(&self) -> BilinearFormReport {
        let n = self.size;
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a..n).map(move |b| (a, b))).collect();
        let slot = |a: usize, b: usize| pairs.iter().position(|&p| p == (a.min(b), a.max(b))).unwrap();
        let mut rows = Vec::new();
        for x in &self.mats {
            for &(r, s) in &pairs {
                // Σ_t X_tr B_ts + B_rt X_ts.
                let mut row = vec![Q3::zero(); pairs.len()];
                for t in 0..n {
                    if !x[t][r].is_zero() {
                        let k = slot(t, s);
                        row[k] = &row[k] + &x[t][r];
                    }
                    if !x[t][s].is_zero() {
                        let k = slot(r, t);
                        row[k] = &row[k] + &x[t][s];
                    }
                }
                rows.push(row);
            }
        }
        let basis: Vec<Matrix> = nullspace(&rows, pairs.len())
            .into_iter()
            .map(|v| {
                let mut b = vec![vec![Q3::zero(); n]; n];
                for (k, &(i, j)) in pairs.iter().enumerate() {
                    b[i][j] = v[k].clone();
                    b[j][i] = v[k].clone();
                }
                b
            })
            .collect();
        let basis_inertia = basis.iter().map(inertia).collect();
        let generic_inertia = (!basis.is_empty()).then(|| {
            let mut g = vec![vec![Q3::zero(); n]; n];
            for (w, b) in basis.iter().enumerate() {
                let w = Q3::int(w as i64 + 1);
                for i in 0..n {
                    for j in 0..n {
                        g[i][j] = &g[i][j] + &(&w * &b[i][j]);
                    }
                }
            }
            inertia(&g)
        });
        BilinearFormReport { dimension: basis.len(), basis_inertia, generic_inertia, basis }
    }

    /// Alternating φ with φ(Xu,v,w) + φ(u,Xv,w) + φ(u,v,Xw) = 0 for every generator X.
    pub fn invariant_three_form(&self) -> ThreeFormReport {
        let n = self.size;
        let triples: Vec<[usize; 3]> = (0..n).flat_map(|a| (a + 1..n).flat_map(move |b| (b + 1..n).map(move |c| [a, b, c]))).collect();
        let slot = |mut t: [usize; 3]| -> Option<(usize, bool)> {
            let odd = sort3(&mut t)?;
            Some((triples.iter().position(|&x| x == t).unwrap(), odd))
        };
        let mut rows = Vec::new();
        for x in &self.mats {
            for &[u, v, w] in &triples {
                let mut row = vec![Q3::zero(); triples.len()];
                for d in 0..n {
                    for (coef, t) in [(&x[d][u], [d, v, w]), (&x[d][v], [u, d, w]), (&x[d][w], [u, v, d])] {
                        if coef.is_zero() {
                            continue;
                        }
                        if let Some((k, odd)) = slot(t) {
                            row[k] = if odd { &row[k] - coef } else { &row[k] + coef };
                        }
                    }
                }
                rows.push(row);
            }
        }
        let basis: Vec<BTreeMap<[usize; 3], Q3>> = nullspace(&rows, triples.len())
            .into_iter()
            .map(|v| triples.iter().cloned().zip(v).filter(|(_, c)| !c.is_zero()).collect())
            .collect();
        let induced = basis.first().filter(|_| n == 7).map(induced_bilinear_form);
        let induced_inertia = induced.as_ref().map(inertia);
        let generic = induced_inertia.is_some_and(|i| i.zero == 0);
        let proportional_to_invariant_form = induced.as_ref().and_then(|bphi| {
            let inv = self.invariant_bilinear_form();
            (inv.dimension == 1).then(|| proportional(bphi, &inv.basis[0]))
        });
        ThreeFormReport { dimension: basis.len(), induced_inertia, generic, proportional_to_invariant_form, basis }
    }

    /// ad-invariance check of a bilinear form on the representation space.
    pub fn preserves(&self, b: &Matrix) -> bool {
        self.mats.iter().all(|x| {
            let l = mat_mul(&transpose(x), b);
            let r = mat_mul(b, x);
            l.iter().zip(&r).all(|(p, q)| p.iter().zip(q).all(|(a, c)| (a + c).is_zero()))
        })
    }
}

/// Sorts three indices; None on a repeat, else whether the permutation is odd.
fn sort3(t: &mut [usize; 3]) -> Option<bool> {
    let mut odd = false;
    for i in 0..3 {
        for j in 0..2 - i {
            if t[j] > t[j + 1] {
                t.swap(j, j + 1);
                odd = !odd;
            }
        }
    }
    (t[0] != t[1] && t[1] != t[2]).then_some(odd)
}

type Form = BTreeMap<Vec<usize>, Q3>;

fn wedge(a: &Form, b: &Form) -> Form {
    let mut out = Form::new();
    for (ia, ca) in a {
        for (ib, cb) in b {
            if ia.iter().any(|x| ib.contains(x)) {
                continue;
            }
            let mut idx: Vec<usize> = ia.iter().chain(ib).cloned().collect();
            let mut odd = false;
            for i in 0..idx.len() {
                for j in 0..idx.len() - 1 - i {
                    if idx[j] > idx[j + 1] {
                        idx.swap(j, j + 1);
                        odd = !odd;
                    }
                }
            }
            let v = ca * cb;
            let e = out.entry(idx).or_insert_with(Q3::zero);
            *e = if odd { &*e - &v } else { &*e + &v };
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// B_φ(e_u, e_v) = coefficient of the volume form in ι_uφ ∧ ι_vφ ∧ φ.
fn induced_bilinear_form(phi: &BTreeMap<[usize; 3], Q3>) -> Matrix {
    let n = 7;
    let full: Form = phi.iter().map(|(k, v)| (k.to_vec(), v.clone())).collect();
    let contract = |u: usize| -> Form {
        let mut out = Form::new();
        for (k, v) in phi {
            if let Some(pos) = k.iter().position(|&x| x == u) {
                let rest: Vec<usize> = k.iter().cloned().filter(|&x| x != u).collect();
                let v = if pos == 1 { -v } else { v.clone() };
                out.insert(rest, v);
            }
        }
        out
    };
    let iphi: Vec<Form> = (0..n).map(contract).collect();
    let vol: Vec<usize> = (0..n).collect();
    let mut b = vec![vec![Q3::zero(); n]; n];
    for u in 0..n {
        for v in u..n {
            let w = wedge(&wedge(&iphi[u], &iphi[v]), &full);
            let c = w.get(&vol).cloned().unwrap_or_else(Q3::zero);
            b[v][u] = c.clone();
            b[u][v] = c;
        }
    }
    b
}

fn proportional(a: &Matrix, b: &Matrix) -> bool {
    let flat_a: Vec<&Q3> = a.iter().flatten().collect();
    let flat_b: Vec<&Q3> = b.iter().flatten().collect();
    let Some(k) = flat_b.iter().position(|x| !x.is_zero()) else { return false };
    let lambda = flat_a[k] / flat_b[k];
    !lambda.is_zero() && flat_a.iter().zip(&flat_b).all(|(x, y)| (*x - &(&lambda * y)).is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rotations() -> MatrixBasis {
        MatrixBasis::from_connection(&["a", "b", "c"], &[&["0", "-c", "b"], &["c", "0", "-a"], &["-b", "a", "0"]]).unwrap()
    }

    #[test]
    fn rotations_close_and_preserve_the_identity() {
        let r = rotations();
        assert!(r.is_independent());
        let cl = r.commutator_closure_check();
        assert!(cl.closed);
        let t = cl.table.unwrap();
        // [L_a, L_b] = L_c.
        assert_eq!(t.get(2, 0, 1), &Q3::one());
        let inv = r.invariant_bilinear_form();
        assert_eq!(inv.dimension, 1);
        assert!(proportional(&inv.basis[0], &super::super::linalg::identity(3)));
        assert!(r.preserves(&inv.basis[0]));
    }

    #[test]
    fn non_closing_span_reports_the_pair() {
        let m = MatrixBasis::from_connection(&["a", "b"], &[&["0", "a"], &["b", "0"]]).unwrap();
        let cl = m.commutator_closure_check();
        assert!(!cl.closed);
        assert_eq!(cl.escape.unwrap(), ["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn permutation_parity() {
        let mut t = [2, 0, 1];
        assert_eq!(sort3(&mut t), Some(false));
        let mut t = [1, 0, 2];
        assert_eq!(sort3(&mut t), Some(true));
        assert_eq!(sort3(&mut [1, 1, 2]), None);
    }
}
