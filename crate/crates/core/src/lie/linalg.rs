//! Exact linear algebra over ℚ(√3).

use std::cmp::Ordering;

use serde::Serialize;

use super::field::Q3;

pub type Matrix = Vec<Vec<Q3>>;

pub fn zeros(rows: usize, cols: usize) -> Matrix {
    vec![vec![Q3::zero(); cols]; rows]
}

pub fn identity(n: usize) -> Matrix {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Q3::one();
    }
    m
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let (n, k, m) = (a.len(), b.len(), b.first().map_or(0, Vec::len));
    let mut out = zeros(n, m);
    for i in 0..n {
        for l in 0..k {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..m {
                if !b[l][j].is_zero() {
                    out[i][j] = &out[i][j] + &(&a[i][l] * &b[l][j]);
                }
            }
        }
    }
    out
}

pub fn mat_sub(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x - y).collect()).collect()
}

pub fn transpose(a: &Matrix) -> Matrix {
    let m = a.first().map_or(0, Vec::len);
    (0..m).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn commutator(a: &Matrix, b: &Matrix) -> Matrix {
    mat_sub(&mat_mul(a, b), &mat_mul(b, a))
}

/// Reduces `rows` in place to reduced row echelon form; returns pivot columns.
pub fn rref(rows: &mut Matrix) -> Vec<usize> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut() {
            if !x.is_zero() {
                *x = &*x * &inv;
            }
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                if !y.is_zero() {
                    *x = &*x - &(&f * y);
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    pivots
}

pub fn rank(rows: &Matrix) -> usize {
    let mut m = rows.clone();
    rref(&mut m).len()
}

/// Basis of {v : A v = 0} for `a` with `ncols` columns.
pub fn nullspace(a: &Matrix, ncols: usize) -> Vec<Vec<Q3>> {
    let mut m: Matrix = a.iter().filter(|r| r.iter().any(|x| !x.is_zero())).cloned().collect();
    let pivots = if m.is_empty() { Vec::new() } else { rref(&mut m) };
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q3::zero(); ncols];
            v[f] = Q3::one();
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = -&m[row][f];
            }
            v
        })
        .collect()
}

/// Coefficients expressing `target` in the span of `vectors`, if it lies there.
pub fn solve_in_span(vectors: &[Vec<Q3>], target: &[Q3]) -> Option<Vec<Q3>> {
    let n = vectors.len();
    let mut m: Matrix =
        (0..target.len()).map(|i| vectors.iter().map(|v| v[i].clone()).chain(std::iter::once(target[i].clone())).collect()).collect();
    let pivots = rref(&mut m);
    if pivots.contains(&n) {
        return None;
    }
    let mut x = vec![Q3::zero(); n];
    for (row, &p) in pivots.iter().enumerate() {
        x[p] = m[row][n].clone();
    }
    Some(x)
}

/// Counts of positive, negative and zero eigenvalues of a real symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl Inertia {
    pub fn triple(self) -> (usize, usize, usize) {
        (self.positive, self.negative, self.zero)
    }

    /// Positive and negative counts with the larger first.
    pub fn unsigned(self) -> (usize, usize) {
        (self.positive.max(self.negative), self.positive.min(self.negative))
    }
}

/// Exact inertia by congruence diagonalization (Sylvester's law).
pub fn inertia(sym: &Matrix) -> Inertia {
    let n = sym.len();
    let mut m = sym.clone();
    let (mut pos, mut neg) = (0, 0);
    for k in 0..n {
        if (k..n).all(|i| m[i][i].is_zero()) {
            // Pair two basis vectors to create a nonzero diagonal entry.
            let pair = (k..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).find(|&(i, j)| !m[i][j].is_zero());
            let Some((i, j)) = pair else { break };
            for c in 0..n {
                let v = m[j][c].clone();
                m[i][c] = &m[i][c] + &v;
            }
            for r in 0..n {
                let v = m[r][j].clone();
                m[r][i] = &m[r][i] + &v;
            }
        }
        let p = (k..n).find(|&i| !m[i][i].is_zero()).expect("nonzero diagonal after pairing");
        m.swap(k, p);
        for row in m.iter_mut() {
            row.swap(k, p);
        }
        let d = m[k][k].clone();
        match d.signum() {
            Ordering::Greater => pos += 1,
            _ => neg += 1,
        }
        let inv = d.recip();
        for i in k + 1..n {
            if m[i][k].is_zero() {
                continue;
            }
            let f = &m[i][k] * &inv;
            for j in k..n {
                let v = &f * &m[k][j];
                m[i][j] = &m[i][j] - &v;
            }
        }
        for i in k + 1..n {
            m[k][i] = Q3::zero();
        }
        for i in k + 1..n {
            m[i][k] = Q3::zero();
        }
    }
    Inertia { positive: pos, negative: neg, zero: n - pos - neg }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> Matrix {
        rows.iter().map(|r| r.iter().map(|&x| Q3::int(x)).collect()).collect()
    }

    #[test]
    fn inertia_of_small_forms() {
        assert_eq!(inertia(&m(&[&[0, 1], &[1, 0]])).triple(), (1, 1, 0));
        assert_eq!(inertia(&m(&[&[1, 2], &[2, 1]])).triple(), (1, 1, 0));
        assert_eq!(inertia(&m(&[&[2, 1, 0], &[1, 2, 0], &[0, 0, 0]])).triple(), (2, 0, 1));
        assert_eq!(inertia(&m(&[&[0, 0], &[0, 0]])).triple(), (0, 0, 2));
        assert_eq!(inertia(&m(&[&[0, 1, 1], &[1, 0, 1], &[1, 1, 0]])).triple(), (1, 2, 0));
    }

    #[test]
    fn inertia_matches_eigenvalues_on_irrational_entries() {
        let s = Q3::sqrt3();
        let a = vec![vec![Q3::int(1), s.clone()], vec![s.clone(), Q3::int(2)]];
        // det = 2 − 3 < 0.
        assert_eq!(inertia(&a).triple(), (1, 1, 0));
    }

    #[test]
    fn nullspace_and_span() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6]]);
        let ns = nullspace(&a, 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            for row in &a {
                let s = row.iter().zip(v).fold(Q3::zero(), |acc, (x, y)| &acc + &(x * y));
                assert!(s.is_zero());
            }
        }
        let basis = vec![vec![Q3::int(1), Q3::int(0)], vec![Q3::int(1), Q3::int(1)]];
        assert_eq!(solve_in_span(&basis, &[Q3::int(3), Q3::int(2)]).unwrap(), vec![Q3::int(1), Q3::int(2)]);
        assert!(solve_in_span(&basis[..1], &[Q3::int(3), Q3::int(2)]).is_none());
    }
}
