//! Truncated multivariate Taylor polynomials.

use std::collections::HashMap;
use std::sync::Arc;

use crate::expr::Scalar;

/// Monomial bookkeeping shared by all jets of a given size.
#[derive(Debug)]
pub struct JetLayout {
    pub nvars: usize,
    pub order: usize,
    /// Exponent vectors in graded order; jets of order k use a prefix.
    pub monomials: Vec<Vec<u8>>,
    prefix: Vec<usize>,
    mul_table: Vec<(u32, u32, u32)>,
    deriv: Vec<Vec<(u32, u32, u32)>>,
}

impl JetLayout {
    pub fn new(nvars: usize, order: usize) -> Arc<JetLayout> {
        let mut monomials: Vec<Vec<u8>> = vec![vec![0; nvars]];
        let mut prefix = vec![1];
        let mut last = vec![vec![0u8; nvars]];
        for _ in 1..=order {
            let mut next: Vec<Vec<u8>> = Vec::new();
            for m in &last {
                // Extend only at or after the last nonzero position to avoid repeats.
                let start = m.iter().rposition(|&e| e > 0).unwrap_or(0);
                for i in start..nvars {
                    let mut m2 = m.clone();
                    m2[i] += 1;
                    next.push(m2);
                }
            }
            monomials.extend(next.iter().cloned());
            prefix.push(monomials.len());
            last = next;
        }
        let index: HashMap<Vec<u8>, usize> = monomials.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let deg = |m: &Vec<u8>| m.iter().map(|&e| e as usize).sum::<usize>();
        let mut mul_table = Vec::new();
        for (a, ma) in monomials.iter().enumerate() {
            for (b, mb) in monomials.iter().enumerate() {
                if deg(ma) + deg(mb) > order {
                    continue;
                }
                let mc: Vec<u8> = ma.iter().zip(mb).map(|(x, y)| x + y).collect();
                mul_table.push((a as u32, b as u32, index[&mc] as u32));
            }
        }
        let mut deriv = vec![Vec::new(); nvars];
        for (t, m) in monomials.iter().enumerate() {
            if deg(m) + 1 > order {
                continue;
            }
            for (i, d) in deriv.iter_mut().enumerate() {
                let mut src = m.clone();
                src[i] += 1;
                d.push((t as u32, index[&src] as u32, src[i] as u32));
            }
        }
        Arc::new(JetLayout { nvars, order, monomials, prefix, mul_table, deriv })
    }

    pub fn len(&self, order: usize) -> usize {
        self.prefix[order]
    }

    pub fn index_of(&self, m: &[u8]) -> Option<usize> {
        self.monomials.iter().position(|x| x == m)
    }
}

#[derive(Clone, Debug)]
pub struct Jet<T> {
    layout: Arc<JetLayout>,
    order: usize,
    c: Vec<T>,
}

impl<T: Scalar> Jet<T> {
    pub fn from_coefficients(layout: Arc<JetLayout>, order: usize, c: Vec<T>) -> Jet<T> {
        assert_eq!(c.len(), layout.len(order));
        Jet { layout, order, c }
    }

    pub fn constant(layout: Arc<JetLayout>, order: usize, v: T) -> Jet<T> {
        let mut c = vec![T::zero(); layout.len(order)];
        c[0] = v;
        Jet { layout, order, c }
    }

    pub fn zero(layout: Arc<JetLayout>, order: usize) -> Jet<T> {
        Jet::constant(layout, order, T::zero())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> T {
        self.c[0]
    }

    pub fn coefficients(&self) -> &[T] {
        &self.c
    }

    pub fn truncate(&self, order: usize) -> Jet<T> {
        let order = order.min(self.order);
        Jet { layout: self.layout.clone(), order, c: self.c[..self.layout.len(order)].to_vec() }
    }

    pub fn add(&self, o: &Jet<T>) -> Jet<T> {
        let order = self.order.min(o.order);
        let n = self.layout.len(order);
        Jet { layout: self.layout.clone(), order, c: (0..n).map(|i| self.c[i] + o.c[i]).collect() }
    }

    pub fn sub(&self, o: &Jet<T>) -> Jet<T> {
        let order = self.order.min(o.order);
        let n = self.layout.len(order);
        Jet { layout: self.layout.clone(), order, c: (0..n).map(|i| self.c[i] - o.c[i]).collect() }
    }

    pub fn neg(&self) -> Jet<T> {
        Jet { layout: self.layout.clone(), order: self.order, c: self.c.iter().map(|&x| -x).collect() }
    }

    pub fn scale(&self, s: T) -> Jet<T> {
        Jet { layout: self.layout.clone(), order: self.order, c: self.c.iter().map(|&x| x * s).collect() }
    }

    pub fn mul(&self, o: &Jet<T>) -> Jet<T> {
        let order = self.order.min(o.order);
        let n = self.layout.len(order);
        if order == 0 {
            return Jet { layout: self.layout.clone(), order, c: vec![self.c[0] * o.c[0]] };
        }
        let mut c: Vec<Option<T>> = vec![None; n];
        for &(a, b, t) in &self.layout.mul_table {
            let t = t as usize;
            if t >= n {
                continue;
            }
            let p = self.c[a as usize] * o.c[b as usize];
            c[t] = Some(match c[t] {
                Some(acc) => acc + p,
                None => p,
            });
        }
        Jet { layout: self.layout.clone(), order, c: c.into_iter().map(|x| x.unwrap_or_else(T::zero)).collect() }
    }

    /// 1/self by the geometric series around the constant term.
    pub fn recip(&self) -> Jet<T> {
        let a0 = self.c[0];
        let r = T::one() / a0;
        if self.order == 0 {
            return Jet::constant(self.layout.clone(), 0, r);
        }
        let mut u = self.scale(r);
        u.c[0] = T::zero();
        let minus_u = u.neg();
        // 1/(1+u) = 1 - u + u^2 - ...
        let mut term = Jet::constant(self.layout.clone(), self.order, T::one());
        let mut acc = term.clone();
        for _ in 0..self.order {
            term = term.mul(&minus_u);
            acc = acc.add(&term);
        }
        acc.scale(r)
    }

    /// Partial derivative in variable `i`; the order drops by one.
    pub fn deriv(&self, i: usize) -> Jet<T> {
        assert!(self.order > 0, "cannot differentiate an order-0 jet");
        let order = self.order - 1;
        let n = self.layout.len(order);
        let mut c = vec![T::zero(); n];
        for &(t, s, f) in &self.layout.deriv[i] {
            let t = t as usize;
            if t < n {
                c[t] = self.c[s as usize] * T::from_f64(f as f64);
            }
        }
        Jet { layout: self.layout.clone(), order, c }
    }
}

/// Inverse of a square matrix of jets by Gauss-Jordan elimination with
/// partial pivoting on the constant terms.
pub fn invert<T: Scalar>(m: &[Vec<Jet<T>>]) -> Option<Vec<Vec<Jet<T>>>> {
    let n = m.len();
    let layout = m[0][0].layout.clone();
    let order = m.iter().flatten().map(Jet::order).min().unwrap();
    let mut a: Vec<Vec<Jet<T>>> = m.iter().map(|r| r.iter().map(|x| x.truncate(order)).collect()).collect();
    let mut inv: Vec<Vec<Jet<T>>> =
        (0..n).map(|i| (0..n).map(|j| Jet::constant(layout.clone(), order, if i == j { T::one() } else { T::zero() })).collect()).collect();
    let scale = m.iter().flatten().fold(0.0f64, |s, x| s.max(x.value().to_f64().abs()));
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].value().to_f64().abs().partial_cmp(&a[j][col].value().to_f64().abs()).unwrap())?;
        if a[piv][col].value().to_f64().abs() <= 1e-14 * scale {
            return None;
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let r = a[col][col].recip();
        for j in 0..n {
            a[col][j] = a[col][j].mul(&r);
            inv[col][j] = inv[col][j].mul(&r);
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = a[i][col].clone();
            if f.c.iter().all(|x| x.to_f64() == 0.0) {
                continue;
            }
            for j in 0..n {
                let t = f.mul(&a[col][j]);
                a[i][j] = a[i][j].sub(&t);
                let t = f.mul(&inv[col][j]);
                inv[i][j] = inv[i][j].sub(&t);
            }
        }
    }
    Some(rescale_inverse_magnitudes(m, inv, order))
}

/// Gauss-Jordan compounds tracked magnitudes at every pivot. Replace them by
/// the first-order sensitivity |A⁻¹| mag(A) |A⁻¹|, since δ(A⁻¹) = −A⁻¹ δA A⁻¹.
fn rescale_inverse_magnitudes<T: Scalar>(m: &[Vec<Jet<T>>], inv: Vec<Vec<Jet<T>>>, order: usize) -> Vec<Vec<Jet<T>>> {
    let n = m.len();
    let to = |x: &Jet<T>, f: &dyn Fn(T) -> f64| Jet {
        layout: x.layout.clone(),
        order,
        c: x.truncate(order).c.into_iter().map(f).collect::<Vec<f64>>(),
    };
    let abs_inv: Vec<Vec<Jet<f64>>> = inv.iter().map(|r| r.iter().map(|x| to(x, &|v| v.to_f64().abs())).collect()).collect();
    let mag: Vec<Vec<Jet<f64>>> = m.iter().map(|r| r.iter().map(|x| to(x, &|v| v.magnitude())).collect()).collect();
    let layout = m[0][0].layout.clone();
    let prod = |a: &Vec<Vec<Jet<f64>>>, b: &Vec<Vec<Jet<f64>>>| -> Vec<Vec<Jet<f64>>> {
        (0..n)
            .map(|i| (0..n).map(|j| (0..n).fold(Jet::zero(layout.clone(), order), |acc, k| acc.add(&a[i][k].mul(&b[k][j])))).collect())
            .collect()
    };
    let bound = prod(&prod(&abs_inv, &mag), &abs_inv);
    inv.into_iter()
        .zip(bound)
        .map(|(row, brow)| {
            row.into_iter()
                .zip(brow)
                .map(|(x, b)| {
                    let c = x.c.iter().zip(&b.c).map(|(v, m)| v.with_magnitude(m.max(v.to_f64().abs()))).collect();
                    Jet { layout: x.layout.clone(), order: x.order, c }
                })
                .collect()
        })
        .collect()
}
