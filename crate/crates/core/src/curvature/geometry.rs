//! Curvature algebra on metric jets at a single point.
//!
//! Conventions:
//! R^a_bcd = ∂_c Γ^a_db − ∂_d Γ^a_cb + Γ^a_ce Γ^e_db − Γ^a_de Γ^e_cb,
//! R_bd = R^a_bad, R = g^bd R_bd,
//! P_ij = (R_ij − R g_ij / (2(n−1))) / (n−2),
//! C_abcd = R_abcd − (g_ac P_bd − g_ad P_bc + g_bd P_ac − g_bc P_ad),
//! Cotton C_ijk = ∇_k P_ij − ∇_j P_ik.

use std::sync::Arc;

use crate::expr::{EvalError, Scalar};

use super::jet::{invert, Jet, JetLayout};

pub(crate) struct Geometry<T> {
    pub n: usize,
    pub order: usize,
    pub layout: Arc<JetLayout>,
    /// g_ij, row-major, order `order`.
    pub g: Vec<Jet<T>>,
    pub ginv: Vec<Jet<T>>,
    /// Γ^k_ij at index (k n + i) n + j, order `order - 1`.
    pub gamma: Vec<Jet<T>>,
}

fn idx2(n: usize, i: usize, j: usize) -> usize {
    i * n + j
}

fn idx3(n: usize, i: usize, j: usize, k: usize) -> usize {
    (i * n + j) * n + k
}

fn idx4(n: usize, a: usize, b: usize, c: usize, d: usize) -> usize {
    ((a * n + b) * n + c) * n + d
}

impl<T: Scalar> Geometry<T> {
    /// Builds the Levi-Civita connection of `g`, shifted by the Weyl term
    /// ½(δ^k_i ν_j + δ^k_j ν_i − g_ij ν^k) when a 1-form `nu` is given.
    pub fn new(layout: Arc<JetLayout>, n: usize, g: Vec<Jet<T>>, nu: Option<Vec<Jet<T>>>) -> Result<Self, EvalError> {
        let order = g.iter().map(Jet::order).min().unwrap();
        assert!(order >= 1, "connection needs first derivatives");
        let rows: Vec<Vec<Jet<T>>> = (0..n).map(|i| g[i * n..(i + 1) * n].to_vec()).collect();
        let inv = invert(&rows).ok_or_else(|| EvalError::Singular("metric is degenerate at the point".into()))?;
        let ginv: Vec<Jet<T>> = inv.into_iter().flatten().collect();
        let o1 = order - 1;
        // dg[l][i][j] = ∂_l g_ij
        let mut dg = Vec::with_capacity(n * n * n);
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    dg.push(g[idx2(n, i, j)].deriv(l));
                }
            }
        }
        let half = T::from_f64(0.5);
        // Γ_lij = ½(∂_i g_lj + ∂_j g_li − ∂_l g_ij)
        let mut lower = Vec::with_capacity(n * n * n);
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let s = dg[idx3(n, i, l, j)].add(&dg[idx3(n, j, l, i)]).sub(&dg[idx3(n, l, i, j)]);
                    lower.push(s.scale(half));
                }
            }
        }
        let mut gamma = Vec::with_capacity(n * n * n);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut acc = Jet::zero(layout.clone(), o1);
                    for l in 0..n {
                        acc = acc.add(&ginv[idx2(n, k, l)].mul(&lower[idx3(n, l, i, j)]));
                    }
                    gamma.push(acc);
                }
            }
        }
        if let Some(nu) = nu {
            let nu_up: Vec<Jet<T>> = (0..n)
                .map(|k| {
                    let mut acc = Jet::zero(layout.clone(), o1);
                    for l in 0..n {
                        acc = acc.add(&ginv[idx2(n, k, l)].mul(&nu[l]));
                    }
                    acc
                })
                .collect();
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let mut w = g[idx2(n, i, j)].mul(&nu_up[k]).neg();
                        if k == i {
                            w = w.add(&nu[j]);
                        }
                        if k == j {
                            w = w.add(&nu[i]);
                        }
                        let t = idx3(n, k, i, j);
                        gamma[t] = gamma[t].add(&w.scale(half));
                    }
                }
            }
        }
        Ok(Geometry { n, order, layout, g, ginv, gamma })
    }

    fn zero(&self, order: usize) -> Jet<T> {
        Jet::zero(self.layout.clone(), order)
    }

    pub fn christoffel(&self) -> Vec<Jet<T>> {
        self.gamma.clone()
    }

    /// ∇_k g_ij, index (k n + i) n + j.
    pub fn metric_compatibility(&self) -> Vec<Jet<T>> {
        let n = self.n;
        let mut out = Vec::with_capacity(n * n * n);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut acc = self.g[idx2(n, i, j)].deriv(k);
                    for l in 0..n {
                        acc = acc.sub(&self.gamma[idx3(n, l, k, i)].mul(&self.g[idx2(n, l, j)]));
                        acc = acc.sub(&self.gamma[idx3(n, l, k, j)].mul(&self.g[idx2(n, i, l)]));
                    }
                    out.push(acc);
                }
            }
        }
        out
    }

    /// R^a_bcd, order `order - 2`.
    pub fn riemann(&self) -> Vec<Jet<T>> {
        let n = self.n;
        let o2 = self.order - 2;
        let gt: Vec<Jet<T>> = self.gamma.iter().map(|x| x.truncate(o2)).collect();
        let dgam: Vec<Vec<Jet<T>>> = self.gamma.iter().map(|x| (0..n).map(|c| x.deriv(c)).collect()).collect();
        let mut out = Vec::with_capacity(n.pow(4));
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let mut acc = dgam[idx3(n, a, d, b)][c].sub(&dgam[idx3(n, a, c, b)][d]);
                        for e in 0..n {
                            acc = acc.add(&gt[idx3(n, a, c, e)].mul(&gt[idx3(n, e, d, b)]));
                            acc = acc.sub(&gt[idx3(n, a, d, e)].mul(&gt[idx3(n, e, c, b)]));
                        }
                        out.push(acc);
                    }
                }
            }
        }
        out
    }

    /// R_bd = R^a_bad.
    pub fn ricci(&self, riem: &[Jet<T>]) -> Vec<Jet<T>> {
        let n = self.n;
        let o = riem[0].order();
        let mut out = Vec::with_capacity(n * n);
        for b in 0..n {
            for d in 0..n {
                let mut acc = self.zero(o);
                for a in 0..n {
                    acc = acc.add(&riem[idx4(n, a, b, a, d)]);
                }
                out.push(acc);
            }
        }
        out
    }

    /// Full trace g^ij T_ij.
    pub fn trace(&self, t: &[Jet<T>]) -> Jet<T> {
        let n = self.n;
        let mut acc = self.zero(t[0].order());
        for i in 0..n {
            for j in 0..n {
                acc = acc.add(&self.ginv[idx2(n, i, j)].mul(&t[idx2(n, i, j)]));
            }
        }
        acc
    }

    /// R_ij − (R/n) g_ij with R_ij symmetrized.
    pub fn trace_free_ricci(&self, ric: &[Jet<T>]) -> Vec<Jet<T>> {
        let n = self.n;
        let half = T::from_f64(0.5);
        let sym: Vec<Jet<T>> = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                ric[idx2(n, i, j)].add(&ric[idx2(n, j, i)]).scale(half)
            })
            .collect();
        let r = self.trace(&sym).scale(T::one() / T::from_f64(n as f64));
        (0..n * n).map(|k| sym[k].sub(&self.g[k].mul(&r))).collect()
    }

    /// R_abcd = g_ae R^e_bcd.
    pub fn lower_first(&self, t: &[Jet<T>]) -> Vec<Jet<T>> {
        let n = self.n;
        let block = t.len() / n;
        let o = t[0].order();
        let mut out = Vec::with_capacity(t.len());
        for a in 0..n {
            for rest in 0..block {
                let mut acc = self.zero(o);
                for e in 0..n {
                    acc = acc.add(&self.g[idx2(n, a, e)].mul(&t[e * block + rest]));
                }
                out.push(acc);
            }
        }
        out
    }

    pub fn schouten(&self, ric: &[Jet<T>]) -> Vec<Jet<T>> {
        let n = self.n;
        let r = self.trace(ric);
        let c = T::one() / T::from_f64(2.0 * (n as f64 - 1.0));
        let k = T::one() / T::from_f64(n as f64 - 2.0);
        (0..n * n).map(|i| ric[i].sub(&self.g[i].mul(&r.scale(c))).scale(k)).collect()
    }

    /// C_abcd from R^a_bcd.
    pub fn weyl(&self, riem: &[Jet<T>]) -> Vec<Jet<T>> {
        let n = self.n;
        let ric = self.ricci(riem);
        let p = self.schouten(&ric);
        let rl = self.lower_first(riem);
        let g = |i, j| &self.g[idx2(n, i, j)];
        let pp = |i, j| &p[idx2(n, i, j)];
        let mut out = Vec::with_capacity(n.pow(4));
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let k = g(a, c).mul(pp(b, d)).sub(&g(a, d).mul(pp(b, c))).add(&g(b, d).mul(pp(a, c))).sub(&g(b, c).mul(pp(a, d)));
                        out.push(rl[idx4(n, a, b, c, d)].sub(&k));
                    }
                }
            }
        }
        out
    }

    /// Raises every index of an all-lower tensor of rank `rank`.
    pub fn raise_all(&self, t: &[Jet<T>], rank: usize) -> Vec<Jet<T>> {
        let n = self.n;
        let mut cur = t.to_vec();
        for slot in 0..rank {
            let stride = n.pow((rank - 1 - slot) as u32);
            let mut next = Vec::with_capacity(cur.len());
            for flat in 0..cur.len() {
                let a = (flat / stride) % n;
                let base = flat - a * stride;
                let mut acc = self.zero(cur[0].order());
                for e in 0..n {
                    acc = acc.add(&self.ginv[idx2(n, a, e)].mul(&cur[base + e * stride]));
                }
                next.push(acc);
            }
            cur = next;
        }
        cur
    }

    pub fn full_contraction(&self, lower: &[Jet<T>], rank: usize) -> Jet<T> {
        let upper = self.raise_all(lower, rank);
        let mut acc = self.zero(lower[0].order());
        for (a, b) in upper.iter().zip(lower) {
            acc = acc.add(&a.mul(b));
        }
        acc
    }

    /// The three independent single traces of an all-lower rank-4 tensor:
    /// g^ac T_abcd, g^ab T_abcd, g^ad T_abcd, concatenated.
    pub fn rank4_traces(&self, t: &[Jet<T>]) -> Vec<Jet<T>> {
        let n = self.n;
        let o = t[0].order();
        let mut out = Vec::new();
        for pair in [(0usize, 2usize), (0, 1), (0, 3)] {
            for u in 0..n {
                for v in 0..n {
                    let mut acc = self.zero(o);
                    for i in 0..n {
                        for j in 0..n {
                            let mut ix = [0usize; 4];
                            ix[pair.0] = i;
                            ix[pair.1] = j;
                            let free: Vec<usize> = (0..4).filter(|s| *s != pair.0 && *s != pair.1).collect();
                            ix[free[0]] = u;
                            ix[free[1]] = v;
                            acc = acc.add(&self.ginv[idx2(n, i, j)].mul(&t[idx4(n, ix[0], ix[1], ix[2], ix[3])]));
                        }
                    }
                    out.push(acc);
                }
            }
        }
        out
    }

    /// R^a_bcd + R^a_cdb + R^a_dbc.
    pub fn bianchi(&self, riem: &[Jet<T>]) -> Vec<Jet<T>> {
        let n = self.n;
        let mut out = Vec::with_capacity(n.pow(4));
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        out.push(riem[idx4(n, a, b, c, d)].add(&riem[idx4(n, a, c, d, b)]).add(&riem[idx4(n, a, d, b, c)]));
                    }
                }
            }
        }
        out
    }

    /// C_ijk = ∇_k P_ij − ∇_j P_ik; needs jets of order 3.
    pub fn cotton(&self) -> Vec<Jet<T>> {
        let n = self.n;
        let riem = self.riemann();
        let ric = self.ricci(&riem);
        let p = self.schouten(&ric);
        let o = p[0].order() - 1;
        let gt: Vec<Jet<T>> = self.gamma.iter().map(|x| x.truncate(o)).collect();
        let pt: Vec<Jet<T>> = p.iter().map(|x| x.truncate(o)).collect();
        // dp[k][i][j] = ∇_k P_ij
        let mut dp = Vec::with_capacity(n * n * n);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut acc = p[idx2(n, i, j)].deriv(k);
                    for l in 0..n {
                        acc = acc.sub(&gt[idx3(n, l, k, i)].mul(&pt[idx2(n, l, j)]));
                        acc = acc.sub(&gt[idx3(n, l, k, j)].mul(&pt[idx2(n, i, l)]));
                    }
                    dp.push(acc);
                }
            }
        }
        let mut out = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    out.push(dp[idx3(n, k, i, j)].sub(&dp[idx3(n, j, i, k)]));
                }
            }
        }
        out
    }
}
