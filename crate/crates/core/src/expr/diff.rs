use std::collections::HashMap;

use super::node::{symbol, Expr, Func, Node, Symbol};

/// Symbol families `prefix_k` whose derivative in `var` is `prefix_{k+1}`.
/// `w_k` is the k-th derivative of an arbitrary function of `t`; `Ups_k` the
/// k-th derivative of a conformal factor depending on `q`.
const CHAIN_FAMILIES: &[(&str, &str)] = &[("w", "t"), ("Ups", "q")];

/// Splits `w_3` into ("w", 3).
pub fn family_index(name: &str) -> Option<(&str, usize)> {
    let (prefix, idx) = name.rsplit_once('_')?;
    let k = idx.parse().ok()?;
    Some((prefix, k))
}

fn chain_successor(name: &str, var: &str) -> Option<Symbol> {
    let (prefix, k) = family_index(name)?;
    CHAIN_FAMILIES.iter().find(|(p, v)| *p == prefix && *v == var).map(|_| symbol(&format!("{}_{}", prefix, k + 1)))
}

/// Memoizing differentiator. Results are cached per (node, variable), so
/// repeated derivatives of a shared DAG stay shared.
#[derive(Default)]
pub struct Differentiator {
    cache: HashMap<(usize, Symbol), (Expr, Expr)>,
}

impl Differentiator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn diff(&mut self, e: &Expr, var: &str) -> Expr {
        let key = (e.ptr_id(), symbol(var));
        if let Some((_, d)) = self.cache.get(&key) {
            return d.clone();
        }
        let d = self.compute(e, var);
        self.cache.insert(key, (e.clone(), d.clone()));
        d
    }

    fn compute(&mut self, e: &Expr, var: &str) -> Expr {
        match e.node() {
            Node::Num(_) => Expr::zero(),
            Node::Sym(s) => {
                if &**s == var {
                    Expr::one()
                } else if let Some(next) = chain_successor(s, var) {
                    Expr::from_node(Node::Sym(next))
                } else {
                    Expr::zero()
                }
            }
            Node::Add(ts) => Expr::add(ts.iter().map(|t| self.diff(t, var)).collect()),
            Node::Mul(fs) => {
                let mut terms = Vec::new();
                for i in 0..fs.len() {
                    let di = self.diff(&fs[i], var);
                    if di.is_zero() {
                        continue;
                    }
                    let mut factors = fs.clone();
                    factors[i] = di;
                    terms.push(Expr::mul(factors));
                }
                Expr::add(terms)
            }
            Node::Pow(b, x) => {
                let db = self.diff(b, var);
                let dx = self.diff(x, var);
                if dx.is_zero() {
                    if db.is_zero() {
                        return Expr::zero();
                    }
                    let lowered = Expr::pow(b.clone(), Expr::add(vec![x.clone(), Expr::int(-1)]));
                    return Expr::mul(vec![x.clone(), lowered, db]);
                }
                // b^x (x' log b + x b'/b)
                let t1 = Expr::mul(vec![dx, b.log()]);
                let t2 = Expr::mul(vec![x.clone(), db, b.powi(-1)]);
                Expr::mul(vec![e.clone(), Expr::add(vec![t1, t2])])
            }
            Node::Func(f, a) => {
                let da = self.diff(a, var);
                if da.is_zero() {
                    return Expr::zero();
                }
                match f {
                    Func::Sqrt => Expr::mul(vec![Expr::rational(1, 2), da, e.powi(-1)]),
                    Func::Exp => Expr::mul(vec![e.clone(), da]),
                    Func::Log => Expr::mul(vec![da, a.powi(-1)]),
                }
            }
            Node::Int(body, v) => {
                if &**v == var {
                    body.clone()
                } else {
                    let db = self.diff(body, var);
                    if db.is_zero() {
                        Expr::zero()
                    } else {
                        Expr::from_node(Node::Int(db, v.clone()))
                    }
                }
            }
        }
    }
}

impl Expr {
    /// Exact symbolic derivative in `var`.
    pub fn diff(&self, var: &str) -> Expr {
        Differentiator::new().diff(self, var)
    }

    /// Repeated derivative, `n` times in `var`.
    pub fn diff_n(&self, var: &str, n: usize) -> Expr {
        let mut d = Differentiator::new();
        let mut e = self.clone();
        for _ in 0..n {
            e = d.diff(&e, var);
        }
        e
    }

    /// Derivative along a sequence of variables, applied left to right.
    pub fn diff_seq(&self, vars: &[&str]) -> Expr {
        let mut d = Differentiator::new();
        vars.iter().fold(self.clone(), |e, v| d.diff(&e, v))
    }
}
