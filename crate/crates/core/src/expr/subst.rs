use std::collections::HashMap;

use super::node::{Expr, Node, Symbol};

/// Simultaneous substitution `symbol -> expression`.
pub struct Substitution<'a> {
    bindings: &'a HashMap<Symbol, Expr>,
    cache: HashMap<usize, (Expr, Expr)>,
}

impl<'a> Substitution<'a> {
    pub fn new(bindings: &'a HashMap<Symbol, Expr>) -> Self {
        Substitution { bindings, cache: HashMap::new() }
    }

    pub fn apply(&mut self, e: &Expr) -> Expr {
        if let Some((_, r)) = self.cache.get(&e.ptr_id()) {
            return r.clone();
        }
        let r = match e.node() {
            Node::Num(_) => e.clone(),
            Node::Sym(s) => self.bindings.get(s).cloned().unwrap_or_else(|| e.clone()),
            Node::Add(ts) => Expr::add(ts.iter().map(|t| self.apply(t)).collect()),
            Node::Mul(fs) => Expr::mul(fs.iter().map(|f| self.apply(f)).collect()),
            Node::Pow(b, x) => Expr::pow(self.apply(b), self.apply(x)),
            Node::Func(f, a) => Expr::func(*f, self.apply(a)),
            // The integration variable is bound inside the node.
            Node::Int(body, v) => {
                if self.bindings.contains_key(v) {
                    let mut inner = self.bindings.clone();
                    inner.remove(v);
                    let body = Substitution::new(&inner).apply(body);
                    Expr::from_node(Node::Int(body, v.clone()))
                } else {
                    Expr::from_node(Node::Int(self.apply(body), v.clone()))
                }
            }
        };
        self.cache.insert(e.ptr_id(), (e.clone(), r.clone()));
        r
    }
}

impl Expr {
    pub fn substitute(&self, bindings: &HashMap<Symbol, Expr>) -> Expr {
        Substitution::new(bindings).apply(self)
    }

    /// Convenience for a single binding.
    pub fn subs(&self, name: &str, value: &Expr) -> Expr {
        let mut m = HashMap::new();
        m.insert(super::node::symbol(name), value.clone());
        self.substitute(&m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, symbol};

    #[test]
    fn substitution_is_simultaneous() {
        let e = parse("x + 2*y").unwrap();
        let mut m = HashMap::new();
        m.insert(symbol("x"), Expr::sym("y"));
        m.insert(symbol("y"), Expr::sym("x"));
        assert_eq!(e.substitute(&m), parse("y + 2*x").unwrap());
    }

    #[test]
    fn substituting_zero_simplifies() {
        assert!(parse("q*p").unwrap().subs("q", &Expr::zero()).is_zero());
    }

    #[test]
    fn closes_polynomial_instance() {
        let e = parse("w_0 + w_1*w_3 - w_2*t").unwrap();
        let mut m = HashMap::new();
        m.insert(symbol("w_0"), parse("t^2").unwrap());
        m.insert(symbol("w_1"), parse("2*t").unwrap());
        m.insert(symbol("w_2"), Expr::int(2));
        m.insert(symbol("w_3"), Expr::zero());
        assert_eq!(e.substitute(&m), parse("t^2 - 2*t").unwrap());
    }
}
