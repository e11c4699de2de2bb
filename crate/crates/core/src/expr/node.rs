use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Interned-ish symbol name. Cheap to clone.
pub type Symbol = Arc<str>;

pub fn symbol(name: &str) -> Symbol {
    Arc::from(name)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Sqrt,
    Exp,
    Log,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "sqrt" => Some(Func::Sqrt),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Num(BigRational),
    Sym(Symbol),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Expr, Expr),
    Func(Func, Expr),
    /// Formal antiderivative of `body` in `var`.
    Int(Expr, Symbol),
}

struct Inner {
    node: Node,
    hash: u64,
}

/// Immutable, reference-counted expression tree.
///
/// Construction goes through the smart constructors below, which apply the
/// light normalization used everywhere: constant folding, 0/1 identities,
/// flattening of sums and products, and folding of integer powers.
#[derive(Clone)]
pub struct Expr(Arc<Inner>);

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.hash == other.0.hash && self.0.node == other.0.node)
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({})", self)
    }
}

fn node_hash(node: &Node) -> u64 {
    let mut h = DefaultHasher::new();
    match node {
        Node::Num(r) => {
            0u8.hash(&mut h);
            r.hash(&mut h);
        }
        Node::Sym(s) => {
            1u8.hash(&mut h);
            s.hash(&mut h);
        }
        Node::Add(ts) => {
            2u8.hash(&mut h);
            for t in ts {
                t.0.hash.hash(&mut h);
            }
        }
        Node::Mul(fs) => {
            3u8.hash(&mut h);
            for f in fs {
                f.0.hash.hash(&mut h);
            }
        }
        Node::Pow(b, e) => {
            4u8.hash(&mut h);
            b.0.hash.hash(&mut h);
            e.0.hash.hash(&mut h);
        }
        Node::Func(func, a) => {
            5u8.hash(&mut h);
            func.hash(&mut h);
            a.0.hash.hash(&mut h);
        }
        Node::Int(b, v) => {
            6u8.hash(&mut h);
            b.0.hash.hash(&mut h);
            v.hash(&mut h);
        }
    }
    h.finish()
}

impl Expr {
    /// Wraps a node without any normalization.
    pub fn from_node(node: Node) -> Expr {
        let hash = node_hash(&node);
        Expr(Arc::new(Inner { node, hash }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn structural_hash(&self) -> u64 {
        self.0.hash
    }

    /// Address of the shared node, used as a memo key.
    pub fn ptr_id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn num(r: BigRational) -> Expr {
        Expr::from_node(Node::Num(r))
    }

    pub fn int(n: i64) -> Expr {
        Expr::num(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn rational(n: i64, d: i64) -> Expr {
        Expr::num(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn sym(name: &str) -> Expr {
        Expr::from_node(Node::Sym(symbol(name)))
    }

    pub fn from_symbol(s: &Symbol) -> Expr {
        Expr::from_node(Node::Sym(s.clone()))
    }

    pub fn as_num(&self) -> Option<&BigRational> {
        match self.node() {
            Node::Num(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_symbol(&self) -> Option<&Symbol> {
        match self.node() {
            Node::Sym(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_num().is_some_and(|r| r.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.as_num().is_some_and(|r| r.is_one())
    }

    pub fn as_integer(&self) -> Option<i64> {
        self.as_num().filter(|r| r.is_integer()).and_then(|r| r.to_integer().to_i64())
    }

    pub fn add(terms: Vec<Expr>) -> Expr {
        let mut flat: Vec<Expr> = Vec::with_capacity(terms.len());
        let mut constant = BigRational::zero();
        for t in terms {
            match t.node() {
                Node::Num(r) => constant += r,
                Node::Add(inner) => {
                    for u in inner {
                        match u.node() {
                            Node::Num(r) => constant += r,
                            _ => flat.push(u.clone()),
                        }
                    }
                }
                _ => flat.push(t),
            }
        }
        let mut flat = collect_like_terms(flat);
        flat.sort_by(canonical_order);
        if !constant.is_zero() {
            flat.push(Expr::num(constant));
        }
        match flat.len() {
            0 => Expr::zero(),
            1 => flat.pop().unwrap(),
            _ => Expr::from_node(Node::Add(flat)),
        }
    }

    pub fn mul(factors: Vec<Expr>) -> Expr {
        let mut flat = Vec::with_capacity(factors.len());
        let mut constant = BigRational::one();
        for f in factors {
            match f.node() {
                Node::Num(r) => constant *= r,
                Node::Mul(inner) => {
                    for u in inner {
                        match u.node() {
                            Node::Num(r) => constant *= r,
                            _ => flat.push(u.clone()),
                        }
                    }
                }
                _ => flat.push(f),
            }
        }
        if constant.is_zero() {
            return Expr::zero();
        }
        let (mut flat, extra) = collect_like_factors(flat);
        flat.sort_by(canonical_order);
        constant *= extra;
        if flat.is_empty() {
            return Expr::num(constant);
        }
        if flat.len() == 1 {
            let f = flat.pop().unwrap();
            if constant.is_one() {
                return f;
            }
            // A numeric multiple of a sum is distributed.
            if let Node::Add(ts) = f.node() {
                let c = Expr::num(constant);
                return Expr::add(ts.iter().map(|t| Expr::mul(vec![c.clone(), t.clone()])).collect());
            }
            flat.push(f);
        }
        if !constant.is_one() {
            flat.insert(0, Expr::num(constant));
        }
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else {
            Expr::from_node(Node::Mul(flat))
        }
    }

    pub fn neg(&self) -> Expr {
        Expr::mul(vec![Expr::int(-1), self.clone()])
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        Expr::add(vec![self.clone(), other.neg()])
    }

    pub fn div(&self, other: &Expr) -> Expr {
        Expr::mul(vec![self.clone(), other.powi(-1)])
    }

    pub fn powi(&self, n: i64) -> Expr {
        Expr::pow(self.clone(), Expr::int(n))
    }

    pub fn pow_rational(&self, n: i64, d: i64) -> Expr {
        Expr::pow(self.clone(), Expr::rational(n, d))
    }

    pub fn pow(base: Expr, exp: Expr) -> Expr {
        if exp.is_zero() {
            return Expr::one();
        }
        if exp.is_one() {
            return base;
        }
        if base.is_one() {
            return Expr::one();
        }
        if let (Node::Num(b), Node::Num(e)) = (base.node(), exp.node()) {
            if let Some(r) = rational_power(b, e) {
                return Expr::num(r);
            }
        }
        if base.is_zero() && exp.as_num().is_some_and(|e| e.is_positive()) {
            return Expr::zero();
        }
        if let Some(n) = exp.as_integer() {
            match base.node() {
                // (b^e)^n = b^(e n) wherever b^e is defined, for integer n.
                Node::Pow(b, e) => {
                    if let Some(e) = e.as_num() {
                        let combined = e * BigRational::from_integer(BigInt::from(n));
                        return Expr::pow(b.clone(), Expr::num(combined));
                    }
                }
                Node::Mul(fs) => {
                    return Expr::mul(fs.iter().map(|f| Expr::pow(f.clone(), exp.clone())).collect());
                }
                _ => {}
            }
        }
        Expr::from_node(Node::Pow(base, exp))
    }

    pub fn func(f: Func, arg: Expr) -> Expr {
        match (f, arg.node()) {
            (Func::Exp, _) if arg.is_zero() => Expr::one(),
            (Func::Log, _) if arg.is_one() => Expr::zero(),
            (Func::Sqrt, Node::Num(r)) if !r.is_negative() => match exact_root(r, 2) {
                Some(s) => Expr::num(s),
                None => Expr::from_node(Node::Func(f, arg)),
            },
            _ => Expr::from_node(Node::Func(f, arg)),
        }
    }

    pub fn sqrt(&self) -> Expr {
        Expr::func(Func::Sqrt, self.clone())
    }

    pub fn exp(&self) -> Expr {
        Expr::func(Func::Exp, self.clone())
    }

    pub fn log(&self) -> Expr {
        Expr::func(Func::Log, self.clone())
    }

    pub fn integral(body: Expr, var: &str) -> Expr {
        Expr::from_node(Node::Int(body, symbol(var)))
    }

    /// Visits every node once per occurrence, pre-order.
    pub fn walk(&self, f: &mut dyn FnMut(&Expr)) {
        f(self);
        match self.node() {
            Node::Num(_) | Node::Sym(_) => {}
            Node::Add(xs) | Node::Mul(xs) => xs.iter().for_each(|x| x.walk(f)),
            Node::Pow(b, e) => {
                b.walk(f);
                e.walk(f);
            }
            Node::Func(_, a) => a.walk(f),
            Node::Int(b, _) => b.walk(f),
        }
    }

    /// Free symbols, sorted.
    pub fn symbols(&self) -> Vec<Symbol> {
        let mut seen = std::collections::BTreeSet::new();
        let mut visited = std::collections::HashSet::new();
        collect_symbols(self, &mut seen, &mut visited);
        seen.into_iter().collect()
    }

    pub fn contains_int(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| {
            if matches!(e.node(), Node::Int(..)) {
                found = true;
            }
        });
        found
    }

    /// Number of distinct nodes in the shared DAG.
    pub fn dag_size(&self) -> usize {
        let mut visited = std::collections::HashSet::new();
        count_nodes(self, &mut visited);
        visited.len()
    }
}

fn collect_symbols(e: &Expr, out: &mut std::collections::BTreeSet<Symbol>, visited: &mut std::collections::HashSet<usize>) {
    if !visited.insert(e.ptr_id()) {
        return;
    }
    match e.node() {
        Node::Num(_) => {}
        Node::Sym(s) => {
            out.insert(s.clone());
        }
        Node::Add(xs) | Node::Mul(xs) => xs.iter().for_each(|x| collect_symbols(x, out, visited)),
        Node::Pow(b, x) => {
            collect_symbols(b, out, visited);
            collect_symbols(x, out, visited);
        }
        Node::Func(_, a) => collect_symbols(a, out, visited),
        Node::Int(b, v) => {
            collect_symbols(b, out, visited);
            out.insert(v.clone());
        }
    }
}

fn count_nodes(e: &Expr, visited: &mut std::collections::HashSet<usize>) {
    if !visited.insert(e.ptr_id()) {
        return;
    }
    match e.node() {
        Node::Num(_) | Node::Sym(_) => {}
        Node::Add(xs) | Node::Mul(xs) => xs.iter().for_each(|x| count_nodes(x, visited)),
        Node::Pow(b, x) => {
            count_nodes(b, visited);
            count_nodes(x, visited);
        }
        Node::Func(_, a) | Node::Int(a, _) => count_nodes(a, visited),
    }
}

/// Splits a term into its numeric coefficient and the remaining product.
fn split_coefficient(t: &Expr) -> (BigRational, Option<Expr>) {
    if let Node::Mul(fs) = t.node() {
        if let Some(c) = fs[0].as_num() {
            let rest = if fs.len() == 2 { fs[1].clone() } else { Expr::from_node(Node::Mul(fs[1..].to_vec())) };
            return (c.clone(), Some(rest));
        }
    }
    (BigRational::one(), None)
}

/// Merges terms that differ only by their numeric coefficient, keeping the
/// order of first appearance.
/// Total order on operands of sums and products, so that normalization
/// does not depend on the order they were supplied in: symbols by name,
/// then powers of symbols, then everything else by structural hash.
fn canonical_order(a: &Expr, b: &Expr) -> std::cmp::Ordering {
    fn rank(e: &Expr) -> (u8, Option<&str>) {
        match e.node() {
            Node::Num(_) => (0, None),
            Node::Sym(s) => (1, Some(s)),
            Node::Pow(b, _) => match b.node() {
                Node::Sym(s) => (2, Some(s)),
                _ => (3, None),
            },
            Node::Func(..) => (4, None),
            Node::Mul(_) => (5, None),
            Node::Add(_) => (6, None),
            Node::Int(..) => (7, None),
        }
    }
    rank(a).cmp(&rank(b)).then_with(|| a.0.hash.cmp(&b.0.hash))
}

fn collect_like_terms(terms: Vec<Expr>) -> Vec<Expr> {
    if terms.len() < 2 {
        return terms;
    }
    let mut index: std::collections::HashMap<Expr, usize> = std::collections::HashMap::with_capacity(terms.len());
    let mut groups: Vec<(Expr, BigRational, Option<Expr>, bool)> = Vec::with_capacity(terms.len());
    for t in terms {
        let (c, rest) = split_coefficient(&t);
        let key = rest.clone().unwrap_or_else(|| t.clone());
        match index.get(&key) {
            Some(&i) => {
                groups[i].1 += c;
                groups[i].3 = true;
            }
            None => {
                index.insert(key.clone(), groups.len());
                groups.push((key, c, Some(t), false));
            }
        }
    }
    groups
        .into_iter()
        .filter(|g| !g.1.is_zero())
        .map(|(key, c, orig, merged)| {
            if !merged {
                orig.unwrap()
            } else if c.is_one() {
                key
            } else {
                Expr::mul(vec![Expr::num(c), key])
            }
        })
        .collect()
}

/// Merges repeated bases with numeric exponents. Returns the surviving
/// factors and any numeric factor produced along the way.
fn collect_like_factors(factors: Vec<Expr>) -> (Vec<Expr>, BigRational) {
    let mut extra = BigRational::one();
    if factors.len() < 2 {
        return (factors, extra);
    }
    let mut index: std::collections::HashMap<Expr, usize> = std::collections::HashMap::with_capacity(factors.len());
    let mut groups: Vec<(Expr, BigRational, Expr, bool)> = Vec::with_capacity(factors.len());
    for f in factors {
        let (base, exp) = match f.node() {
            Node::Pow(b, e) if e.as_num().is_some() => (b.clone(), e.as_num().unwrap().clone()),
            _ => (f.clone(), BigRational::one()),
        };
        match index.get(&base) {
            Some(&i) => {
                groups[i].1 += exp;
                groups[i].3 = true;
            }
            None => {
                index.insert(base.clone(), groups.len());
                groups.push((base, exp, f, false));
            }
        }
    }
    let mut out = Vec::with_capacity(groups.len());
    for (base, exp, orig, merged) in groups {
        if !merged {
            out.push(orig);
            continue;
        }
        if exp.is_zero() {
            continue;
        }
        let p = Expr::pow(base, Expr::num(exp));
        match p.node() {
            Node::Num(r) => extra *= r,
            Node::Mul(fs) => out.extend(fs.iter().cloned()),
            _ => out.push(p),
        }
    }
    // Numeric factors produced by merging are folded by the caller.
    let mut rest = Vec::with_capacity(out.len());
    for f in out {
        match f.node() {
            Node::Num(r) => extra *= r,
            _ => rest.push(f),
        }
    }
    (rest, extra)
}

/// b^e when the result is rational. Negative powers of zero stay symbolic.
fn rational_power(b: &BigRational, e: &BigRational) -> Option<BigRational> {
    let numer = e.numer().to_i64()?;
    let denom = e.denom().to_u32()?;
    if numer.unsigned_abs() > 4096 {
        return None;
    }
    if b.is_zero() {
        return if numer > 0 { Some(BigRational::zero()) } else { None };
    }
    let root = if denom == 1 {
        b.clone()
    } else {
        if b.is_negative() {
            return None;
        }
        exact_root(b, denom)?
    };
    let p = num_traits::pow::pow(root, numer.unsigned_abs() as usize);
    Some(if numer < 0 { p.recip() } else { p })
}

fn exact_root(r: &BigRational, k: u32) -> Option<BigRational> {
    let n = int_root(r.numer(), k)?;
    let d = int_root(r.denom(), k)?;
    Some(BigRational::new(n, d))
}

fn int_root(n: &BigInt, k: u32) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.nth_root(k);
    if num_traits::pow::pow(r.clone(), k as usize) == *n {
        Some(r)
    } else {
        None
    }
}

pub(crate) fn is_integer(r: &BigRational) -> bool {
    r.denom().is_one()
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add(vec![self, rhs])
    }
}

impl std::ops::Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        Expr::add(vec![self.clone(), rhs.clone()])
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sub(&self, &rhs)
    }
}

impl std::ops::Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::mul(vec![self, rhs])
    }
}

impl std::ops::Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        Expr::mul(vec![self.clone(), rhs.clone()])
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::div(&self, &rhs)
    }
}

impl std::ops::Div for &Expr {
    type Output = Expr;
    fn div(self, rhs: &Expr) -> Expr {
        Expr::div(self, rhs)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_fold() {
        let e = Expr::add(vec![Expr::int(2), Expr::int(3)]);
        assert_eq!(e, Expr::int(5));
        assert_eq!(Expr::mul(vec![Expr::int(0), Expr::sym("x")]), Expr::zero());
        assert_eq!(Expr::pow(Expr::int(4), Expr::rational(3, 2)), Expr::int(8));
        assert_eq!(Expr::pow(Expr::int(2), Expr::int(-2)), Expr::rational(1, 4));
    }

    #[test]
    fn flattening() {
        let x = Expr::sym("x");
        let y = Expr::sym("y");
        let e = &(&x + &y) + &Expr::sym("z");
        match e.node() {
            Node::Add(ts) => assert_eq!(ts.len(), 3),
            _ => panic!("expected sum"),
        }
        let m = Expr::mul(vec![Expr::int(2), Expr::mul(vec![x.clone(), Expr::int(3)])]);
        assert_eq!(m, Expr::mul(vec![Expr::int(6), x.clone()]));
    }

    #[test]
    fn like_terms_and_factors_collect() {
        let x = Expr::sym("x");
        let y = Expr::sym("y");
        let s = &x + &y;
        assert!((&s - &s).is_zero());
        assert_eq!(&x * &x, x.powi(2));
        assert_eq!(Expr::mul(vec![x.clone(), x.powi(-1)]), Expr::one());
        assert_eq!(&(&x + &x) + &y, Expr::add(vec![Expr::mul(vec![Expr::int(2), x.clone()]), y.clone()]));
    }

    #[test]
    fn integer_powers_fold() {
        let q = Expr::sym("q");
        let half = q.pow_rational(1, 2);
        assert_eq!(half.powi(2), q);
        let sq = q.powi(2);
        // (q^2)^(1/2) is |q|, must not fold
        assert!(matches!(Expr::pow(sq, Expr::rational(1, 2)).node(), Node::Pow(..)));
    }

    #[test]
    fn zero_to_negative_power_stays_symbolic() {
        let e = Expr::pow(Expr::zero(), Expr::int(-1));
        assert!(matches!(e.node(), Node::Pow(..)));
    }
}
