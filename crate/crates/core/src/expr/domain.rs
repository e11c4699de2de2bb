use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::eval::Program;
use super::node::{symbol, Expr, Func, Node, Symbol};
use super::parse::{parse, ParseError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("empty interval for `{sym}`: [{lo}, {hi}]")]
    EmptyInterval { sym: String, lo: f64, hi: f64 },
    #[error("margin must be strictly positive, got {0}")]
    BadMargin(f64),
    #[error("malformed box specification `{0}` (expected sym:lo:hi)")]
    BadSpec(String),
    #[error("malformed constraint `{0}`")]
    BadConstraint(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("could not draw a point satisfying the box constraints after {0} attempts")]
    Exhausted(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Interval, DomainError> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(DomainError::EmptyInterval { sym: String::new(), lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintKind {
    /// expr > margin
    Positive,
    /// |expr| > margin
    Nonzero,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub kind: ConstraintKind,
    pub expr: Expr,
    pub margin: f64,
}

impl Constraint {
    pub fn new(kind: ConstraintKind, expr: Expr, margin: f64) -> Result<Constraint, DomainError> {
        if !(margin > 0.0) {
            return Err(DomainError::BadMargin(margin));
        }
        Ok(Constraint { kind, expr, margin })
    }

    /// Parses `expr > m` or `|expr| > m`.
    pub fn parse(text: &str) -> Result<Constraint, DomainError> {
        let (lhs, rhs) = text.rsplit_once('>').ok_or_else(|| DomainError::BadConstraint(text.into()))?;
        let margin: f64 = rhs.trim().parse().map_err(|_| DomainError::BadConstraint(text.into()))?;
        let lhs = lhs.trim();
        if let Some(inner) = lhs.strip_prefix('|').and_then(|s| s.strip_suffix('|')) {
            Constraint::new(ConstraintKind::Nonzero, parse(inner)?, margin)
        } else {
            Constraint::new(ConstraintKind::Positive, parse(lhs)?, margin)
        }
    }

    pub fn describe(&self) -> String {
        match self.kind {
            ConstraintKind::Positive => format!("{} > {}", self.expr, self.margin),
            ConstraintKind::Nonzero => format!("|{}| > {}", self.expr, self.margin),
        }
    }

    fn satisfied(&self, value: f64) -> bool {
        match self.kind {
            ConstraintKind::Positive => value > self.margin,
            ConstraintKind::Nonzero => value.abs() > self.margin,
        }
    }
}

/// Per-symbol sampling intervals plus inequality constraints that keep
/// samples away from singular loci.
#[derive(Debug, Clone)]
pub struct DomainBox {
    intervals: BTreeMap<Symbol, Interval>,
    constraints: Vec<Constraint>,
    default: Interval,
}

impl Default for DomainBox {
    fn default() -> Self {
        DomainBox { intervals: BTreeMap::new(), constraints: Vec::new(), default: Interval { lo: -1.0, hi: 1.0 } }
    }
}

pub const DEFAULT_MARGIN: f64 = 0.05;

impl DomainBox {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, sym: &str, lo: f64, hi: f64) -> Result<Self, DomainError> {
        self.set(sym, lo, hi)?;
        Ok(self)
    }

    pub fn set(&mut self, sym: &str, lo: f64, hi: f64) -> Result<(), DomainError> {
        let iv = Interval::new(lo, hi).map_err(|_| DomainError::EmptyInterval { sym: sym.into(), lo, hi })?;
        self.intervals.insert(symbol(sym), iv);
        Ok(())
    }

    pub fn constrain(mut self, c: Constraint) -> Self {
        self.constraints.push(c);
        self
    }

    pub fn add_constraint(&mut self, c: Constraint) {
        self.constraints.push(c);
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn intervals(&self) -> &BTreeMap<Symbol, Interval> {
        &self.intervals
    }

    /// Applies a `sym:lo:hi` specification.
    pub fn apply_spec(&mut self, spec: &str) -> Result<(), DomainError> {
        let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
        if parts.len() != 3 || parts[0].is_empty() {
            return Err(DomainError::BadSpec(spec.into()));
        }
        let lo = parse_bound(parts[1]).ok_or_else(|| DomainError::BadSpec(spec.into()))?;
        let hi = parse_bound(parts[2]).ok_or_else(|| DomainError::BadSpec(spec.into()))?;
        self.set(parts[0], lo, hi)
    }

    /// Overlays `other`: its intervals replace ours, constraints accumulate.
    pub fn merged(&self, other: &DomainBox) -> DomainBox {
        let mut out = self.clone();
        for (k, v) in &other.intervals {
            out.intervals.insert(k.clone(), *v);
        }
        out.constraints.extend(other.constraints.iter().cloned());
        out
    }

    pub fn interval(&self, sym: &str) -> Interval {
        self.intervals.get(sym).copied().unwrap_or(self.default)
    }

    /// Adds constraints implied by the singular loci of `e`: bases of
    /// fractional powers, square roots and logarithms must be positive,
    /// bases of negative powers nonzero.
    pub fn infer_margins(&mut self, e: &Expr, margin: f64) {
        let mut seen: BTreeSet<(u8, u64)> = self.constraints.iter().map(|c| (c.kind as u8, c.expr.structural_hash())).collect();
        let mut found = Vec::new();
        e.walk(&mut |n| {
            let c = match n.node() {
                Node::Pow(b, x) if b.as_num().is_none() => match x.as_num() {
                    Some(r) if !r.is_integer() => Some((ConstraintKind::Positive, b.clone())),
                    Some(r) if r < &num_rational::BigRational::from_integer(0.into()) => Some((ConstraintKind::Nonzero, b.clone())),
                    Some(_) => None,
                    None => Some((ConstraintKind::Positive, b.clone())),
                },
                Node::Func(Func::Sqrt | Func::Log, a) if a.as_num().is_none() => Some((ConstraintKind::Positive, a.clone())),
                _ => None,
            };
            if let Some((kind, b)) = c {
                if seen.insert((kind as u8, b.structural_hash())) {
                    found.push(Constraint { kind, expr: b, margin });
                }
            }
        });
        self.constraints.extend(found);
    }

    /// All symbols that must be bound to check the constraints.
    pub fn constraint_symbols(&self) -> Vec<Symbol> {
        let mut out = BTreeSet::new();
        for c in &self.constraints {
            out.extend(c.expr.symbols());
        }
        out.into_iter().collect()
    }

    fn constraint_program(&self, vars: &[Symbol]) -> Option<Program> {
        if self.constraints.is_empty() {
            return None;
        }
        let exprs: Vec<Expr> = self.constraints.iter().map(|c| c.expr.clone()).collect();
        Program::compile(&exprs, Some(vars)).ok()
    }

    fn satisfies(&self, prog: Option<&Program>, point: &[f64]) -> bool {
        let Some(prog) = prog else { return true };
        match prog.eval::<f64>(point) {
            Ok(vals) => self.constraints.iter().zip(vals).all(|(c, v)| c.satisfied(v)),
            Err(_) => false,
        }
    }

    /// Whether a named point lies in the box and satisfies all constraints.
    pub fn contains(&self, point: &HashMap<Symbol, f64>) -> bool {
        for (k, v) in point {
            if !self.interval(k).contains(*v) {
                return false;
            }
        }
        let mut vars: Vec<Symbol> = point.keys().cloned().collect();
        vars.sort();
        for s in self.constraint_symbols() {
            if !point.contains_key(&s) {
                return false;
            }
        }
        let p: Vec<f64> = vars.iter().map(|s| point[s]).collect();
        self.satisfies(self.constraint_program(&vars).as_ref(), &p)
    }

    /// Returns a sampler for the given symbols (sorted order is used for
    /// the generated coordinates).
    pub fn sampler(&self, symbols: &[Symbol]) -> Sampler {
        let mut vars: BTreeSet<Symbol> = symbols.iter().cloned().collect();
        vars.extend(self.constraint_symbols());
        let vars: Vec<Symbol> = vars.into_iter().collect();
        let intervals = vars.iter().map(|s| self.interval(s)).collect();
        Sampler { program: self.constraint_program(&vars), vars, intervals, domain: self.clone() }
    }

    pub fn describe(&self) -> serde_json::Value {
        let iv: BTreeMap<String, [f64; 2]> = self.intervals.iter().map(|(k, v)| (k.to_string(), [v.lo, v.hi])).collect();
        serde_json::json!({
            "intervals": iv,
            "default": [self.default.lo, self.default.hi],
            "constraints": self.constraints.iter().map(Constraint::describe).collect::<Vec<_>>(),
        })
    }
}

fn parse_bound(s: &str) -> Option<f64> {
    if let Ok(x) = s.parse::<f64>() {
        return Some(x);
    }
    let e = parse(s).ok()?;
    e.eval(&[]).ok()
}

pub struct Sampler {
    vars: Vec<Symbol>,
    intervals: Vec<Interval>,
    program: Option<Program>,
    domain: DomainBox,
}

pub const MAX_REJECTIONS: usize = 10_000;

impl Sampler {
    pub fn vars(&self) -> &[Symbol] {
        &self.vars
    }

    /// Draws a point uniformly from the box, rejecting constraint violations.
    pub fn draw<R: Rng>(&self, rng: &mut R) -> Result<Vec<f64>, DomainError> {
        for _ in 0..MAX_REJECTIONS {
            let p: Vec<f64> = self.intervals.iter().map(|iv| if iv.lo == iv.hi { iv.lo } else { rng.gen_range(iv.lo..=iv.hi) }).collect();
            if self.domain.satisfies(self.program.as_ref(), &p) {
                return Ok(p);
            }
        }
        Err(DomainError::Exhausted(MAX_REJECTIONS))
    }

    /// The box center if admissible, otherwise a deterministic draw.
    pub fn center<R: Rng>(&self, rng: &mut R) -> Result<Vec<f64>, DomainError> {
        let c: Vec<f64> = self.intervals.iter().map(Interval::center).collect();
        if self.domain.satisfies(self.program.as_ref(), &c) {
            return Ok(c);
        }
        self.draw(rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn spec_syntax() {
        let mut b = DomainBox::new();
        b.apply_spec("q:0.1:10").unwrap();
        assert_eq!(b.interval("q"), Interval { lo: 0.1, hi: 10.0 });
        assert_eq!(b.interval("p"), Interval { lo: -1.0, hi: 1.0 });
        assert!(b.apply_spec("q:2:1").is_err());
        assert!(b.apply_spec("q:2").is_err());
    }

    #[test]
    fn margins_must_be_positive() {
        assert!(Constraint::new(ConstraintKind::Positive, Expr::sym("q"), 0.0).is_err());
        assert!(Constraint::parse("1 - p*q > 0.05").is_ok());
        assert_eq!(Constraint::parse("|y| > 0.1").unwrap().kind, ConstraintKind::Nonzero);
    }

    #[test]
    fn inferred_constraints_are_respected() {
        let f = parse("(2*q*y - p^2)^(3/2)/y^2").unwrap();
        let mut b = DomainBox::new();
        b.infer_margins(&f, 0.05);
        assert_eq!(b.constraints().len(), 2);
        let s = b.sampler(&f.symbols());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..50 {
            let p = s.draw(&mut rng).unwrap();
            let m: HashMap<Symbol, f64> = s.vars().iter().cloned().zip(p.iter().copied()).collect();
            assert!(2.0 * m["q"] * m["y"] - m["p"] * m["p"] > 0.05);
        }
    }
}
