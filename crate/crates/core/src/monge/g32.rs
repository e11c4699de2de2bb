//! The (3,2)-signature conformal metric of z' = F(x, y, p, q, z), F_qq ≠ 0,
//! transcribed monomial by monomial over the adapted coframe ω̃¹..ω̃⁵.

use std::collections::HashMap;

use serde::Serialize;

use crate::curvature::MetricTensor;
use crate::expr::{zero_test_exprs, Differentiator, DomainBox, Expr, ZeroTestConfig, ZeroTestVerdict};
use crate::exterior::{DifferentialForm, SymmetricForm};
use crate::report::OdeError;

use super::single_variable::{frame_in_tilde_basis, single_variable_coframe};
use super::MongeSecond;

/// One printed monomial: `coef · Π atoms` multiplying ω̃^i ω̃^j (1-based).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct G32Term {
    pub slot: (usize, usize),
    pub coef: i64,
    /// Space-separated atoms `F_ij..`, `DF_..`, `DDF_..`, each optionally `^k`.
    /// `DF_qq^2` means (DF_qq)^2.
    pub monomial: &'static str,
}

const fn t(slot: (usize, usize), coef: i64, monomial: &'static str) -> G32Term {
    G32Term { slot, coef, monomial }
}

const TABLE: &[G32Term] = &[
    t((1, 1), 1, "DF_qq^2 F_qq^2"),
    t((1, 1), 6, "DF_q DF_qqq F_qq^2"),
    t((1, 1), -6, "DF_qqq F_p F_qq^2"),
    t((1, 1), -3, "DDF_qq F_qq^3"),
    t((1, 1), 9, "DF_qp F_qq^3"),
    t((1, 1), -9, "F_pp F_qq^3"),
    t((1, 1), 9, "DF_qz F_q F_qq^3"),
    t((1, 1), -18, "F_pz F_q F_qq^3"),
    t((1, 1), 3, "DF_z F_qq^4"),
    t((1, 1), -6, "DF_q F_qq^2 F_qqp"),
    t((1, 1), 6, "F_p F_qq^2 F_qqp"),
    t((1, 1), -8, "DF_q DF_qq F_qq F_qqq"),
    t((1, 1), 8, "DF_qq F_p F_qq F_qqq"),
    t((1, 1), 3, "DDF_q F_qq^2 F_qqq"),
    t((1, 1), -3, "DF_p F_qq^2 F_qqq"),
    t((1, 1), -3, "DF_z F_q F_qq^2 F_qqq"),
    t((1, 1), 4, "DF_q^2 F_qqq^2"),
    t((1, 1), -8, "DF_q F_p F_qqq^2"),
    t((1, 1), -3, "DF_q^2 F_qq F_qqqq"),
    t((1, 1), 4, "F_p^2 F_qqq^2"),
    t((1, 1), 6, "DF_q F_p F_qq F_qqqq"),
    t((1, 1), -3, "F_p^2 F_qq F_qqqq"),
    t((1, 1), -6, "DF_q F_q F_qq^2 F_qqz"),
    t((1, 1), 6, "F_p F_q F_qq^2 F_qqz"),
    t((1, 1), -3, "DF_q F_qq^3 F_qz"),
    t((1, 1), 12, "F_p F_qq^3 F_qz"),
    t((1, 1), 3, "F_qq^2 F_qqq F_y"),
    t((1, 1), -6, "DF_qqq F_q F_qq^2 F_z"),
    t((1, 1), 4, "DF_qq F_qq^3 F_z"),
    t((1, 1), 6, "F_q F_qq^2 F_qqp F_z"),
    t((1, 1), 8, "DF_qq F_q F_qq F_qqq F_z"),
    t((1, 1), -4, "DF_q F_qq^2 F_qqq F_z"),
    t((1, 1), -9, "F_qp F_qq^3 F_z"),
    t((1, 1), 1, "F_p F_qq^2 F_qqq F_z"),
    t((1, 1), -8, "DF_q F_q F_qqq^2 F_z"),
    t((1, 1), 8, "F_p F_q F_qqq^2 F_z"),
    t((1, 1), 6, "DF_q F_q F_qq F_qqqq F_z"),
    t((1, 1), -6, "F_p F_q F_qq F_qqqq F_z"),
    t((1, 1), 18, "F_qq^3 F_qy"),
    t((1, 1), 6, "F_q^2 F_qq^2 F_qqz F_z"),
    t((1, 1), 3, "F_q F_qq^3 F_qz F_z"),
    t((1, 1), -2, "F_qq^4 F_z^2"),
    t((1, 1), 1, "F_q F_qq^2 F_qqq F_z^2"),
    t((1, 1), 4, "F_q^2 F_qqq^2 F_z^2"),
    t((1, 1), -3, "F_q^2 F_qq F_qqqq F_z^2"),
    t((1, 1), -9, "F_q^2 F_qq^3 F_zz"),
    t((1, 2), 6, "DF_qqq F_qq^2"),
    t((1, 2), -6, "F_qq^2 F_qqp"),
    t((1, 2), -8, "DF_qq F_qq F_qqq"),
    t((1, 2), 8, "DF_q F_qqq^2"),
    t((1, 2), -8, "F_p F_qqq^2"),
    t((1, 2), -6, "DF_q F_qq F_qqqq"),
    t((1, 2), 6, "F_p F_qq F_qqqq"),
    t((1, 2), -6, "F_q F_qq^2 F_qqz"),
    t((1, 2), 6, "F_qq^3 F_qz"),
    t((1, 2), 2, "F_qq^2 F_qqq F_z"),
    t((1, 2), -8, "F_q F_qqq^2 F_z"),
    t((1, 2), 6, "F_q F_qq F_qqqq F_z"),
    t((1, 3), 10, "DF_qq F_qq^3"),
    t((1, 3), -10, "DF_q F_qq^2 F_qqq"),
    t((1, 3), 10, "F_p F_qq^2 F_qqq"),
    t((1, 3), -10, "F_qq^4 F_z"),
    t((1, 3), 10, "F_q F_qq^2 F_qqq F_z"),
    t((1, 4), 30, "F_qq^4"),
    t((1, 5), 30, "DF_q F_qq^3"),
    t((1, 5), -30, "F_p F_qq^3"),
    t((1, 5), -30, "F_q F_qq^3 F_z"),
    t((2, 2), 4, "F_qqq^2"),
    t((2, 2), -3, "F_qq F_qqqq"),
    t((2, 3), -10, "F_qq^2 F_qqq"),
    t((2, 5), 30, "F_qq^3"),
    t((3, 3), -20, "F_qq^4"),
];

pub fn g32_term_table() -> &'static [G32Term] {
    TABLE
}

/// Resolves the atoms of the table for one F.
struct Atoms<'a> {
    m: &'a MongeSecond,
    d: Differentiator,
    cache: HashMap<String, Expr>,
}

impl<'a> Atoms<'a> {
    fn new(m: &'a MongeSecond) -> Self {
        Atoms { m, d: Differentiator::new(), cache: HashMap::new() }
    }

    fn atom(&mut self, name: &str) -> Expr {
        if let Some(e) = self.cache.get(name) {
            return e.clone();
        }
        let e = if let Some(rest) = name.strip_prefix('D') {
            let inner = self.atom(rest);
            self.m.total_derivative().apply_with(&mut self.d, &inner)
        } else {
            let idx = name.strip_prefix("F").expect("table atoms start with D or F");
            let idx = idx.strip_prefix('_').unwrap_or(idx);
            let mut e = self.m.f.clone();
            for c in idx.chars() {
                e = self.d.diff(&e, &c.to_string());
            }
            e
        };
        self.cache.insert(name.to_string(), e.clone());
        e
    }

    fn monomial(&mut self, text: &str) -> Expr {
        let factors = text
            .split_whitespace()
            .map(|tok| match tok.split_once('^') {
                Some((a, k)) => self.atom(a).powi(k.parse().expect("integer power in table")),
                None => self.atom(tok),
            })
            .collect();
        Expr::mul(factors)
    }

    fn term(&mut self, t: &G32Term) -> Expr {
        Expr::int(t.coef) * self.monomial(t.monomial)
    }
}

/// ω̃¹ = dy − p dx, ω̃² = dz − F dx − F_q(dp − q dx), ω̃³ = dp − q dx, ω̃⁴ = dq, ω̃⁵ = dx.
pub(crate) fn tilde_coframe(m: &MongeSecond) -> [DifferentialForm; 5] {
    let c = m.chart();
    let f = &m.f;
    let fq = f.diff("q");
    let (p, q) = (Expr::sym("p"), Expr::sym("q"));
    let (o, z) = (Expr::one(), Expr::zero());
    let form = |v: [Expr; 5]| DifferentialForm::one_form(c.clone(), v.to_vec()).unwrap();
    [
        form([p.neg(), o.clone(), z.clone(), z.clone(), z.clone()]),
        form([&fq * &q - f.clone(), z.clone(), fq.neg(), z.clone(), o.clone()]),
        form([q.neg(), z.clone(), o.clone(), z.clone(), z.clone()]),
        form([z.clone(), z.clone(), z.clone(), o.clone(), z.clone()]),
        form([o, z.clone(), z.clone(), z.clone(), z]),
    ]
}

/// Slot coefficients c_ij (i ≤ j, 1-based) of Σ c_ij ω̃^i ω̃^j.
fn slot_coefficients(m: &MongeSecond) -> Vec<((usize, usize), Expr)> {
    let mut atoms = Atoms::new(m);
    let mut slots: Vec<((usize, usize), Vec<Expr>)> = Vec::new();
    for term in TABLE {
        let e = atoms.term(term);
        match slots.iter_mut().find(|(s, _)| *s == term.slot) {
            Some((_, v)) => v.push(e),
            None => slots.push((term.slot, vec![e])),
        }
    }
    slots.into_iter().map(|(s, v)| (s, Expr::add(v))).collect()
}

/// The coordinate metric on (x, y, p, q, z); requires F_qq ≢ 0.
pub fn g32_metric(m: &MongeSecond, cfg: &ZeroTestConfig) -> Result<MetricTensor, OdeError> {
    let fqq = m.f.diff("q").diff("q");
    let v = fqq.is_zero_on(&m.domain, cfg)?;
    if v.is_zero() {
        return Err(OdeError::Precondition("F_qq vanishes on the box".into()));
    }
    let w = tilde_coframe(m);
    let mut g = SymmetricForm::zero(m.chart());
    for ((i, j), c) in slot_coefficients(m) {
        let prod = if i == j { SymmetricForm::square(&w[i - 1])? } else { SymmetricForm::product(&w[i - 1], &w[j - 1])? };
        g = g.add(&prod.scale(&c))?;
    }
    let mut dom = m.domain.clone();
    dom.infer_margins(&m.f, crate::expr::DEFAULT_MARGIN);
    Ok(MetricTensor::from_symmetric_form(&g, dom)?)
}

/// Comparison of one ω̃-slot of the transcribed metric with the coframe construction.
#[derive(Clone, Debug, Serialize)]
pub struct SlotCheck {
    pub slot: (usize, usize),
    pub verdict: ZeroTestVerdict,
    /// Table rows contributing to the slot, with whether they are nonzero for this F.
    pub monomials: Vec<(usize, &'static str, bool)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TranscriptionReport {
    pub f: String,
    /// The printed metric equals factor · (2θ¹θ⁵ − 2θ²θ⁴ + ⁴⁄₃θ³θ³).
    pub factor: String,
    pub slots: Vec<SlotCheck>,
    pub ok: bool,
}

/// Compares every ω̃ slot of the printed metric, for F = F(q), with the
/// frame construction 2θ¹θ⁵ − 2θ²θ⁴ + ⁴⁄₃(θ³)² written in the same basis,
/// both scaled by the one global factor −15 F''^{10/3}.
pub fn transcription_check(f: &Expr, domain: &DomainBox, cfg: &ZeroTestConfig) -> Result<TranscriptionReport, OdeError> {
    let m = MongeSecond::new(f.clone(), domain.clone())?;
    if f.symbols().iter().any(|s| &**s != "q" && crate::exterior::Chart::monge2().index_of(s).is_some()) {
        return Err(OdeError::Precondition("the frame construction needs F = F(q)".into()));
    }
    let cof = single_variable_coframe(f, domain, cfg)?;
    let frame = frame_in_tilde_basis(&cof);
    let fpp = f.diff("q").diff("q");
    let factor = Expr::int(-15) * fpp.pow_rational(10, 3);
    let table = slot_coefficients(&m);
    let mut atoms = Atoms::new(&m);
    let mut dom = domain.clone();
    dom.infer_margins(&fpp.pow_rational(1, 3), crate::expr::DEFAULT_MARGIN);
    let mut slots = Vec::new();
    let mut ok = true;
    for i in 1..=5 {
        for j in i..=5 {
            let printed = table.iter().find(|(s, _)| *s == (i, j)).map(|(_, e)| e.clone()).unwrap_or_else(Expr::zero);
            // Off-diagonal slot c ω̃^i ω̃^j contributes c/2 to each matrix entry.
            let from_frame = if i == j { &factor * &frame[i - 1][j - 1] } else { Expr::int(2) * (&factor * &frame[i - 1][j - 1]) };
            let verdict = zero_test_exprs(&[printed - from_frame], &dom, cfg)?;
            ok &= verdict.is_zero();
            let mut monomials = Vec::new();
            for (k, term) in TABLE.iter().enumerate().filter(|(_, t)| t.slot == (i, j)) {
                let live = !atoms.term(term).is_zero();
                monomials.push((k, term.monomial, live));
            }
            slots.push(SlotCheck { slot: (i, j), verdict, monomials });
        }
    }
    Ok(TranscriptionReport { f: f.to_string(), factor: factor.to_string(), slots, ok })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ex;

    #[test]
    fn table_size_and_slots() {
        assert_eq!(TABLE.len(), 72);
        assert_eq!(TABLE.iter().filter(|t| t.slot == (1, 1)).count(), 46);
        assert!(TABLE.iter().all(|t| t.slot.0 <= t.slot.1));
    }

    #[test]
    fn hilbert_components_are_polynomial() {
        let m = MongeSecond::new(ex("q^2"), DomainBox::new()).unwrap();
        let g = g32_metric(&m, &ZeroTestConfig::default()).unwrap();
        // ω̃¹ω̃⁴ slot: 30·16 = 480, so g_yq = 240.
        assert_eq!(*g.component(1, 3), Expr::int(240));
        let pt = [("x", 0.0), ("y", 0.0), ("p", 0.0), ("q", 1.0), ("z", 0.0)];
        let s = g.signature_at(&pt.iter().map(|(k, v)| (crate::expr::symbol(k), *v)).collect()).unwrap();
        assert!(s == (3, 2, 0) || s == (2, 3, 0), "{:?}", s);
    }

    #[test]
    fn needs_nonlinear_q() {
        let m = MongeSecond::new(ex("q + y"), DomainBox::new()).unwrap();
        assert!(g32_metric(&m, &ZeroTestConfig::default()).is_err());
    }
}
