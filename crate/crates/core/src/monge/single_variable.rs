//! z' = F(y''): invariant coframe, the scalar invariant a₅, the explicit
//! metric representative, its Einstein scale, and the frame Weyl pattern.

use std::collections::HashMap;

use crate::curvature::{einstein_residual, frame_components, weyl, MetricTensor, TensorField};
use crate::expr::{ex, symbol, Differentiator, DomainBox, Expr, Symbol, ZeroTestConfig, DEFAULT_MARGIN};
use crate::exterior::{Chart, DifferentialForm, SymmetricForm};
use crate::report::{Check, InvariantReport, OdeError};

use super::g32::tilde_coframe;
use super::MongeSecond;

/// C_{2525} in the α-frame equals `FRAME_A5_SIGN · a₅`; fixed on F = q³/6.
pub const FRAME_A5_SIGN: f64 = -1.0;

/// Slots (0-based) of the frame Weyl tensor carrying a₅: {2,5,2,5} and its
/// images under the Riemann symmetries.
const A5_SLOTS: [[usize; 4]; 4] = [[1, 4, 1, 4], [4, 1, 4, 1], [1, 4, 4, 1], [4, 1, 1, 4]];

fn check_single_variable(f: &Expr) -> Result<(), OdeError> {
    for s in f.symbols() {
        if &*s != "q" && Chart::monge2().index_of(&s).is_some() {
            return Err(OdeError::Precondition(format!("F must depend on q alone, found `{}`", s)));
        }
    }
    Ok(())
}

/// F and its q-derivatives up to order `n`.
fn derivatives(f: &Expr, n: usize) -> Vec<Expr> {
    let mut d = Differentiator::new();
    let mut out = vec![f.clone()];
    for k in 0..n {
        let next = d.diff(&out[k], "q");
        out.push(next);
    }
    out
}

/// Evaluates a template in F, F1 = F', …, F6 for the given F.
fn instantiate(template: &str, f: &Expr) -> Expr {
    let ds = derivatives(f, 6);
    let names = ["F", "F1", "F2", "F3", "F4", "F5", "F6"];
    let b: HashMap<Symbol, Expr> = names.iter().zip(ds).map(|(n, e)| (symbol(n), e)).collect();
    ex(template).substitute(&b)
}

fn require_nondegenerate(f: &Expr, domain: &DomainBox, cfg: &ZeroTestConfig) -> Result<DomainBox, OdeError> {
    check_single_variable(f)?;
    let fpp = f.diff("q").diff("q");
    let mut dom = domain.clone();
    dom.infer_margins(f, DEFAULT_MARGIN);
    if fpp.is_zero_on(&dom, cfg)?.is_zero() {
        return Err(OdeError::Precondition("F'' vanishes on the box".into()));
    }
    dom.infer_margins(&fpp.pow_rational(1, 3), DEFAULT_MARGIN);
    Ok(dom)
}

/// a₅ = {−224F'''⁴ + 336F''F'''²F⁗ − 80F''²F'''F⁽⁵⁾ + F''²[−51F⁗² + 10F''F⁽⁶⁾]}/[100 F''^{20/3}].
pub fn single_variable_a5(f: &Expr) -> Result<Expr, OdeError> {
    check_single_variable(f)?;
    Ok(instantiate("(-224*F3^4 + 336*F2*F3^2*F4 - 80*F2^2*F3*F5 + F2^2*(-51*F4^2 + 10*F2*F6)) / (100*F2^(20/3))", f))
}

#[derive(Clone, Debug)]
pub struct SingleVariableCoframe {
    pub tilde: [DifferentialForm; 5],
    pub theta: [DifferentialForm; 5],
    /// θ^i = Σ_k t[i][k] ω̃^k.
    pub t: Vec<Vec<Expr>>,
    pub omega2: DifferentialForm,
    pub omega6: DifferentialForm,
    /// (θ¹, θ², (2√3/3)θ³, θ⁴, θ⁵).
    pub alpha: [DifferentialForm; 5],
    pub domain: DomainBox,
}

fn combine(forms: &[DifferentialForm; 5], coef: &[Expr]) -> DifferentialForm {
    let mut acc = DifferentialForm::zero(forms[0].chart().clone(), 1);
    for (w, c) in forms.iter().zip(coef) {
        if !c.is_zero() {
            acc = acc.add(&w.scale(c)).unwrap();
        }
    }
    acc
}

pub fn single_variable_coframe(f: &Expr, domain: &DomainBox, cfg: &ZeroTestConfig) -> Result<SingleVariableCoframe, OdeError> {
    let dom = require_nondegenerate(f, domain, cfg)?;
    let m = MongeSecond::new(f.clone(), dom.clone())?;
    let tilde = tilde_coframe(&m);
    let z = Expr::zero;
    let e = |k: usize| (0..5).map(|i| if i == k { Expr::one() } else { Expr::zero() }).collect::<Vec<_>>();
    let t = vec![
        e(0),
        e(1),
        vec![z(), z(), instantiate("-F2^(1/3)", f), z(), z()],
        vec![
            z(),
            instantiate("F2^(-1/3) * (-3*F2*F4 + 4*F3^2) / (30*F2^3)", f),
            instantiate("-F2^(-1/3) * F3 / (3*F2)", f),
            z(),
            instantiate("F2^(-1/3)", f),
        ],
        vec![z(), z(), z(), instantiate("-F2^(2/3)", f), z()],
    ];
    let theta: [DifferentialForm; 5] = std::array::from_fn(|i| combine(&tilde, &t[i]));
    let c2 = instantiate("(-45*F2*F3*F4 + 40*F3^3 + 9*F2^2*F5) / (90*F2^5)", f);
    let c3 = instantiate("(-3*F2*F4 + 4*F3^2) / (30*F2^(10/3))", f);
    let omega2 = theta[1].scale(&c2).add(&theta[2].scale(&c3))?;
    let omega6 = theta[4].scale(&c3.neg());
    let s = Expr::rational(2, 3) * Expr::int(3).sqrt();
    let alpha = [theta[0].clone(), theta[1].clone(), theta[2].scale(&s), theta[3].clone(), theta[4].clone()];
    Ok(SingleVariableCoframe { tilde, theta, t, omega2, omega6, alpha, domain: dom })
}

/// Matrix of 2θ¹θ⁵ − 2θ²θ⁴ + ⁴⁄₃θ³θ³ in the ω̃ basis.
pub(crate) fn frame_in_tilde_basis(c: &SingleVariableCoframe) -> Vec<Vec<Expr>> {
    let eta = frame_eta();
    let mut out = vec![vec![Expr::zero(); 5]; 5];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, o) in row.iter_mut().enumerate() {
            let mut terms = Vec::new();
            for a in 0..5 {
                for b in 0..5 {
                    if !eta[a][b].is_zero() {
                        terms.push(Expr::mul(vec![eta[a][b].clone(), c.t[a][i].clone(), c.t[b][j].clone()]));
                    }
                }
            }
            *o = Expr::add(terms);
        }
    }
    out
}

fn frame_eta() -> Vec<Vec<Expr>> {
    let mut eta = vec![vec![Expr::zero(); 5]; 5];
    eta[0][4] = Expr::one();
    eta[4][0] = Expr::one();
    eta[1][3] = Expr::int(-1);
    eta[3][1] = Expr::int(-1);
    eta[2][2] = Expr::rational(4, 3);
    eta
}

/// The frame-normalized representative 2θ¹θ⁵ − 2θ²θ⁴ + ⁴⁄₃(θ³)² in coordinates.
pub fn frame_metric(c: &SingleVariableCoframe) -> Result<MetricTensor, OdeError> {
    let eta = frame_eta();
    let mut g = SymmetricForm::zero(c.theta[0].chart().clone());
    for a in 0..5 {
        for b in a..5 {
            if eta[a][b].is_zero() {
                continue;
            }
            let (w, k) = if a == b {
                (SymmetricForm::square(&c.theta[a])?, eta[a][b].clone())
            } else {
                (SymmetricForm::product(&c.theta[a], &c.theta[b])?, Expr::int(2) * eta[a][b].clone())
            };
            g = g.add(&w.scale(&k))?;
        }
    }
    Ok(MetricTensor::from_symmetric_form(&g, c.domain.clone())?)
}

/// The explicit coordinate representative on (x, y, p, q, z) for F = F(q).
pub fn single_variable_metric(f: &Expr, domain: &DomainBox, cfg: &ZeroTestConfig) -> Result<MetricTensor, OdeError> {
    let dom = require_nondegenerate(f, domain, cfg)?;
    let c = Chart::monge2();
    // Coordinates 0..5 = x, y, p, q, z.
    let entries: [((usize, usize), &str); 8] = [
        ((3, 1), "15*F2^4"),
        ((3, 0), "-15*p*F2^4"),
        ((4, 4), "4*F3^2 - 3*F2*F4"),
        ((2, 4), "-5*F2^2*F3 - 4*F1*F3^2 + 3*F1*F2*F4"),
        ((0, 4), "15*F2^3 + 5*q*F2^2*F3 - 4*F*F3^2 + 4*q*F1*F3^2 + 3*F*F2*F4 - 3*q*F1*F2*F4"),
        ((2, 2), "-20*F2^4 + 10*F1*F2^2*F3 + 4*F1^2*F3^2 - 3*F1^2*F2*F4"),
        (
            (2, 0),
            "-15*F1*F2^3 + 20*q*F2^4 + 5*F*F2^2*F3 - 10*q*F1*F2^2*F3 + 4*F*F1*F3^2 - 4*q*F1^2*F3^2 \
             - 3*F*F1*F2*F4 + 3*q*F1^2*F2*F4",
        ),
        (
            (0, 0),
            "-30*F*F2^3 + 30*q*F1*F2^3 - 20*q^2*F2^4 - 10*q*F*F2^2*F3 + 10*q^2*F1*F2^2*F3 + 4*F^2*F3^2 \
             - 8*q*F*F1*F3^2 + 4*q^2*F1^2*F3^2 - 3*F^2*F2*F4 + 6*q*F*F1*F2*F4 - 3*q^2*F1^2*F2*F4",
        ),
    ];
    // Off-diagonal entries above already carry the factor ½ of the symmetric
    // product (2[..] dp dz has matrix entry [..]; 30[..] dq dy has 15[..]).
    let mut m = vec![vec![Expr::zero(); 5]; 5];
    for ((i, j), s) in entries {
        let e = instantiate(s, f);
        m[i][j] = e.clone();
        m[j][i] = e;
    }
    Ok(MetricTensor::new(c, m, dom)?)
}

/// Υ'' as a function of Υ' from
/// 10F''²(Υ'' − Υ'²) − 40F''F'''Υ' + 17F''F⁗ − 56F'''² = 0.
#[derive(Clone, Debug)]
pub struct ScaleRelation {
    pub ups2: Expr,
}

impl ScaleRelation {
    pub fn quoted(f: &Expr) -> ScaleRelation {
        ScaleRelation { ups2: instantiate("Ups_1^2 + 4*F3/F2*Ups_1 + (56*F3^2 - 17*F2*F4)/(10*F2^2)", f) }
    }

    /// The relation with the 17F''F⁗ term dropped; a negative control.
    pub fn without_fourth_derivative(f: &Expr) -> ScaleRelation {
        ScaleRelation { ups2: instantiate("Ups_1^2 + 4*F3/F2*Ups_1 + 56*F3^2/(10*F2^2)", f) }
    }

    /// The relation without its Υ-free source term; a negative control that
    /// also bites when F⁗ ≡ 0.
    pub fn without_source_term(f: &Expr) -> ScaleRelation {
        ScaleRelation { ups2: instantiate("Ups_1^2 + 4*F3/F2*Ups_1", f) }
    }

    /// Υ₄, Υ₃, Υ₂ in terms of Υ₁, highest first, ready for substitution.
    fn eliminations(&self) -> Vec<(&'static str, Expr)> {
        let b2: HashMap<Symbol, Expr> = [(symbol("Ups_2"), self.ups2.clone())].into_iter().collect();
        let ups3 = self.ups2.diff("q").substitute(&b2);
        let b3: HashMap<Symbol, Expr> = [(symbol("Ups_3"), ups3.clone())].into_iter().collect();
        let ups4 = ups3.diff("q").substitute(&b3).substitute(&b2);
        vec![("Ups_4", ups4), ("Ups_3", ups3), ("Ups_2", self.ups2.clone())]
    }
}

/// e^{2Υ} times the explicit representative, with Υ = Ups_0(q) and the
/// scale relation registered as reductions.
pub fn einstein_scale_metric(f: &Expr, rel: &ScaleRelation, domain: &DomainBox, cfg: &ZeroTestConfig) -> Result<MetricTensor, OdeError> {
    let g = single_variable_metric(f, domain, cfg)?.conformal_rescale(&Expr::sym("Ups_0"));
    Ok(rel.eliminations().into_iter().fold(g, |g, (s, e)| g.with_reduction(s, e)))
}

/// Ric − (R/5)g for e^{2Υ}G after eliminating Υ'' and higher.
pub fn einstein_scale_residual(f: &Expr, rel: &ScaleRelation, domain: &DomainBox, cfg: &ZeroTestConfig) -> Result<TensorField, OdeError> {
    Ok(einstein_residual(&einstein_scale_metric(f, rel, domain, cfg)?)?)
}

#[derive(Clone, Debug)]
pub struct PsiInvariants {
    pub a: [Expr; 5],
}

/// I_Ψ = 6a₃² − 8a₂a₄ + 2a₁a₅.
pub fn psi_invariant(p: &PsiInvariants) -> Expr {
    let a = &p.a;
    Expr::int(6) * a[2].powi(2) - Expr::int(8) * (&a[1] * &a[3]) + Expr::int(2) * (&a[0] * &a[4])
}

/// Weyl tensor of the frame-normalized representative in the α-frame.
pub fn frame_weyl(f: &Expr, domain: &DomainBox, cfg: &ZeroTestConfig) -> Result<TensorField, OdeError> {
    let c = single_variable_coframe(f, domain, cfg)?;
    let g = frame_metric(&c)?;
    Ok(frame_components(&weyl(&g)?, &c.alpha)?)
}

fn flat_index(ix: [usize; 4]) -> usize {
    ((ix[0] * 5 + ix[1]) * 5 + ix[2]) * 5 + ix[3]
}

/// Checks that the α-frame Weyl tensor vanishes outside the a₅ slots and
/// equals `FRAME_A5_SIGN · a₅` in C_{2525}.
pub fn weyl_frame_pattern_check(f: &Expr, domain: &DomainBox, cfg: &ZeroTestConfig) -> Result<InvariantReport, OdeError> {
    let a5 = single_variable_a5(f)?;
    let c = single_variable_coframe(f, domain, cfg)?;
    let va5 = a5.is_zero_on(&c.domain, cfg)?;
    let w = frame_components(&weyl(&frame_metric(&c)?)?, &c.alpha)?;
    let slots: Vec<usize> = A5_SLOTS.iter().map(|&s| flat_index(s)).collect();
    let off = TensorField::combine(&[&w], "weyl-off-pattern", 0, 0, move |v| {
        Ok(v[0].iter().enumerate().filter(|(i, _)| !slots.contains(i)).map(|(_, x)| *x).collect())
    });
    let a5f = TensorField::scalar(Chart::monge2(), a5.clone(), c.domain.clone())?;
    let k = flat_index(A5_SLOTS[0]);
    let slot = TensorField::combine(&[&w, &a5f], "weyl-a5-slot", 0, 0, move |v| {
        let (cv, cm) = v[0][k];
        let (av, am) = v[1][0];
        Ok(vec![(cv - FRAME_A5_SIGN * av, cm + am)])
    });
    let voff = off.zero_test(cfg)?;
    let vslot = slot.zero_test(cfg)?;
    let mut rep = InvariantReport::new("weyl-frame-pattern").input("F", f.to_string());
    rep.consistent = voff.is_zero() && vslot.is_zero();
    rep.classification = if !rep.consistent {
        "pattern-mismatch"
    } else if va5.is_zero() {
        "conformally-flat"
    } else {
        "a5-only"
    }
    .into();
    rep.push(Check::new("a5", va5, Some(&a5)));
    rep.push(Check::new("off-pattern components", voff, None));
    rep.push(Check::new("C_2525 - sign*a5", vslot, None));
    rep.notes.push(format!("frame sign convention C_2525 = {} * a5", FRAME_A5_SIGN));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qbox() -> DomainBox {
        DomainBox::new().with("q", 0.5, 2.0).unwrap()
    }

    #[test]
    fn a5_values() {
        assert!(single_variable_a5(&ex("q^2")).unwrap().is_zero());
        let a = single_variable_a5(&ex("q^3/6")).unwrap();
        let want = ex("-56/25*q^(-20/3)");
        assert!((a - want).is_zero_on(&qbox(), &ZeroTestConfig::default()).unwrap().is_zero());
    }

    #[test]
    fn hilbert_coframe_is_constant() {
        let c = single_variable_coframe(&ex("q^2"), &DomainBox::new(), &ZeroTestConfig::default()).unwrap();
        assert!(c.omega2.is_structurally_zero() && c.omega6.is_structurally_zero());
        let cbrt2 = 2f64.powf(1.0 / 3.0);
        let v = crate::expr::eval_f64(&c.t[2][2], &HashMap::new()).unwrap();
        assert!((v + cbrt2).abs() < 1e-14);
        let v = crate::expr::eval_f64(&c.t[3][4], &HashMap::new()).unwrap();
        assert!((v - 1.0 / cbrt2).abs() < 1e-14);
        assert!(c.t[3][2].is_zero() && c.t[3][1].is_zero());
    }

    #[test]
    fn cubic_theta4_at_one() {
        let c = single_variable_coframe(&ex("q^3/6"), &qbox(), &ZeroTestConfig::default()).unwrap();
        let at1: HashMap<Symbol, f64> = [(symbol("q"), 1.0)].into_iter().collect();
        let v: Vec<f64> = c.t[3].iter().map(|e| crate::expr::eval_f64(e, &at1).unwrap()).collect();
        let want = [0.0, 4.0 / 30.0, -1.0 / 3.0, 0.0, 1.0];
        for (a, b) in v.iter().zip(want) {
            assert!((a - b).abs() < 1e-14, "{:?}", v);
        }
    }

    #[test]
    fn psi_examples() {
        let z = Expr::zero;
        assert!(psi_invariant(&PsiInvariants { a: [z(), z(), z(), z(), ex("a5")] }).is_zero());
        assert_eq!(psi_invariant(&PsiInvariants { a: [z(), z(), Expr::one(), z(), z()] }), Expr::int(6));
    }

    #[test]
    fn rejects_other_variables() {
        assert!(single_variable_a5(&ex("q^3 + y")).is_err());
        assert!(single_variable_coframe(&ex("p + q"), &DomainBox::new(), &ZeroTestConfig::default()).is_err());
    }
}
