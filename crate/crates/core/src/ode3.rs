//! Third-order equations y''' = F(x, y, p, q): contact and point invariants,
//! the degenerate metric on J², the Weyl 1-form, and the dKP bridge.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::expr::{zero_test_exprs, Differentiator, DomainBox, Expr, ZeroTestConfig, ZeroTestVerdict, DEFAULT_MARGIN};
use crate::exterior::{
    check_chart_symbols, conformal_transport_factor, total_derivative, Chart, DifferentialForm, OdeClass, SymmetricForm, TransportOutcome,
    VectorField,
};
use crate::report::{Check, InvariantReport, OdeError};

#[derive(Clone, Debug)]
pub struct ThirdOrderODE {
    pub f: Expr,
    pub domain: DomainBox,
}

impl ThirdOrderODE {
    pub fn new(f: Expr, domain: DomainBox) -> Result<ThirdOrderODE, OdeError> {
        check_chart_symbols(&Chart::j2_third(), &f)?;
        Ok(ThirdOrderODE { f, domain })
    }

    /// Like [`new`](Self::new), adding margins around the singular loci of F.
    pub fn with_inferred_domain(f: Expr, mut domain: DomainBox) -> Result<ThirdOrderODE, OdeError> {
        domain.infer_margins(&f, DEFAULT_MARGIN);
        ThirdOrderODE::new(f, domain)
    }

    pub fn chart(&self) -> Arc<Chart> {
        Chart::j2_third()
    }

    /// 𝒟 = ∂x + p∂y + q∂p + F∂q.
    pub fn total_derivative(&self) -> VectorField {
        total_derivative(OdeClass::ThirdOrder, &self.f).expect("chart checked on construction")
    }
}

/// K, A, G, L, N and the Cotton components C1..C5.
#[derive(Clone, Debug)]
pub struct Ode3Invariants {
    pub k: Expr,
    pub a: Expr,
    pub g: Expr,
    pub l: Expr,
    pub n: Expr,
    pub c: [Expr; 5],
}

impl Ode3Invariants {
    pub fn named(&self) -> Vec<(&'static str, &Expr)> {
        vec![
            ("K", &self.k),
            ("A", &self.a),
            ("G", &self.g),
            ("L", &self.l),
            ("N", &self.n),
            ("C1", &self.c[0]),
            ("C2", &self.c[1]),
            ("C3", &self.c[2]),
            ("C4", &self.c[3]),
            ("C5", &self.c[4]),
        ]
    }
}

fn r(n: i64, d: i64) -> Expr {
    Expr::rational(n, d)
}

pub fn ode3_invariants(ode: &ThirdOrderODE) -> Ode3Invariants {
    let f = &ode.f;
    let d = ode.total_derivative();
    let mut df = Differentiator::new();
    let mut pd = |e: &Expr, v: &str| df.diff(e, v);
    let fq = pd(f, "q");
    let fp = pd(f, "p");
    let fy = pd(f, "y");
    let fqq = pd(&fq, "q");
    let fqp = pd(&fq, "p");
    let fqy = pd(&fq, "y");
    let mut dd = Differentiator::new();
    let mut big_d = |e: &Expr| d.apply_with(&mut dd, e);

    let k = r(1, 6) * big_d(&fq) - r(1, 9) * fq.powi(2) - r(1, 2) * fp.clone();
    let a = fy.clone() + big_d(&k) - r(2, 3) * (&fq * &k);
    let dfqq = big_d(&fqq);
    let g = big_d(&dfqq) - big_d(&fqp) + fqy.clone();

    let kp = pd(&k, "p");
    let kq = pd(&k, "q");
    let kqq = pd(&kq, "q");
    let kqy = pd(&kq, "y");
    let l = r(-1, 3) * fqy.clone() + r(1, 3) * (&fqq * &k) - kp - r(1, 3) * (&fq * &kq);
    let lq = pd(&l, "q");
    let lp = pd(&l, "p");
    let lqq = pd(&lq, "q");
    let lqy = pd(&lq, "y");
    let n = r(1, 3) * (&fqq * &l) - r(2, 3) * (&fq * &lq) - Expr::int(2) * lp + &k * &kqq - kqy - r(1, 2) * kq.powi(2);
    let nq = pd(&n, "q");
    let np = pd(&n, "p");
    let c1 = pd(&fqq, "q");
    let c1 = pd(&c1, "q");
    let c2 = pd(&kqq, "q");
    let c5 = Expr::int(-3) * (&kqq * &l) + Expr::int(3) * (&kq * &lq) - Expr::int(3) * (&k * &lqq)
        + Expr::int(3) * lqy
        + Expr::int(3) * np
        + &fq * &nq;
    Ode3Invariants { k, a, g, l, n, c: [c1, c2, lqq, nq, c5] }
}

/// g̃ = 2[dy − p dx][dq − ⅓F_q dp + K dy + (⅓qF_q − F − pK)dx] − [dp − q dx]².
pub fn metric_tilde(ode: &ThirdOrderODE) -> SymmetricForm {
    let c = ode.chart();
    let f = &ode.f;
    let fq = f.diff("q");
    let k = ode3_invariants_k(ode);
    let (p, q) = (Expr::sym("p"), Expr::sym("q"));
    let one_form = |v: [Expr; 4]| DifferentialForm::one_form(c.clone(), v.to_vec()).unwrap();
    let w1 = one_form([p.neg(), Expr::one(), Expr::zero(), Expr::zero()]);
    let w2 = one_form([q.neg(), Expr::zero(), Expr::one(), Expr::zero()]);
    let dx_coef = r(1, 3) * (&q * &fq) - f.clone() - &p * &k;
    let b = one_form([dx_coef, k, r(-1, 3) * fq, Expr::one()]);
    let two = SymmetricForm::product(&w1, &b).unwrap().scale(&Expr::int(2));
    two.sub(&SymmetricForm::square(&w2).unwrap()).unwrap()
}

fn ode3_invariants_k(ode: &ThirdOrderODE) -> Expr {
    let f = &ode.f;
    let fq = f.diff("q");
    let d = ode.total_derivative();
    r(1, 6) * d.apply(&fq) - r(1, 9) * fq.powi(2) - r(1, 2) * f.diff("p")
}

/// ν̃ with the fiber gauge β ≡ 1:
/// −ν̃ = ⅔(F_qp − 𝒟F_qq) ω¹ + ⅔F_qq ω² + ⅔F_q ω⁴.
pub fn nu_tilde(ode: &ThirdOrderODE) -> DifferentialForm {
    let c = ode.chart();
    let f = &ode.f;
    let fq = f.diff("q");
    let fqq = fq.diff("q");
    let fqp = fq.diff("p");
    let a1 = r(2, 3) * (fqp - ode.total_derivative().apply(&fqq));
    let a2 = r(2, 3) * fqq;
    let a4 = r(2, 3) * fq;
    let (p, q) = (Expr::sym("p"), Expr::sym("q"));
    // a1 (dy − p dx) + a2 (dp − q dx) + a4 dx, negated.
    let dx = a4 - &a1 * &p - &a2 * &q;
    let minus_nu = DifferentialForm::one_form(c, vec![dx, a1, a2, Expr::zero()]).unwrap();
    minus_nu.scale(&Expr::int(-1))
}

/// d(L_𝒟 ν̃); vanishes exactly when L_𝒟 ν̃ is closed.
pub fn lie_nu_exactness(ode: &ThirdOrderODE) -> DifferentialForm {
    nu_tilde(ode).lie_derivative(&ode.total_derivative()).expect("same chart").d()
}

/// Whether g̃ is Lie-transported conformally along 𝒟.
pub fn transport_check(ode: &ThirdOrderODE, cfg: &ZeroTestConfig) -> Result<TransportOutcome, OdeError> {
    Ok(conformal_transport_factor(&ode.total_derivative(), &metric_tilde(ode), &ode.domain, cfg)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ode3Class {
    /// A ≢ 0.
    Generic,
    /// A ≡ 0, G ≢ 0.
    Wuenschmann,
    /// A ≡ 0 and G ≡ 0.
    EinsteinWeyl,
}

impl Ode3Class {
    pub fn name(self) -> &'static str {
        match self {
            Ode3Class::Generic => "generic",
            Ode3Class::Wuenschmann => "wuenschmann",
            Ode3Class::EinsteinWeyl => "einstein-weyl",
        }
    }
}

pub fn classify3(ode: &ThirdOrderODE, cfg: &ZeroTestConfig) -> Result<(Ode3Class, InvariantReport), OdeError> {
    let inv = ode3_invariants(ode);
    let mut rep = InvariantReport::new("ode3").input("F", ode.f.to_string());
    let va = inv.a.is_zero_on(&ode.domain, cfg)?;
    let vg = inv.g.is_zero_on(&ode.domain, cfg)?;
    let a0 = va.is_zero();
    let g0 = vg.is_zero();
    rep.push(Check::new("A", va, Some(&inv.a)));
    rep.push(Check::new("G", vg, Some(&inv.g)));
    let class = match (a0, g0) {
        (false, _) => Ode3Class::Generic,
        (true, false) => Ode3Class::Wuenschmann,
        (true, true) => Ode3Class::EinsteinWeyl,
    };
    if a0 {
        let c1 = inv.c[0].is_zero_on(&ode.domain, cfg)?;
        let all = zero_test_exprs(&inv.c, &ode.domain, cfg)?;
        if c1.is_zero() && !all.is_zero() {
            rep.consistent = false;
            rep.notes.push("C1 vanishes but some other Cotton component does not".into());
        }
        rep.push(Check::new("C1", c1, Some(&inv.c[0])));
        rep.push(Check::new("C1..C5", all, None));
    }
    rep.classification = class.name().into();
    rep.notes.push("ν̃ uses the fiber gauge β = 1".into());
    Ok((class, rep))
}

/// The dKP forms ω̄¹, ω̄⁴ on (x, y, t, v) and their Frobenius residuals.
#[derive(Clone, Debug)]
pub struct DkpResidual {
    /// u_yy + u_x² − u_xt + u u_xx
    pub scalar: Expr,
    /// dω̄¹∧ω̄¹∧ω̄⁴ and dω̄⁴∧ω̄¹∧ω̄⁴.
    pub forms: [DifferentialForm; 2],
    /// Coefficients c with form_i = c_i · scalar · dx∧dy∧dt∧dv, checked below.
    pub factors: [i64; 2],
    pub factor_check: ZeroTestVerdict,
}

fn check_dkp_symbols(u: &Expr) -> Result<(), OdeError> {
    if u.symbols().iter().any(|s| &**s == "v") {
        return Err(OdeError::Precondition("u must not depend on v".into()));
    }
    check_chart_symbols(&Chart::dkp(), u)?;
    Ok(())
}

fn dkp_forms(u: &Expr) -> (DifferentialForm, DifferentialForm) {
    let c = Chart::dkp();
    let v = Expr::sym("v");
    let (ux, uy) = (u.diff("x"), u.diff("y"));
    let w1 = DifferentialForm::one_form(c.clone(), vec![Expr::one(), v.clone(), u.clone() + v.powi(2), Expr::zero()]).unwrap();
    let w4 = DifferentialForm::one_form(c, vec![Expr::zero(), ux.neg(), (uy + &ux * &v).neg(), Expr::one()]).unwrap();
    (w1, w4)
}

pub fn dkp_scalar(u: &Expr) -> Expr {
    let ux = u.diff("x");
    u.diff("y").diff("y") + ux.powi(2) - ux.diff("t") + u * &ux.diff("x")
}

pub fn dkp_residual(u: &Expr, domain: &DomainBox, cfg: &ZeroTestConfig) -> Result<DkpResidual, OdeError> {
    check_dkp_symbols(u)?;
    let (w1, w4) = dkp_forms(u);
    let f1 = DifferentialForm::wedge_all(&[&w1.d(), &w1, &w4])?;
    let f2 = DifferentialForm::wedge_all(&[&w4.d(), &w1, &w4])?;
    let scalar = dkp_scalar(u);
    let factors = [0i64, -1];
    let vol = [0usize, 1, 2, 3];
    let res: Vec<Expr> = [&f1, &f2].iter().zip(factors).map(|(f, c)| f.coefficient(&vol) - Expr::int(c) * scalar.clone()).collect();
    let mut dom = domain.clone();
    dom.infer_margins(u, DEFAULT_MARGIN);
    let factor_check = zero_test_exprs(&res, &dom, cfg)?;
    Ok(DkpResidual { scalar, forms: [f1, f2], factors, factor_check })
}

#[derive(Clone, Debug)]
pub struct DkpCoframe {
    pub forms: [DifferentialForm; 4],
    /// dX∧ω̄⁴∧ω̄¹ ≡ 0 when an X was supplied.
    pub membership: Option<ZeroTestVerdict>,
}

/// ω̄¹..ω̄⁴ for a dKP solution u; with `x_coord`, tests whether dX lies in
/// the class of ω̄⁴ modulo ω̄¹.
pub fn dkp_coframe(u: &Expr, x_coord: Option<&Expr>, domain: &DomainBox, cfg: &ZeroTestConfig) -> Result<DkpCoframe, OdeError> {
    check_dkp_symbols(u)?;
    let mut dom = domain.clone();
    dom.infer_margins(u, DEFAULT_MARGIN);
    let s = dkp_scalar(u).is_zero_on(&dom, cfg)?;
    if !s.is_zero() {
        let w = s.witness.map(|w| format!(" (value {:e} at {:?})", w.value, w.point)).unwrap_or_default();
        return Err(OdeError::Precondition(format!("u is not a dKP solution{}", w)));
    }
    let c = Chart::dkp();
    let (w1, w4) = dkp_forms(u);
    let v = Expr::sym("v");
    let uxx = u.diff("x").diff("x");
    let uxy = u.diff("x").diff("y");
    let w2 = DifferentialForm::one_form(
        c.clone(),
        vec![uxx.neg(), uxy.neg(), u.neg() * uxx.clone() - Expr::int(2) * (&uxy * &v) + &uxx * &v.powi(2), Expr::zero()],
    )?;
    let uxx2 = uxx.powi(2);
    let w3 = DifferentialForm::one_form(
        c.clone(),
        vec![
            uxx2.neg(),
            &uxx * &(Expr::int(-2) * uxy.clone() + &uxx * &v),
            u.neg() * uxx2.clone() - Expr::int(4) * uxy.powi(2) + Expr::int(4) * (&uxx * &uxy * v.clone()) - &uxx2 * &v.powi(2),
            Expr::zero(),
        ],
    )?;
    let membership = match x_coord {
        Some(x) => {
            check_chart_symbols(&c, x)?;
            let dx = DifferentialForm::function(c.clone(), x.clone()).d();
            let m = DifferentialForm::wedge_all(&[&dx, &w4, &w1])?;
            dom.infer_margins(x, DEFAULT_MARGIN);
            Some(m.zero_test(&dom, cfg)?)
        }
        None => None,
    };
    Ok(DkpCoframe { forms: [w1, w2, w3, w4], membership })
}
