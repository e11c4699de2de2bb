//! The eleven acceptance criteria, one pass/fail line each. Runs without the
//! libtest harness so the lines are always printed.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use odeconf::catalog::{formula, Catalog, RunConfig};
use odeconf::curvature::{weyl, weyl_square};
use odeconf::expr::{ex, parse, DomainBox, Expr, ZeroTestConfig};
use odeconf::lie::{self, Connection, FlatSystem, LieSystem};
use odeconf::monge::{
    classify_monge1, einstein_scale_residual, frame_weyl, g32_metric, single_variable_a5, single_variable_metric, transcription_check,
    verify_parametrized_solution, MongeEquation, MongeFirst, MongeSecond, ParametrizedSolution, ScaleRelation,
};
use odeconf::ode2::{fefferman_flatness_check, fefferman_metric, ode2_invariants, SecondOrderODE};
use odeconf::ode3::{classify3, dkp_coframe, dkp_residual, lie_nu_exactness, ode3_invariants, transport_check, ThirdOrderODE};
use odeconf::verify::{verify_catalog, FailureKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Res = Result<(), String>;

fn ensure(ok: bool, what: impl Into<String>) -> Res {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn e<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn cfg() -> ZeroTestConfig {
    ZeroTestConfig::default()
}

fn ode3(c: &Catalog, id: &str) -> Result<ThirdOrderODE, String> {
    let entry = c.ode3_entry(id).ok_or(format!("no catalog entry {}", id))?;
    let f = e(formula(&entry.f, &entry.params))?;
    e(ThirdOrderODE::with_inferred_domain(f, e(entry.region.domain())?))
}

const WUENSCHMANN: [&str; 6] = [
    "contact-family-alpha-half",
    "contact-family-alpha-1",
    "contact-family-alpha-2",
    "radical-family-a1",
    "three-halves-power",
    "dkp-reduction",
];
const EINSTEIN_WEYL: [&str; 3] = ["radical-family-a1", "three-halves-power", "dkp-reduction"];

fn wuenschmann_suite(c: &Catalog) -> Res {
    for id in WUENSCHMANN {
        let o = ode3(c, id)?;
        ensure(e(ode3_invariants(&o).a.is_zero_on(&o.domain, &cfg()))?.is_zero(), format!("A != 0 for {}", id))?;
    }
    let o = ThirdOrderODE::with_inferred_domain(ex("q^2"), DomainBox::new()).map_err(|e| e.to_string())?;
    let v = e(ode3_invariants(&o).a.is_zero_on(&o.domain, &cfg()))?;
    ensure(!v.is_zero(), "A = 0 for q^2")?;
    let w = v.witness.ok_or("no witness for q^2")?;
    let want = -2.0 / 27.0 * w.point["q"].powi(3);
    ensure((w.value - want).abs() <= 1e-9 * want.abs(), format!("witness {} vs -(2/27)q^3 = {}", w.value, want))
}

fn cartan_suite(c: &Catalog) -> Res {
    for id in EINSTEIN_WEYL {
        let o = ode3(c, id)?;
        ensure(e(ode3_invariants(&o).g.is_zero_on(&o.domain, &cfg()))?.is_zero(), format!("G != 0 for {}", id))?;
        let (class, _) = e(classify3(&o, &cfg()))?;
        ensure(class.name() == "einstein-weyl", format!("{} classified {}", id, class.name()))?;
    }
    Ok(())
}

fn transport_equivalences(c: &Catalog) -> Res {
    for entry in &c.ode3 {
        let o = ode3(c, &entry.id)?;
        let inv = ode3_invariants(&o);
        let a_zero = e(inv.a.is_zero_on(&o.domain, &cfg()))?.is_zero();
        let g_zero = e(inv.g.is_zero_on(&o.domain, &cfg()))?.is_zero();
        let t = e(transport_check(&o, &cfg()))?;
        ensure(t.conformal == a_zero, format!("transport {} but A zero {} for {}", t.conformal, a_zero, entry.id))?;
        let nu = e(lie_nu_exactness(&o).zero_test(&o.domain, &cfg()))?;
        if a_zero {
            ensure(nu.is_zero() == g_zero, format!("d(L_D nu) zero {} but G zero {} for {}", nu.is_zero(), g_zero, entry.id))?;
        }
    }
    let o = ode3(c, "cube-of-q")?;
    let nu = e(lie_nu_exactness(&o).zero_test(&o.domain, &cfg()))?;
    ensure(!nu.is_zero() && nu.witness.is_some(), "d(L_D nu) for q^3 should fail with a witness")
}

fn dkp_bridge() -> Res {
    let u = ex("sqrt(2*x)");
    let d = e(DomainBox::new().with("x", 0.2, 2.0))?;
    let r = e(dkp_residual(&u, &d, &cfg()))?;
    ensure(e(r.scalar.is_zero_on(&d, &cfg()))?.is_zero(), "dKP scalar of sqrt(2x)")?;
    let co = e(dkp_coframe(&u, Some(&ex("t + v^2/2 + sqrt(2*x)")), &d, &cfg()))?;
    ensure(co.membership.ok_or("no membership")?.is_zero(), "dX membership")?;
    const MONOMIALS: [&str; 20] = [
        "1", "x", "y", "t", "x^2", "x*y", "x*t", "y^2", "y*t", "t^2", "x^3", "x^2*y", "x^2*t", "x*y^2", "x*y*t", "x*t^2", "y^3", "y^2*t",
        "y*t^2", "t^3",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let u = Expr::add(MONOMIALS.iter().map(|m| Expr::int(rng.gen_range(-5..=5)) * ex(m)).collect());
    let r = e(dkp_residual(&u, &DomainBox::new(), &cfg()))?;
    ensure(r.factor_check.is_zero(), "Frobenius residuals are not factor * dKP scalar")?;
    ensure(!e(r.scalar.is_zero_on(&DomainBox::new(), &cfg()))?.is_zero(), "random cubic unexpectedly solves dKP")
}

fn fefferman_suite(c: &Catalog) -> Res {
    for entry in &c.ode2 {
        let o = e(SecondOrderODE::with_inferred_domain(e(parse(&entry.q))?, e(entry.region.domain())?))?;
        e(fefferman_metric(&o).check_nondegenerate(&cfg())).map_err(|m| format!("{}: {}", entry.id, m))?;
        let rep = e(fefferman_flatness_check(&o, &cfg()))?;
        let inv = ode2_invariants(&o);
        let w_zero = e(inv.w1.is_zero_on(&o.domain, &cfg()))?.is_zero() && e(inv.w2.is_zero_on(&o.domain, &cfg()))?.is_zero();
        let weyl_zero = rep.check("Weyl").ok_or("no Weyl check")?.is_zero();
        ensure(weyl_zero == w_zero, format!("Weyl zero {} but w1 = w2 = 0 {} for {}", weyl_zero, w_zero, entry.id))?;
    }
    let o = e(SecondOrderODE::with_inferred_domain(ex("p^4"), DomainBox::new()))?;
    let inv = ode2_invariants(&o);
    ensure((inv.w1.clone() - ex("24*p^8")).is_zero(), format!("w1(p^4) = {}", inv.w1))?;
    ensure((inv.w2.clone() - ex("24")).is_zero(), format!("w2(p^4) = {}", inv.w2))
}

fn monge1_suite(c: &Catalog) -> Res {
    for (f, want) in [("z", "branch-cc2"), ("y", "branch-cc1"), ("p^2", "branch-cc1")] {
        let m = e(MongeFirst::with_inferred_domain(ex(f), DomainBox::new()))?;
        let (b, _) = e(classify_monge1(&m, &cfg()))?;
        ensure(b.name() == want, format!("F = {}: {}", f, b.name()))?;
    }
    for id in ["slope-squared-integral-free", "cubic-curvature-with-integral"] {
        let s = c.solution.iter().find(|s| s.id == id).ok_or(format!("no solution {}", id))?;
        let d = e(s.region.domain())?;
        let f = e(parse(&s.f))?;
        let (first, second);
        let eq = if s.equation == "monge1" {
            first = e(MongeFirst::new(f, DomainBox::new()))?;
            MongeEquation::First(&first)
        } else {
            second = e(MongeSecond::new(f, DomainBox::new()))?;
            MongeEquation::Second(&second)
        };
        let sol = e(ParametrizedSolution::parse(&s.x, &s.y, &s.z))?;
        ensure(e(verify_parametrized_solution(eq, &sol, &d, &cfg()))?.is_zero(), format!("{} does not verify", id))?;
        for m in &s.mutations {
            let sol = e(ParametrizedSolution::parse(&m[0], &m[1], &m[2]))?;
            ensure(!e(verify_parametrized_solution(eq, &sol, &d, &cfg()))?.is_zero(), format!("mutation {:?} verifies", m))?;
        }
    }
    Ok(())
}

fn flat_model() -> Res {
    let curv = cfg().with_tol(1e-8);
    let m = e(MongeSecond::with_inferred_domain(ex("q^2"), DomainBox::new()))?;
    let g = e(g32_metric(&m, &curv))?;
    let v = e(e(weyl(&g))?.zero_test(&curv))?;
    ensure(v.is_zero() && v.samples == 20, format!("Weyl(G32) for q^2: {:?}", v.verdict))?;
    ensure(e(single_variable_a5(&ex("q^2")))?.is_zero(), "a5(q^2) != 0")
}

fn single_variable_suite() -> Res {
    let f = ex("q^3/6");
    let d = e(DomainBox::new().with("q", 0.5, 2.0))?;
    let a5 = e(single_variable_a5(&f))?;
    ensure((a5.clone() + ex("56/25*q^(-20/3)")).is_zero(), format!("a5 = {}", a5))?;
    let g = e(single_variable_metric(&f, &d, &cfg()))?;
    ensure(e(e(weyl_square(&g))?.zero_test(&cfg()))?.is_zero(), "|C|^2 != 0")?;
    let r = e(einstein_scale_residual(&f, &ScaleRelation::quoted(&f), &d, &cfg()))?;
    ensure(e(r.zero_test(&cfg()))?.is_zero(), "Einstein-scale residual != 0")?;
    let w = e(frame_weyl(&f, &d, &cfg()))?;
    let pt: BTreeMap<String, f64> =
        [("q", 1.0), ("x", 0.1), ("y", 0.2), ("p", 0.3), ("z", 0.4)].iter().map(|(k, v)| (k.to_string(), *v)).collect();
    let vals = e(w.values_at(&pt))?;
    let nonzero: Vec<usize> = (0..vals.len()).filter(|&i| vals[i].abs() > 1e-9).collect();
    ensure(nonzero == [234, 246, 534, 546], format!("nonzero frame components {:?}", nonzero))?;
    ensure(nonzero.iter().all(|&i| (vals[i].abs() - 2.24).abs() <= 1e-9), "magnitude differs from 2.24")
}

fn transcription() -> Res {
    let curv = cfg().with_tol(1e-8);
    for (f, lo, hi) in [("q^3/6", 0.5, 2.0), ("exp(q)", -1.0, 1.0), ("q^(5/2)", 0.5, 2.0), ("q^2", -1.0, 1.0)] {
        let d = e(DomainBox::new().with("q", lo, hi))?;
        let r = e(transcription_check(&ex(f), &d, &curv))?;
        let bad: Vec<String> = r.slots.iter().filter(|s| !s.verdict.is_zero()).map(|s| format!("{:?} {:?}", s.slot, s.monomials)).collect();
        ensure(r.ok && bad.is_empty(), format!("F = {}: {}", f, bad.join("; ")))?;
    }
    Ok(())
}

fn lie_suite() -> Res {
    for s in [FlatSystem::Point, FlatSystem::G2] {
        let t = lie::flat_structure_constants(s);
        ensure(t.jacobi_check().holds && e(t.d_squared_check())?.is_empty(), format!("Jacobi fails for {:?}", s))?;
    }
    let cl = lie::matrix_rep(Connection::G2).commutator_closure_check();
    let t = cl.table.ok_or("ccg2 basis does not close")?;
    ensure(t.same_brackets(&lie::flat_structure_constants(FlatSystem::G2)), "ccg2 constants differ from the flat table")?;
    let k = lie::flat_structure_constants(FlatSystem::G2).killing_analysis();
    ensure(k.nondegenerate && k.inertia.triple() == (8, 6, 0), format!("Killing inertia {:?}", k.inertia.triple()))?;
    let r = e(lie::verify(LieSystem::Ccg2))?;
    let m = r.matrices.ok_or("no matrix summary")?;
    let b = &m.invariant_bilinear_form;
    ensure(b.dimension == 1 && b.basis_inertia[0].unsigned() == (4, 3), "ccg2 invariant form is not unique of signature (4,3)")?;
    let phi = m.invariant_three_form.ok_or("no 3-form analysis")?;
    ensure(phi.dimension >= 1 && phi.generic, "no generic invariant 3-form")?;
    let caln = lie::matrix_rep(Connection::PointNormal).invariant_bilinear_form();
    ensure(caln.contains_signature(4, 4), "caln has no invariant form of signature (4,4)")
}

fn infrastructure(c: &Catalog) -> Res {
    let base = verify_catalog(c, &RunConfig::default());
    let failed: Vec<&str> = base.claims.iter().filter(|r| !r.pass).map(|r| r.id.as_str()).collect();
    ensure(failed.is_empty(), format!("failing claims {:?}", failed))?;
    ensure(base.claims.iter().filter(|r| r.section == "infrastructure").count() >= 5, "too few infrastructure checks")?;
    for seed in [1, 2] {
        let s = verify_catalog(c, &RunConfig { seed, ..RunConfig::default() });
        ensure(s.verdicts() == base.verdicts(), format!("verdicts change with seed {}", seed))?;
    }
    let tight = verify_catalog(c, &RunConfig { tol: 1e-13, ..RunConfig::default() });
    ensure(tight.logical_failures == 0, format!("{} logical failures at tol 1e-13", tight.logical_failures))?;
    let beyond = verify_catalog(c, &RunConfig { tol: 1e-26, ..RunConfig::default() });
    let kinds: Vec<FailureKind> = beyond.claims.iter().filter_map(|r| r.failure).collect();
    ensure(!kinds.is_empty() && kinds.iter().all(|k| *k == FailureKind::NumericalHeadroom), "sub-resolution failures are not all headroom")
}

fn main() -> ExitCode {
    let c = Catalog::builtin();
    let criteria: Vec<(&str, Box<dyn Fn() -> Res>)> = vec![
        ("wuenschmann condition", Box::new(|| wuenschmann_suite(&c))),
        ("cartan condition", Box::new(|| cartan_suite(&c))),
        ("transport equivalences", Box::new(|| transport_equivalences(&c))),
        ("dkp bridge", Box::new(dkp_bridge)),
        ("fefferman metrics", Box::new(|| fefferman_suite(&c))),
        ("monge first-order branches and solutions", Box::new(|| monge1_suite(&c))),
        ("flat (3,2) model", Box::new(flat_model)),
        ("single-variable fixture", Box::new(single_variable_suite)),
        ("metric transcription", Box::new(transcription)),
        ("lie algebras", Box::new(lie_suite)),
        ("infrastructure and runner", Box::new(|| infrastructure(&c))),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let r = run();
        let secs = start.elapsed().as_secs_f64();
        match r {
            Ok(()) => println!("criterion {:>2} PASS  {} ({:.1}s)", i + 1, name, secs),
            Err(msg) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {} ({:.1}s): {}", i + 1, name, secs, msg);
            }
        }
    }
    println!("acceptance: {}/{} criteria pass", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
