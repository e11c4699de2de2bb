use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use odeconf::catalog::{formula, RunConfig, CONFIG_ENV};
use odeconf::curvature::{weyl, weyl_square};
use odeconf::expr::{parse, DomainBox, Expr, ZeroTestConfig, ZeroTestVerdict};
use odeconf::lie::{self, LieSystem};
use odeconf::monge::{
    classify_monge1, classify_monge2, einstein_scale_residual, g32_metric, single_variable_a5, verify_parametrized_solution,
    weyl_frame_pattern_check, MongeEquation, MongeFirst, MongeSecond, ParametrizedSolution, ScaleRelation,
};
use odeconf::ode2::{fefferman_flatness_check, fefferman_metric, ode2_invariants, SecondOrderODE};
use odeconf::ode3::{
    classify3, dkp_coframe, dkp_residual, lie_nu_exactness, metric_tilde, nu_tilde, ode3_invariants, transport_check, ThirdOrderODE,
};
use odeconf::report::{summarize, InvariantReport};
use odeconf::verify::verify_paper;

#[derive(Parser)]
#[command(name = "odeconf", version, about = "Conformal geometry of ODEs and Monge equations")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Zero-test tolerance on |value| / (1 + scale).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Sample points per zero test (at least 5).
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Sampling interval for one symbol; repeatable. Other symbols default to [-1, 1].
    #[arg(long = "box", global = true, value_name = "SYM:LO:HI")]
    boxes: Vec<String>,
    /// Print a JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Catalog file used by `verify paper` (default: the built-in catalog).
    #[arg(long, global = true)]
    catalog: Option<PathBuf>,
    /// TOML file with tol, samples, seed and catalog.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Third-order equations y''' = F(x, y, p, q).
    Ode3 {
        #[command(subcommand)]
        cmd: Ode3Cmd,
    },
    /// The dKP reduction on (x, y, t, v).
    Dkp {
        #[command(subcommand)]
        cmd: DkpCmd,
    },
    /// Second-order equations y'' = Q(x, y, p).
    Ode2 {
        #[command(subcommand)]
        cmd: Ode2Cmd,
    },
    /// Monge equations z' = F(x, y, y', z) and z' = F(x, y, y', y'', z).
    Monge {
        #[command(subcommand)]
        cmd: MongeCmd,
    },
    /// Exact Lie-algebra checks.
    Lie {
        #[command(subcommand)]
        cmd: LieCmd,
    },
    /// Catalog-wide verification.
    Verify {
        #[command(subcommand)]
        cmd: VerifyCmd,
    },
}

#[derive(Args)]
struct Ode3Input {
    /// Right-hand side F(x, y, p, q).
    #[arg(long = "F", value_name = "EXPR")]
    f: String,
    /// Parameter value substituted into F; repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
}

#[derive(Subcommand)]
enum Ode3Cmd {
    /// K, A, G, L, N and C1..C5 with zero verdicts.
    Invariants(Ode3Input),
    /// generic, wuenschmann or einstein-weyl.
    Classify {
        #[command(flatten)]
        input: Ode3Input,
        #[arg(long)]
        expect: Option<String>,
    },
    /// The degenerate metric on the jet space and the conformal transport check.
    Metric(Ode3Input),
    /// The one-form nu and the exactness of d(L_D nu).
    Nu(Ode3Input),
}

#[derive(Args)]
struct DkpInput {
    /// u(x, y, t).
    #[arg(long, value_name = "EXPR")]
    u: String,
}

#[derive(Subcommand)]
enum DkpCmd {
    /// dKP scalar and the two Frobenius residuals.
    Residual(DkpInput),
    /// The coframe of a solution; with --x, the membership test of dX.
    Coframe {
        #[command(flatten)]
        input: DkpInput,
        #[arg(long, value_name = "EXPR")]
        x: Option<String>,
    },
}

#[derive(Args)]
struct Ode2Input {
    /// Right-hand side Q(x, y, p).
    #[arg(long = "Q", value_name = "EXPR")]
    q: String,
}

#[derive(Subcommand)]
enum Ode2Cmd {
    /// The (2,2) Fefferman metric.
    Metric(Ode2Input),
    /// w1 and w2.
    Invariants(Ode2Input),
    /// Weyl tensor of the Fefferman metric against w1, w2.
    Flatness {
        #[command(flatten)]
        input: Ode2Input,
        #[arg(long)]
        expect: Option<String>,
    },
}

#[derive(Args)]
struct MongeInput {
    #[arg(long = "F", value_name = "EXPR")]
    f: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Flatness {
    Flat,
    Curved,
}

#[derive(Subcommand)]
enum MongeCmd {
    /// Branch of z' = F(x, y, p, z).
    Classify1 {
        #[command(flatten)]
        input: MongeInput,
        #[arg(long)]
        expect: Option<String>,
    },
    /// integral-free or g2 for z' = F(x, y, p, q, z).
    Classify2 {
        #[command(flatten)]
        input: MongeInput,
        #[arg(long)]
        expect: Option<String>,
    },
    /// Substitutes a parametrized solution (TOML with x, y, z) into the equation.
    VerifySolution {
        #[command(flatten)]
        input: MongeInput,
        #[arg(long, value_name = "FILE")]
        sol: PathBuf,
    },
    /// The (3,2) metric and its Weyl tensor.
    G32 {
        #[command(flatten)]
        input: MongeInput,
        #[arg(long, value_enum)]
        expect: Option<Flatness>,
    },
    /// Monge equations z' = F(y'').
    #[command(name = "example6")]
    SingleVariable {
        #[command(subcommand)]
        cmd: SingleVariableCmd,
    },
}

#[derive(Subcommand)]
enum SingleVariableCmd {
    /// Closed-form a5.
    A5(MongeInput),
    /// Ric - (R/5) g for the rescaled representative.
    Einstein(MongeInput),
    /// Which frame components of the Weyl tensor are nonzero.
    WeylPattern {
        #[command(flatten)]
        input: MongeInput,
        #[arg(long)]
        expect: Option<String>,
    },
}

#[derive(Subcommand)]
enum LieCmd {
    /// syspoint, g2-flat, conpoint, caln or ccg2.
    Verify { system: String },
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Every catalog claim, Lie system and infrastructure check.
    Paper,
}

/// A usage-level failure: exit status 2.
#[derive(Debug)]
enum Failure {
    Formula(String, String),
    Box(String, String),
    Config(String),
    Input(String),
    Compute(String),
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Formula(t, e) => write!(f, "malformed formula `{}`: {}", t, e),
            Failure::Box(t, e) => write!(f, "invalid box `{}`: {}", t, e),
            Failure::Config(e) => write!(f, "invalid configuration: {}", e),
            Failure::Input(e) => write!(f, "invalid input: {}", e),
            Failure::Compute(e) => write!(f, "computation failed: {}", e),
        }
    }
}

fn compute<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Compute(e.to_string())
}

struct Outcome {
    input: BTreeMap<String, String>,
    result: Value,
    lines: Vec<String>,
    expected: bool,
}

impl Outcome {
    fn new(input: BTreeMap<String, String>, result: Value, lines: Vec<String>) -> Outcome {
        Outcome { input, result, lines, expected: true }
    }

    fn expect(mut self, ok: bool) -> Outcome {
        self.expected &= ok;
        self
    }
}

struct Ctx {
    config: RunConfig,
    cfg: ZeroTestConfig,
    domain: DomainBox,
}

fn expr(text: &str) -> Result<Expr, Failure> {
    parse(text).map_err(|e| Failure::Formula(text.into(), e.to_string()))
}

fn input(pairs: &[(&str, &Expr)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, e)| (k.to_string(), e.to_string())).collect()
}

fn word(v: &ZeroTestVerdict) -> &'static str {
    if v.is_zero() {
        "zero"
    } else {
        "nonzero"
    }
}

fn verdict_line(name: &str, v: &ZeroTestVerdict) -> String {
    match &v.witness {
        Some(w) if !v.is_zero() => format!("{}: nonzero (value {:e} at {:?})", name, w.value, w.point),
        _ => format!("{}: {}", name, word(v)),
    }
}

fn report_outcome(inp: BTreeMap<String, String>, rep: &InvariantReport, expect: Option<&str>) -> Outcome {
    let mut lines = vec![format!("classification: {}", rep.classification)];
    lines.extend(rep.checks.iter().map(|c| verdict_line(&c.name, &c.verdict)));
    if !rep.consistent {
        lines.push("INCONSISTENT: the checks contradict each other".into());
    }
    if let Some(want) = expect {
        lines.push(format!("expected: {}", want));
    }
    let ok = rep.consistent && expect.is_none_or(|w| w == rep.classification);
    Outcome::new(inp, serde_json::to_value(rep).unwrap(), lines).expect(ok)
}

fn ode3_equation(i: &Ode3Input, ctx: &Ctx) -> Result<ThirdOrderODE, Failure> {
    let mut params = BTreeMap::new();
    for p in &i.params {
        let (k, v) = p.split_once('=').ok_or_else(|| Failure::Input(format!("parameter `{}` is not NAME=VALUE", p)))?;
        params.insert(k.trim().to_string(), v.trim().to_string());
    }
    expr(&i.f)?;
    let f = formula(&i.f, &params).map_err(|e| Failure::Formula(i.f.clone(), e.to_string()))?;
    ThirdOrderODE::with_inferred_domain(f, ctx.domain.clone()).map_err(compute)
}

fn run_ode3(cmd: &Ode3Cmd, ctx: &Ctx) -> Result<Outcome, Failure> {
    match cmd {
        Ode3Cmd::Invariants(i) => {
            let o = ode3_equation(i, ctx)?;
            let inv = ode3_invariants(&o);
            let mut res = serde_json::Map::new();
            let mut lines = Vec::new();
            for (name, e) in inv.named() {
                let v = e.is_zero_on(&o.domain, &ctx.cfg).map_err(compute)?;
                lines.push(format!("{} = {}", name, summarize(e)));
                lines.push(verdict_line(&format!("  {}", name), &v));
                res.insert(name.into(), json!({ "expression": summarize(e), "verdict": v }));
            }
            Ok(Outcome::new(input(&[("F", &o.f)]), Value::Object(res), lines))
        }
        Ode3Cmd::Classify { input: i, expect } => {
            let o = ode3_equation(i, ctx)?;
            let (_, rep) = classify3(&o, &ctx.cfg).map_err(compute)?;
            Ok(report_outcome(input(&[("F", &o.f)]), &rep, expect.as_deref()))
        }
        Ode3Cmd::Metric(i) => {
            let o = ode3_equation(i, ctx)?;
            let g = metric_tilde(&o);
            let t = transport_check(&o, &ctx.cfg).map_err(compute)?;
            let lines = vec![
                format!("metric: {}", g.to_json()),
                verdict_line("conformal transport residual", &t.residual),
                format!("conformal: {}", t.conformal),
            ];
            let res = json!({ "metric": g.to_json(), "transport": t });
            Ok(Outcome::new(input(&[("F", &o.f)]), res, lines))
        }
        Ode3Cmd::Nu(i) => {
            let o = ode3_equation(i, ctx)?;
            let nu = nu_tilde(&o);
            let v = lie_nu_exactness(&o).zero_test(&o.domain, &ctx.cfg).map_err(compute)?;
            let lines = vec![format!("nu: {}", nu.to_json()), verdict_line("d(L_D nu)", &v)];
            Ok(Outcome::new(input(&[("F", &o.f)]), json!({ "nu": nu.to_json(), "d_lie_nu": v }), lines))
        }
    }
}

fn run_dkp(cmd: &DkpCmd, ctx: &Ctx) -> Result<Outcome, Failure> {
    match cmd {
        DkpCmd::Residual(i) => {
            let u = expr(&i.u)?;
            let r = dkp_residual(&u, &ctx.domain, &ctx.cfg).map_err(compute)?;
            let mut d = ctx.domain.clone();
            d.infer_margins(&u, odeconf::expr::DEFAULT_MARGIN);
            let s = r.scalar.is_zero_on(&d, &ctx.cfg).map_err(compute)?;
            let lines = vec![
                format!("dKP scalar = {}", summarize(&r.scalar)),
                verdict_line("dKP scalar", &s),
                format!("forms = {:?} * scalar * vol", r.factors),
                verdict_line("factor check", &r.factor_check),
            ];
            let res = json!({
                "scalar": summarize(&r.scalar),
                "scalar_verdict": s,
                "forms": [r.forms[0].to_json(), r.forms[1].to_json()],
                "factors": r.factors,
                "factor_check": r.factor_check,
            });
            let ok = r.factor_check.is_zero();
            Ok(Outcome::new(input(&[("u", &u)]), res, lines).expect(ok))
        }
        DkpCmd::Coframe { input: i, x } => {
            let u = expr(&i.u)?;
            let xe = x.as_deref().map(expr).transpose()?;
            let c = dkp_coframe(&u, xe.as_ref(), &ctx.domain, &ctx.cfg).map_err(compute)?;
            let mut lines: Vec<String> = c.forms.iter().enumerate().map(|(k, w)| format!("omega{} = {}", k + 1, w.to_json())).collect();
            if let Some(m) = &c.membership {
                lines.push(verdict_line("dX membership", m));
            }
            let mut inp = input(&[("u", &u)]);
            if let Some(xe) = &xe {
                inp.insert("x".into(), xe.to_string());
            }
            let res = json!({ "forms": c.forms.iter().map(|w| w.to_json()).collect::<Vec<_>>(), "membership": c.membership });
            let ok = c.membership.as_ref().is_none_or(|m| m.is_zero());
            Ok(Outcome::new(inp, res, lines).expect(ok))
        }
    }
}

fn run_ode2(cmd: &Ode2Cmd, ctx: &Ctx) -> Result<Outcome, Failure> {
    let build = |i: &Ode2Input| -> Result<SecondOrderODE, Failure> {
        SecondOrderODE::with_inferred_domain(expr(&i.q)?, ctx.domain.clone()).map_err(compute)
    };
    match cmd {
        Ode2Cmd::Metric(i) => {
            let o = build(i)?;
            let g = fefferman_metric(&o);
            let nd = g.check_nondegenerate(&ctx.cfg);
            let mut lines = vec![format!("metric: {}", g.to_json())];
            lines.push(match &nd {
                Ok(m) => format!("signature (2,2) at every sample; min |det| {:e}", m),
                Err(e) => format!("degenerate or wrong signature: {}", e),
            });
            let res = json!({ "metric": g.to_json(), "nondegenerate": nd.is_ok() });
            Ok(Outcome::new(input(&[("Q", &o.q)]), res, lines).expect(nd.is_ok()))
        }
        Ode2Cmd::Invariants(i) => {
            let o = build(i)?;
            let inv = ode2_invariants(&o);
            let mut lines = Vec::new();
            let mut res = serde_json::Map::new();
            for (name, e) in [("w1", &inv.w1), ("w2", &inv.w2)] {
                let v = e.is_zero_on(&o.domain, &ctx.cfg).map_err(compute)?;
                lines.push(format!("{} = {}", name, summarize(e)));
                lines.push(verdict_line(&format!("  {}", name), &v));
                res.insert(name.into(), json!({ "expression": summarize(e), "verdict": v }));
            }
            Ok(Outcome::new(input(&[("Q", &o.q)]), Value::Object(res), lines))
        }
        Ode2Cmd::Flatness { input: i, expect } => {
            let o = build(i)?;
            let rep = fefferman_flatness_check(&o, &ctx.cfg).map_err(compute)?;
            Ok(report_outcome(input(&[("Q", &o.q)]), &rep, expect.as_deref()))
        }
    }
}

fn run_monge(cmd: &MongeCmd, ctx: &Ctx) -> Result<Outcome, Failure> {
    match cmd {
        MongeCmd::Classify1 { input: i, expect } => {
            let m = MongeFirst::with_inferred_domain(expr(&i.f)?, ctx.domain.clone()).map_err(compute)?;
            let (_, rep) = classify_monge1(&m, &ctx.cfg).map_err(compute)?;
            Ok(report_outcome(input(&[("F", &m.f)]), &rep, expect.as_deref()))
        }
        MongeCmd::Classify2 { input: i, expect } => {
            let m = MongeSecond::with_inferred_domain(expr(&i.f)?, ctx.domain.clone()).map_err(compute)?;
            let (_, rep) = classify_monge2(&m, &ctx.cfg).map_err(compute)?;
            Ok(report_outcome(input(&[("F", &m.f)]), &rep, expect.as_deref()))
        }
        MongeCmd::VerifySolution { input: i, sol } => {
            let f = expr(&i.f)?;
            let text = std::fs::read_to_string(sol).map_err(|e| Failure::Input(format!("{}: {}", sol.display(), e)))?;
            let table: BTreeMap<String, String> = toml::from_str(&text).map_err(|e| Failure::Input(format!("{}: {}", sol.display(), e)))?;
            let get = |k: &str| -> Result<Expr, Failure> {
                let t = table.get(k).ok_or_else(|| Failure::Input(format!("{}: missing `{}`", sol.display(), k)))?;
                expr(t)
            };
            let s = ParametrizedSolution::new(get("x")?, get("y")?, get("z")?).map_err(compute)?;
            let uses_q = f.symbols().iter().any(|s| &**s == "q");
            let (first, second);
            let eq = if uses_q {
                second = MongeSecond::new(f.clone(), DomainBox::new()).map_err(compute)?;
                MongeEquation::Second(&second)
            } else {
                first = MongeFirst::new(f.clone(), DomainBox::new()).map_err(compute)?;
                MongeEquation::First(&first)
            };
            let v = verify_parametrized_solution(eq, &s, &ctx.domain, &ctx.cfg).map_err(compute)?;
            let inp = input(&[("F", &f), ("x", &s.x), ("y", &s.y), ("z", &s.z)]);
            let ok = v.is_zero();
            Ok(Outcome::new(inp, json!({ "residual": v }), vec![verdict_line("residual", &v)]).expect(ok))
        }
        MongeCmd::G32 { input: i, expect } => {
            let m = MongeSecond::with_inferred_domain(expr(&i.f)?, ctx.domain.clone()).map_err(compute)?;
            let g = g32_metric(&m, &ctx.cfg).map_err(compute)?;
            let v = weyl(&g).map_err(compute)?.zero_test(&ctx.cfg).map_err(compute)?;
            let ok = match expect {
                Some(Flatness::Flat) => v.is_zero(),
                Some(Flatness::Curved) => !v.is_zero(),
                None => true,
            };
            let lines = vec![format!("metric: {}", g.to_json()), verdict_line("Weyl", &v)];
            Ok(Outcome::new(input(&[("F", &m.f)]), json!({ "metric": g.to_json(), "weyl": v }), lines).expect(ok))
        }
        MongeCmd::SingleVariable { cmd } => run_single_variable(cmd, ctx),
    }
}

fn single_variable_domain(f: &Expr, ctx: &Ctx) -> DomainBox {
    let mut d = ctx.domain.clone();
    if !d.intervals().keys().any(|k| &**k == "q") {
        d.set("q", 0.5, 2.0).expect("valid interval");
    }
    d.infer_margins(f, odeconf::expr::DEFAULT_MARGIN);
    d
}

fn run_single_variable(cmd: &SingleVariableCmd, ctx: &Ctx) -> Result<Outcome, Failure> {
    match cmd {
        SingleVariableCmd::A5(i) => {
            let f = expr(&i.f)?;
            let a5 = single_variable_a5(&f).map_err(compute)?;
            let line = format!("a5 = {}", summarize(&a5));
            Ok(Outcome::new(input(&[("F", &f)]), json!({ "a5": summarize(&a5) }), vec![line]))
        }
        SingleVariableCmd::Einstein(i) => {
            let f = expr(&i.f)?;
            let d = single_variable_domain(&f, ctx);
            let r = einstein_scale_residual(&f, &ScaleRelation::quoted(&f), &d, &ctx.cfg).map_err(compute)?;
            let v = r.zero_test(&ctx.cfg).map_err(compute)?;
            let ok = v.is_zero();
            Ok(Outcome::new(input(&[("F", &f)]), json!({ "residual": v }), vec![verdict_line("Ric - (R/5) g", &v)]).expect(ok))
        }
        SingleVariableCmd::WeylPattern { input: i, expect } => {
            let f = expr(&i.f)?;
            let d = single_variable_domain(&f, ctx);
            let rep = weyl_frame_pattern_check(&f, &d, &ctx.cfg).map_err(compute)?;
            let mut out = report_outcome(input(&[("F", &f)]), &rep, expect.as_deref());
            if let Ok(g) = odeconf::monge::single_variable_metric(&f, &d, &ctx.cfg) {
                if let Ok(v) = weyl_square(&g).map_err(compute).and_then(|w| w.zero_test(&ctx.cfg).map_err(compute)) {
                    out.lines.push(verdict_line("|C|^2", &v));
                }
            }
            Ok(out)
        }
    }
}

fn run_lie(cmd: &LieCmd) -> Result<Outcome, Failure> {
    let LieCmd::Verify { system } = cmd;
    let s: LieSystem = system.parse().map_err(|e: lie::LieError| Failure::Input(e.to_string()))?;
    let r = lie::verify(s).map_err(compute)?;
    let mut lines = vec![
        format!("dimension: {}", r.dimension),
        format!("jacobi: {}", if r.jacobi.holds { "holds" } else { "fails" }),
        format!("d^2 failures: {:?}", r.d_squared_failures),
        format!("killing: rank {}, inertia {:?}", r.killing.rank, r.killing.inertia.triple()),
    ];
    if let Some(m) = &r.matrices {
        lines.push(format!("{}x{} matrices, independent {}, closed {}", m.size, m.size, m.independent, m.closure.closed));
        lines.push(format!("matches flat table: {:?}", m.matches_flat_system));
        let b = &m.invariant_bilinear_form;
        lines.push(format!("invariant bilinear forms: {} (generic inertia {:?})", b.dimension, b.generic_inertia.map(|i| i.triple())));
        if let Some(t) = &m.invariant_three_form {
            lines.push(format!("invariant 3-forms: {}, generic {}", t.dimension, t.generic));
        }
    }
    let ok = r.consistent();
    let inp = BTreeMap::from([("system".to_string(), s.name().to_string())]);
    Ok(Outcome::new(inp, serde_json::to_value(&r).unwrap(), lines).expect(ok))
}

fn run_verify(ctx: &Ctx) -> Result<Outcome, Failure> {
    let s = verify_paper(&ctx.config).map_err(compute)?;
    let mut lines: Vec<String> = s
        .claims
        .iter()
        .map(|c| {
            let tag = match (c.pass, c.failure) {
                (true, _) => "PASS".to_string(),
                (false, Some(k)) => format!("FAIL[{}]", serde_json::to_value(k).unwrap().as_str().unwrap_or("")),
                (false, None) => "FAIL".into(),
            };
            let extra = if c.pass { String::new() } else { format!("  {}", c.mismatches.join("; ")) };
            format!("{:<16} {} ({:?}){}", tag, c.id, c.basis, extra)
        })
        .collect();
    lines.push(format!(
        "{}/{} passed; {} logical, {} numerical-headroom failures",
        s.passed, s.total, s.logical_failures, s.headroom_failures
    ));
    let ok = s.all_pass();
    Ok(Outcome::new(BTreeMap::new(), serde_json::to_value(&s).unwrap(), lines).expect(ok))
}

fn command_name(c: &Command) -> String {
    let sub = match c {
        Command::Ode3 { cmd } => match cmd {
            Ode3Cmd::Invariants(_) => "ode3 invariants",
            Ode3Cmd::Classify { .. } => "ode3 classify",
            Ode3Cmd::Metric(_) => "ode3 metric",
            Ode3Cmd::Nu(_) => "ode3 nu",
        },
        Command::Dkp { cmd } => match cmd {
            DkpCmd::Residual(_) => "dkp residual",
            DkpCmd::Coframe { .. } => "dkp coframe",
        },
        Command::Ode2 { cmd } => match cmd {
            Ode2Cmd::Metric(_) => "ode2 metric",
            Ode2Cmd::Invariants(_) => "ode2 invariants",
            Ode2Cmd::Flatness { .. } => "ode2 flatness",
        },
        Command::Monge { cmd } => match cmd {
            MongeCmd::Classify1 { .. } => "monge classify1",
            MongeCmd::Classify2 { .. } => "monge classify2",
            MongeCmd::VerifySolution { .. } => "monge verify-solution",
            MongeCmd::G32 { .. } => "monge g32",
            MongeCmd::SingleVariable { cmd } => match cmd {
                SingleVariableCmd::A5(_) => "monge example6 a5",
                SingleVariableCmd::Einstein(_) => "monge example6 einstein",
                SingleVariableCmd::WeylPattern { .. } => "monge example6 weyl-pattern",
            },
        },
        Command::Lie { .. } => "lie verify",
        Command::Verify { .. } => "verify paper",
    };
    sub.into()
}

fn context(g: &Global) -> Result<Ctx, Failure> {
    let mut config = match &g.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Config(format!("{}: {}", p.display(), e)))?;
            RunConfig::from_toml(&text).map_err(|e| Failure::Config(e.to_string()))?
        }
        None => RunConfig::default(),
    };
    if let Some(t) = g.tol {
        config.tol = t;
    }
    if let Some(s) = g.samples {
        config.samples = s;
    }
    if let Some(s) = g.seed {
        config.seed = s;
    }
    if g.catalog.is_some() {
        config.catalog = g.catalog.clone();
    }
    config.validate().map_err(|e| Failure::Config(e.to_string()))?;
    let mut domain = DomainBox::new();
    for b in &g.boxes {
        domain.apply_spec(b).map_err(|e| Failure::Box(b.clone(), e.to_string()))?;
    }
    Ok(Ctx { cfg: config.zero_test(), config, domain })
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let ctx = context(&cli.global)?;
    match &cli.command {
        Command::Ode3 { cmd } => run_ode3(cmd, &ctx),
        Command::Dkp { cmd } => run_dkp(cmd, &ctx),
        Command::Ode2 { cmd } => run_ode2(cmd, &ctx),
        Command::Monge { cmd } => run_monge(cmd, &ctx),
        Command::Lie { cmd } => run_lie(cmd),
        Command::Verify { cmd: VerifyCmd::Paper } => run_verify(&ctx),
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{}", text);
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let name = command_name(&cli.command);
    match run(&cli) {
        Ok(out) => {
            if cli.global.json {
                let config = context(&cli.global).map(|c| (c.config, c.domain.describe())).ok();
                let report = json!({
                    "command": name,
                    "input": out.input,
                    "config": config.as_ref().map(|c| serde_json::to_value(&c.0).unwrap()),
                    "box": config.as_ref().map(|c| c.1.clone()),
                    "expected": out.expected,
                    "result": out.result,
                    "seconds": start.elapsed().as_secs_f64(),
                });
                emit(&serde_json::to_string_pretty(&report).unwrap());
            } else {
                emit(&out.lines.join("\n"));
            }
            if out.expected {
                ExitCode::SUCCESS
            } else {
                if !cli.global.json {
                    eprintln!("mismatch: the result differs from what was expected");
                }
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(2)
        }
    }
}
