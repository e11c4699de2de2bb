use std::process::{Command, Output};

use odeconf::expr::{parse, zero_test_exprs, DomainBox, ZeroTestConfig};
use serde_json::Value;

fn odeconf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_odeconf")).args(args).env_remove("ODECONF_CONFIG").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn validator() -> jsonschema::Validator {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/schema/report.schema.json")).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.push("--json");
    let o = odeconf(&all);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{:?}: {}\n{}", args, e, stderr(&o)));
    let errors: Vec<String> = validator().iter_errors(&v).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{:?}: {:?}", args, errors);
    (code(&o), v)
}

#[test]
fn classify_three_halves_power() {
    let o = odeconf(&["ode3", "classify", "--F", "q^(3/2)", "--box", "q:0.1:10"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("classification: einstein-weyl"));
}

#[test]
fn classify2_reports_g2() {
    let (c, v) = json(&["monge", "classify2", "--F", "q^2+y"]);
    assert_eq!(c, 0);
    assert_eq!(v["result"]["classification"], "g2");
}

#[test]
fn usage_errors_exit_two_with_distinct_messages() {
    let formula = odeconf(&["ode3", "classify", "--F", "q^(3/2"]);
    let boxed = odeconf(&["ode3", "classify", "--F", "q", "--box", "q:3:1"]);
    let spec = odeconf(&["ode3", "classify", "--F", "q", "--box", "q-3-1"]);
    let sub = odeconf(&["ode3", "bogus"]);
    let system = odeconf(&["lie", "verify", "nope"]);
    let samples = odeconf(&["ode3", "classify", "--F", "q", "--samples", "2"]);
    for o in [&formula, &boxed, &spec, &sub, &system, &samples] {
        assert_eq!(code(o), 2, "{}", stderr(o));
    }
    assert!(stderr(&formula).contains("malformed formula"));
    assert!(stderr(&boxed).contains("invalid box") && stderr(&boxed).contains("empty interval"));
    assert!(stderr(&spec).contains("invalid box") && stderr(&spec).contains("expected sym:lo:hi"));
    assert!(stderr(&sub).contains("unrecognized subcommand"));
    assert!(stderr(&system).contains("unknown system"));
    assert!(stderr(&samples).contains("invalid configuration"));
}

#[test]
fn mismatch_exits_one() {
    assert_eq!(code(&odeconf(&["ode3", "classify", "--F", "q^2", "--expect", "wuenschmann"])), 1);
    assert_eq!(code(&odeconf(&["ode3", "classify", "--F", "q^2", "--expect", "generic"])), 0);
    assert_eq!(code(&odeconf(&["monge", "g32", "--F", "q^2", "--expect", "curved"])), 1);
}

#[test]
fn exit_codes_are_deterministic() {
    let a = odeconf(&["ode2", "flatness", "--Q", "p^3", "--expect", "flat", "--seed", "4"]);
    let b = odeconf(&["ode2", "flatness", "--Q", "p^3", "--expect", "flat", "--seed", "4"]);
    assert_eq!((code(&a), a.stdout), (code(&b), b.stdout));
}

#[test]
fn reports_validate_and_formulas_reparse() {
    let dir = std::env::temp_dir().join(format!("odeconf-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let sol = dir.join("sol.toml");
    std::fs::write(&sol, "x = \"t\"\ny = \"t^2\"\nz = \"4*t^3/3\"\n").unwrap();
    let sol = sol.to_str().unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["ode3", "invariants", "--F", "q^(3/2)", "--box", "q:0.1:10"],
        vec![
            "ode3",
            "classify",
            "--F",
            "sqrt(a*(2*q*y - p^2))^3/y^2",
            "--param",
            "a=1",
            "--box",
            "y:0.5:2",
            "--box",
            "q:0.5:2",
            "--box",
            "p:-0.5:0.5",
            "--expect",
            "einstein-weyl",
        ],
        vec!["ode3", "metric", "--F", "0"],
        vec!["ode3", "nu", "--F", "q^3"],
        vec!["dkp", "residual", "--u", "sqrt(2*x)", "--box", "x:0.2:2"],
        vec!["dkp", "coframe", "--u", "sqrt(2*x)", "--x", "t + v^2/2 + sqrt(2*x)", "--box", "x:0.2:2"],
        vec!["ode2", "metric", "--Q", "p^2"],
        vec!["ode2", "invariants", "--Q", "p^4"],
        vec!["ode2", "flatness", "--Q", "y"],
        vec!["monge", "classify1", "--F", "p^2"],
        vec!["monge", "verify-solution", "--F", "p^2", "--sol", sol],
        vec!["monge", "example6", "a5", "--F", "q^3/6"],
        vec!["monge", "example6", "weyl-pattern", "--F", "q^3/6"],
        vec!["lie", "verify", "conpoint"],
    ];
    for args in runs {
        let (c, v) = json(&args);
        assert_eq!(c, 0, "{:?}", args);
        for (k, text) in v["input"].as_object().unwrap() {
            let printed = parse(text.as_str().unwrap()).unwrap_or_else(|e| panic!("{:?} {}: {}", args, k, e));
            let flag = args.iter().position(|a| a.trim_start_matches('-').eq_ignore_ascii_case(k));
            if let (Some(i), false) = (flag, args.contains(&"--param")) {
                let original = parse(args[i + 1]).unwrap();
                let d = DomainBox::new().with("q", 0.1, 2.0).unwrap().with("x", 0.2, 2.0).unwrap();
                let r = zero_test_exprs(&[printed - original], &d, &ZeroTestConfig::default()).unwrap();
                assert!(r.is_zero(), "{:?}: `{}` does not re-parse to the input", args, k);
            }
        }
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn config_file_from_environment() {
    let dir = std::env::temp_dir().join(format!("odeconf-cfg-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("run.toml");
    std::fs::write(&path, "tol = 1e-10\nsamples = 7\nseed = 3\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_odeconf"))
        .args(["ode2", "flatness", "--Q", "0", "--json"])
        .env("ODECONF_CONFIG", &path)
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!((v["config"]["samples"].as_u64(), v["config"]["seed"].as_u64()), (Some(7), Some(3)));
    let o = Command::new(env!("CARGO_BIN_EXE_odeconf"))
        .args(["ode2", "flatness", "--Q", "0", "--json", "--samples", "9"])
        .env("ODECONF_CONFIG", &path)
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["config"]["samples"].as_u64(), Some(9));
    std::fs::write(&path, "tol = -1\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_odeconf")).args(["lie", "verify", "caln"]).env("ODECONF_CONFIG", &path).output().unwrap();
    assert_eq!(code(&o), 2);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn verify_paper_exits_zero_and_validates() {
    let (c, v) = json(&["verify", "paper"]);
    assert_eq!(c, 0);
    let claims = v["result"]["claims"].as_array().unwrap();
    assert!(claims.len() > 50);
    let ids: Vec<&str> = claims.iter().map(|c| c["id"].as_str().unwrap()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
}
