use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_contextium"));
    c.env_remove("CONTEXTIUM_SEED");
    c
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .display()
        .to_string()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn num(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

#[test]
fn kcbs_report_is_byte_identical() {
    let a = run(&["kcbs-report", "--format", "json"]);
    let b = run(&["kcbs-report", "--format", "json"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!((num(&v["kappa"]) - 3.0 * 6f64.sqrt()).abs() < 1e-9);
    assert!((num(&v["per_context_product_0z"]) - 4.0 * (5f64.sqrt() - 1.0) / 5.0).abs() < 1e-9);
}

#[test]
fn optimize_is_byte_identical() {
    let args = ["optimize", "--n", "5", "--seed", "42", "--format", "json"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let single = run(&[
        "optimize",
        "--n",
        "5",
        "--seed",
        "42",
        "--format",
        "json",
        "--threads",
        "1",
    ]);
    assert_eq!(a.stdout, single.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!((num(&v["best_value"]) - 4.0 * (5f64.sqrt() - 1.0)).abs() < 2e-3);
}

#[test]
fn seed_from_environment() {
    let with_env = bin()
        .args(["kcbs-report", "--format", "json"])
        .env("CONTEXTIUM_SEED", "7")
        .output()
        .unwrap();
    let with_flag = run(&["kcbs-report", "--format", "json", "--seed", "7"]);
    let default = run(&["kcbs-report", "--format", "json"]);
    assert_eq!(with_env.stdout, with_flag.stdout);
    assert_ne!(with_env.stdout, default.stdout);
    let flag_wins = bin()
        .args(["kcbs-report", "--format", "json", "--seed", "42"])
        .env("CONTEXTIUM_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(flag_wins.stdout, default.stdout);
}

#[test]
fn mie_on_fixtures() {
    let v = json(&["mie", "--scenario", "kcbs", "--context", "G1", "--format", "json"]);
    assert!((num(&v[0]["E"]) - 0.6852427).abs() < 1e-6);
    let v = json(&[
        "mie",
        "--scenario",
        &fixture("commuting.json"),
        "--format",
        "json",
    ]);
    assert!((num(&v[0]["E"]) - 1.0).abs() < 1e-12);
    let v = json(&["mie", "--scenario", &fixture("mub.json"), "--format", "json"]);
    assert!((num(&v[0]["E"]) - 1.0 / 3.0).abs() < 1e-10);
    assert!(num(&v[0]["delta"]) < 1e-10);
    let v = json(&["mie", "--scenario", &fixture("kcbs.json"), "--format", "json"]);
    assert_eq!(v.as_array().unwrap().len(), 5);
}

#[test]
fn bounds_report() {
    let v = json(&["bounds", "--state", "+1z", "--format", "json"]);
    assert!((num(&v["totals"]["hybrid_bound"]) - 5.0 * 4.0 * (5f64.sqrt() - 2.0).sqrt()).abs() < 1e-9);
    assert!((num(&v["totals"]["d_value"]) - 6.50).abs() < 0.02);
    assert_eq!(v["contexts"][0]["name"], "G1");
    let v = json(&["bounds", "--state", "0z", "--format", "json"]);
    assert!(num(&v["totals"]["d_value"]).abs() < 1e-10);
    let v = json(&["bounds", "--state", "mixed", "--format", "json"]);
    assert!((num(&v["beta"]) - 1.0 / 3.0).abs() < 1e-12);
    let spectral = num(&v["contexts"][0]["spectral_bound"]);
    let purity = num(&v["contexts"][0]["purity_bound"]);
    assert!((purity - spectral / 3f64.sqrt()).abs() < 1e-12);
}

#[test]
fn csv_and_table_formats() {
    let out = run(&["bounds", "--state", "+1z", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 7);
    assert!(lines[0].starts_with("context,E,one_minus_E"));
    let out = run(&["kcbs-report"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("kappa                     7.34847"));
}

#[test]
fn majorana_conversions() {
    let v = json(&["majorana", "--stars", "0,0;3.14159,0", "--format", "json"]);
    let amp = v["amplitudes"].as_array().unwrap();
    assert!((num(&amp[1][0]) - 1.0).abs() < 1e-10);
    assert!(num(&amp[0][0]).abs() < 1e-5 && num(&amp[2][0]).abs() < 1e-5);
    let v = json(&[
        "majorana",
        "--amplitudes",
        "0,0;1,0;0,0",
        "--direction",
        "0,0",
        "--format",
        "json",
    ]);
    assert!(num(&v["stars"]["m"]["theta"]).abs() < 1e-12);
    assert!((num(&v["stars"]["n"]["theta"]) - std::f64::consts::PI).abs() < 1e-12);
    assert!((num(&v["triad"]["zero_population"]) - 1.0).abs() < 1e-12);
    assert!((num(&v["triad"]["zero_population_bargmann"]) - 1.0).abs() < 1e-12);
}

#[test]
fn surface_csv() {
    let out = run(&[
        "surface",
        "--context",
        "1",
        "--resolution",
        "20",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("theta_m,phi_m,theta_n,phi_n,residual_1"));
    let rows: Vec<&str> = lines.collect();
    assert!(!rows.is_empty());
    for r in rows {
        let res: f64 = r.rsplit(',').next().unwrap().parse().unwrap();
        assert!(res.abs() <= 1e-3);
    }
}

#[test]
fn validate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scenario.json");
    let out = run(&["validate", "--scenario", "kcbs", "--format", "json"]);
    std::fs::write(&path, &out.stdout).unwrap();
    let p = path.display().to_string();
    let again = run(&["validate", "--scenario", &p, "--format", "json"]);
    assert_eq!(out.stdout, again.stdout);
    let a = json(&[
        "bounds",
        "--scenario",
        "kcbs",
        "--state",
        "+1z",
        "--format",
        "json",
    ]);
    let b = json(&["bounds", "--scenario", &p, "--state", "+1z", "--format", "json"]);
    assert_eq!(a["contexts"], b["contexts"]);
    assert_eq!(a["totals"], b["totals"]);
    let fixture_text = std::fs::read_to_string(fixture("kcbs.json")).unwrap();
    assert_eq!(fixture_text.as_bytes(), &out.stdout[..]);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["mie", "--context", "G9"]).status.code(), Some(2));
    assert_eq!(run(&["bounds", "--state", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(run(&["majorana", "--stars", "1,2"]).status.code(), Some(2));
    assert_eq!(run(&["majorana"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let text = std::fs::read_to_string(fixture("mub.json")).unwrap();
    let mut doc: Value = serde_json::from_str(&text).unwrap();
    doc["contexts"][0]["B"] = Value::String("X".into());
    std::fs::write(&bad, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = run(&["mie", "--scenario", &bad.display().to_string()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("do not commute"));

    let missing = dir.path().join("missing.json").display().to_string();
    assert_eq!(run(&["validate", "--scenario", &missing]).status.code(), Some(3));
    assert_eq!(run(&["optimize", "--n", "9"]).status.code(), Some(3));
    assert_eq!(run(&["surface", "--resolution", "1"]).status.code(), Some(3));
}
