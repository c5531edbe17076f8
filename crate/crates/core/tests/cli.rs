use std::path::Path;
use std::process::{Command, Output};

use pathint::paths::io;
use pathint::SampledPath;
use serde_json::Value;
use tempfile::TempDir;

fn pathint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pathint"))
        .args(args)
        .env_remove("PATHINT_SEED")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn save(dir: &TempDir, name: &str, path: &SampledPath) -> String {
    let file = dir.path().join(name);
    io::save(path, &file).unwrap();
    file.to_str().unwrap().to_string()
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_writes_requested_grid() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("x.csv");
    let out = pathint(&["simulate", "--kind", "brownian", "--n", "257", "--seed", "3", "--out", arg(&file)]);
    assert!(out.status.success());
    let x = io::load(&file).unwrap();
    assert_eq!(x.len(), 257);
    assert_eq!(x.first(), 0.0);
    assert_eq!(x.horizon(), 1.0);
}

#[test]
fn simulate_is_reproducible_and_seed_env_is_honoured() {
    let a = pathint(&["simulate", "--n", "65", "--seed", "11"]);
    let b = Command::new(env!("CARGO_BIN_EXE_pathint"))
        .args(["simulate", "--n", "65"])
        .env("PATHINT_SEED", "11")
        .output()
        .unwrap();
    let c = pathint(&["simulate", "--n", "65", "--seed", "12"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn gls_of_smooth_pair_reports_two_thirds() {
    let dir = TempDir::new().unwrap();
    let f = save(&dir, "f.csv", &SampledPath::from_fn(1.0, 1025, |s| s).unwrap());
    let g = save(&dir, "g.csv", &SampledPath::from_fn(1.0, 1025, |s| s * s).unwrap());
    let v = stdout_json(&pathint(&["gls", "--f", &f, "--g", &g, "--beta", "0.5"]));
    assert_eq!(v["command"], "gls");
    assert!(v["schema_version"].is_u64());
    assert!((v["value"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-6);
    assert!(v["value"].as_f64().unwrap().abs() <= v["apriori_bound"].as_f64().unwrap());
}

#[test]
fn rs_sum_and_pvar_commands() {
    let dir = TempDir::new().unwrap();
    let f = save(&dir, "f.csv", &SampledPath::from_fn(1.0, 5, |_| 2.0).unwrap());
    let g = save(&dir, "g.csv", &SampledPath::from_fn(1.0, 5, |s| 3.0 * s).unwrap());
    let v = stdout_json(&pathint(&["rs-sum", "--f", &f, "--g", &g, "--partition", "uniform:2"]));
    assert!((v["value"].as_f64().unwrap() - 6.0).abs() < 1e-12);

    let zigzag = SampledPath::uniform(1.0, vec![0.0, 1.0, 0.0, 1.0, 0.0], "").unwrap();
    let z = save(&dir, "z.csv", &zigzag);
    let v = stdout_json(&pathint(&["pvar", "--input", &z, "--p", "2", "--sup"]));
    assert_eq!(v["supremum"].as_f64().unwrap(), 4.0);
    assert_eq!(v["exact"], true);
    let v = stdout_json(&pathint(&["pvar", "--input", &z, "--p", "1", "--partition", "dyadic:1"]));
    assert_eq!(v["value"].as_f64().unwrap(), 0.0);
}

#[test]
fn frac_deriv_round_trips_through_csv() {
    let dir = TempDir::new().unwrap();
    let input = save(&dir, "lin.csv", &SampledPath::from_fn(1.0, 129, |s| s).unwrap());
    let out = dir.path().join("d.csv");
    let status = pathint(&["frac-deriv", "--input", &input, "--beta", "0.5", "--out", arg(&out)]).status;
    assert!(status.success());
    let d = io::load(&out).unwrap();
    assert_eq!(d.len(), 129);
    // D^{1/2} t = 2 sqrt(t / π).
    assert!((d.last() - 2.0 / std::f64::consts::PI.sqrt()).abs() < 1e-9);
}

#[test]
fn verify_ito_writes_versioned_report() {
    let dir = TempDir::new().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(&spec, r#"{"kind":{"type":"fbm","hurst":0.75},"horizon":1.0,"grid_size":2,"seed":0}"#).unwrap();
    let report = dir.path().join("report.json");
    let out = pathint(&[
        "verify-ito", "--kind", "convex", "--spec", arg(&spec), "--grids", "6..8", "--seeds", "2",
        "--mollifier-scales", "", "--tolerance", "1.0", "--out", arg(&report),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["command"], "verify-ito");
    assert_eq!(v["name"], "ito_convex");
    assert_eq!(v["rows"].as_array().unwrap().len(), 6);
    assert!(["pass", "fail"].contains(&v["verdict"].as_str().unwrap()));
}

#[test]
fn invalid_order_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let input = save(&dir, "lin.csv", &SampledPath::from_fn(1.0, 9, |s| s).unwrap());
    let out = pathint(&["frac-deriv", "--input", &input, "--beta", "1.5"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("error kind=validation"), "{err}");
}

#[test]
fn usage_errors_and_help() {
    assert_eq!(pathint(&["gls", "--bogus"]).status.code(), Some(1));
    assert_eq!(pathint(&["--help"]).status.code(), Some(0));
    let missing = pathint(&["pvar", "--input", "/nonexistent/path.csv", "--p", "2"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("error kind=io"));
}
