use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dualwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dualwave")).args(args).output().expect("binary runs")
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("error report is JSON")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_exits_zero() {
    let out = dualwave(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("minimize"));
}

#[test]
fn transform_table_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.csv");
    let out = dualwave(&["transform-table", "--tmax", "4", "--samples", "5", "--out", path_str(&path)]);
    assert_eq!(out.status.code(), Some(0));
    let mut rd = csv::Reader::from_path(&path).unwrap();
    assert_eq!(rd.headers().unwrap(), vec!["t", "f", "fprime"]);
    let rows: Vec<Vec<f64>> =
        rd.records().map(|r| r.unwrap().iter().map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 5);
    for r in &rows {
        assert!((r[2] - 1.0 / (1.0 + 2.0 * r[1] * r[1]).sqrt()).abs() < 1e-15);
    }
    // f^{-1}(s) in closed form
    let s: f64 = rows[4][1];
    let t = s * (1.0 + 2.0 * s * s).sqrt() / 2.0 + (2f64.sqrt() * s).asinh() / (2.0 * 2f64.sqrt());
    assert!((t - 4.0).abs() < 1e-12);
}

#[test]
fn malformed_json_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{").unwrap();
    let out = dualwave(&["minimize", "--mode", "F", "--config", path_str(&cfg)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"], "config");
}

#[test]
fn schema_errors_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"N": 2, "nonlinearity": {"variant": "power", "p": "seven"}}"#).unwrap();
    let out = dualwave(&["minimize", "--mode", "sigma", "--config", path_str(&cfg)]);
    assert_eq!(out.status.code(), Some(1));
    let msg = stderr_json(&out)["message"].as_str().unwrap().to_string();
    assert!(msg.starts_with("$.nonlinearity"), "{msg}");

    let out = dualwave(&["minimize", "--mode", "F", "--set", "p=3", "--set", "tolerance=1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["message"], "$.tolerance: unknown key");
}

#[test]
fn unknown_suite_is_a_config_error() {
    assert_eq!(dualwave(&["check", "--suite", "nope"]).status.code(), Some(1));
}

#[test]
fn nonexistence_regime_is_refused_with_a_result() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let out = dualwave(&["minimize", "--mode", "sigma", "--set", "p=12", "--set", "N=3", "--out", path_str(&path)]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["exit_code"], 3);
    let v: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(v["status"], "nonexistence_regime");
    assert!(v["psi"].is_null());
}

#[test]
fn curve_writes_the_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.csv");
    let out = dualwave(&[
        "curve", "--mode", "F", "--a-grid", "0.01:0.01:log1", "--set", "p=5", "--set", "N=2", "--out", path_str(&path),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let mut rd = csv::Reader::from_path(&path).unwrap();
    assert_eq!(rd.headers().unwrap(), vec!["a", "status", "psi", "lambda", "G_residual"]);
    let row = rd.records().next().unwrap().unwrap();
    assert_eq!(&row[1], "vanishing");
    assert!(row[2].parse::<f64>().unwrap().abs() <= 1e-3);
}

#[test]
fn bad_mass_grid_is_rejected() {
    let out = dualwave(&["curve", "--mode", "F", "--a-grid", "2:1:lin3", "--set", "p=3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn fast_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = dualwave(&["check", "--suite", "f-properties", "--out", path_str(&path)]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    let report = if v.is_array() { v[0].clone() } else { v };
    assert_eq!(report["passed"], true);
}
