use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn coherence(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coherence")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON output")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn measures_of_bloch_file() {
    let dir = tempfile::tempdir().unwrap();
    let state = write(dir.path(), "x.json", r#"{"dim": 2, "bloch": [0.6, 0.0, 0.0]}"#);
    let v = json(&coherence(&["measures", &state]));
    assert!((v["l1"].as_f64().unwrap() - 0.6).abs() < 1e-12);
    assert!((v["qubit-analytic"].as_f64().unwrap() - 0.4690).abs() < 1e-4);
    assert_eq!(v["roof-randomness-exact"], Value::Bool(true));
}

#[test]
fn invalid_state_exits_with_named_error() {
    let dir = tempfile::tempdir().unwrap();
    let state = write(dir.path(), "bad.json", r#"{"dim": 2, "entries": [[1.5,0],[0,0],[0,0],[-0.5,0]]}"#);
    let out = coherence(&["measures", &state]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("positive semidefinite"));
    // A looser tolerance does not admit a clearly negative eigenvalue.
    assert_eq!(coherence(&["--tol", "1e-3", "measures", &state]).status.code(), Some(2));
}

#[test]
fn roof_emits_a_reloadable_decomposition() {
    let dir = tempfile::tempdir().unwrap();
    let state = write(dir.path(), "q.json", r#"{"dim": 2, "bloch": [0.3, -0.4, 0.2]}"#);
    let v = json(&coherence(&["roof", &state, "--restarts", "4", "--seed", "3"]));
    assert_eq!(v["restarts_used"], 4);
    let file = write(dir.path(), "out.json", &v["state"].to_string());
    let reloaded = json(&coherence(&["measures", &file]));
    let analytic = reloaded["qubit-analytic"].as_f64().unwrap();
    assert!((v["value"].as_f64().unwrap() - analytic).abs() < 1e-6);
}

#[test]
fn verify_reports_each_property() {
    let out = coherence(&["verify", "--samples", "40", "--max-dim", "3", "--measures", "l1,qubit-analytic"]);
    let reports = json(&out);
    let reports = reports.as_array().unwrap();
    assert_eq!(reports.len(), 4 + 5);
    assert!(reports.iter().all(|r| r["passed"] == Value::Bool(true)));
    assert!(reports.iter().any(|r| r["property"] == "C1'"));
    assert_eq!(coherence(&["verify", "--measures", "nope"]).status.code(), Some(2));
}

#[test]
fn distill_modes() {
    let v = json(&coherence(&["distill", "--alpha-sq", "0.8", "--n", "50", "--m", "20", "--seed", "1"]));
    assert_eq!(v["outcomes"].as_array().unwrap().len(), 20);
    assert!(v["yield"].as_f64().unwrap() > 0.5);
    let v = json(&coherence(&["distill", "--alpha-sq", "0.5", "--n", "4", "--exact"]));
    assert!((v["outcomes"][2]["probability"].as_f64().unwrap() - 0.375).abs() < 1e-12);
    assert_eq!(coherence(&["distill", "--alpha-sq", "0.5", "--n", "21", "--exact"]).status.code(), Some(2));
}

#[test]
fn sample_writes_stream_file() {
    let dir = tempfile::tempdir().unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let state = write(dir.path(), "plus.json", &format!(r#"{{"dim": 2, "amplitudes": [[{h}, 0], [0, {h}]]}}"#));
    let stream = dir.path().join("s.txt");
    let v = json(&coherence(&["sample", &state, "--n", "1000", "--seed", "7", "--output", stream.to_str().unwrap()]));
    assert!((v["empirical_entropy"].as_f64().unwrap() - 1.0).abs() < 0.01);
    let text = std::fs::read_to_string(&stream).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("dim=2 seed=7"));
    assert_eq!(lines.filter(|l| *l == "0" || *l == "1").count(), 1000);
}

#[test]
fn pipeline_report() {
    let v = json(&coherence(&["pipeline", "--alpha-sq", "0.8", "--n-groups", "20", "--entropy", "min"]));
    assert_eq!(v["entropy_kind"], "min");
    assert!(v["path_a_bits"].as_u64().unwrap() > 0);
}
