use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kr")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_writes_artifacts_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#"{"scenario": "KR-1R", "seed": 3, "n_sets": 80}"#);
    let out = dir.path().join("out");
    let output = kr(&["run", "--config", &config, "--out", out.to_str().unwrap()]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let summary: Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(summary["words"], 80);
    assert_eq!(summary["report"]["resonance"]["detected"], true);
    let manifest: Value = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["run_hash"], summary["run_hash"]);
    assert!(!out.join("hidden_eps.csv").exists());
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#"{"scenario": "KR-1", "seed": 3, "n_sets": 4}"#);
    let a: Value = serde_json::from_slice(&kr(&["simulate", "--config", &config, "--seed", "9"]).stdout).unwrap();
    let b: Value = serde_json::from_slice(&kr(&["simulate", "--config", &config]).stdout).unwrap();
    assert_eq!(a["seed"], 9);
    assert_ne!(a["run_hash"], b["run_hash"]);
}

#[test]
fn reveal_hidden_writes_ground_truth() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#"{"scenario": "KR-1", "seed": 3, "n_sets": 4}"#);
    let out = dir.path().join("out");
    let output = kr(&["simulate", "--config", &config, "--out", out.to_str().unwrap(), "--reveal-hidden"]);
    assert!(output.status.success());
    assert!(out.join("hidden_eps.csv").exists());
}

#[test]
fn validation_error_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#"{"scenario": "KR-1", "seed": 3, "alphabet": 1}"#);
    let output = kr(&["run", "--config", &config]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("validation"));
    let config = write_config(dir.path(), "{not json");
    assert_eq!(kr(&["bet", "--config", &config]).status.code(), Some(2));
}

#[test]
fn runtime_error_exits_three() {
    let output = kr(&["verbalize", "--config", "/nonexistent/config.json"]);
    assert_eq!(output.status.code(), Some(3));
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#"{"scenario": "KR-1", "seed": 3, "n_sets": 20}"#);
    // twenty sets are too few for the resonance analysis
    assert_eq!(kr(&["resonance", "--config", &config]).status.code(), Some(3));
}

#[test]
fn bet_stage_reports_backtest() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#"{"scenario": "KR-1R", "seed": 5, "n_sets": 60}"#);
    let output = kr(&["bet", "--config", &config]);
    assert!(output.status.success());
    let summary: Value = serde_json::from_slice(&output.stdout).unwrap();
    assert!(summary["report"]["backtest"]["bets"].as_u64().unwrap() > 0);
    assert!(summary["report"]["timescale_ratio"].is_number());
    assert!(summary["report"]["resonance"].is_null());
}

#[test]
fn serve_rejects_bad_default_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#"{"scenario": "KR-2", "seed": 3}"#);
    let output = kr(&["serve", "--config", &config, "--addr", "127.0.0.1:0"]);
    assert_eq!(output.status.code(), Some(2));
}
