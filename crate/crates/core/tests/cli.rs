//! The binary: goldens, exit codes, error locations and byte-identical reruns.

use std::fs;
use std::process::{Command, Output};

fn equifit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_equifit")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn theta_golden_for_q_i_with_t5() {
    let o = equifit(&["theta", "--conductor", "4", "--S", "2,inf", "--T", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "{\"sigma_1\":\"-1\",\"sigma_3\":\"1\"}\n");
}

#[test]
fn theta_from_config_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("theta.json");
    fs::write(&p, r#"{"conductor": 3, "S": ["3", "inf"]}"#).unwrap();
    let a = equifit(&["theta", "--config", p.to_str().unwrap()]);
    let b = equifit(&["theta", "--conductor", "3", "--S", "3,inf"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(stdout(&a), "{\"sigma_1\":\"1/6\",\"sigma_2\":\"-1/6\"}\n");
}

#[test]
fn missing_config_exits_two() {
    let o = equifit(&["kurihara", "--config", "/nonexistent/k.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/k.json"));
}

#[test]
fn malformed_config_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    fs::write(&p, "{\n  \"conductor\": 4,\n  \"p\": 3,\n  \"T\": [5],\n  \"colour\": 1\n}\n").unwrap();
    let o = equifit(&["kurihara", "--config", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr).to_string();
    assert!(err.contains("bad.json") && err.contains("colour") && err.contains("line 5"), "{err}");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(equifit(&["theta"]).status.code(), Some(2));
    assert_eq!(equifit(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(equifit(&["kurihara", "--curated", "nope"]).status.code(), Some(2));
}

#[test]
fn kurihara_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("k.json");
    fs::write(&p, r#"{"conductor": 23, "subgroup_gens": [2], "p": 3, "T": [5]}"#).unwrap();
    let a = equifit(&["kurihara", "--config", p.to_str().unwrap()]);
    let b = equifit(&["kurihara", "--config", p.to_str().unwrap()]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let j: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(j["schema"], "equifit-report/1");
    assert_eq!(j["verdict"], "pass");
    assert!(j.get("timings_ms").is_none());
}

#[test]
fn uncurated_field_is_report_only_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("k.json");
    fs::write(&p, r#"{"conductor": 47, "subgroup_gens": [2], "p": 3, "T": [5]}"#).unwrap();
    let o = equifit(&["kurihara", "--config", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let j: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(j["verdict"], "report-only");
}

#[test]
fn curated_instances_all_pass() {
    let o = equifit(&["kurihara", "--curated", "all"]);
    assert_eq!(o.status.code(), Some(0));
    let j: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(j["verdict"], "pass");
    assert_eq!(j["checks"].as_array().unwrap().len(), 13);
}

#[test]
fn tower_report_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("t.json");
    let out = dir.path().join("r.json");
    fs::write(&cfg, r#"{"conductor": 4, "p": 3, "depth": 2, "S": ["inf"], "T": ["5"]}"#).unwrap();
    let o = equifit(&["tower", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let j: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(j["verdict"], "pass");
    assert_eq!(j["checks"][0]["detail"]["n0"], 0);
}

#[test]
fn tower_rejects_p_dividing_group_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("t.json");
    fs::write(&cfg, r#"{"conductor": 7, "p": 3, "depth": 1, "T": ["13"]}"#).unwrap();
    let o = equifit(&["tower", "--config", cfg.to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn symbolic_local_factor_is_refused_not_guessed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("t.json");
    fs::write(&cfg, r#"{"conductor": 4, "p": 3, "depth": 1, "S": ["inf", "3"], "T": ["5"]}"#).unwrap();
    let o = equifit(&["tower", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("symbolic"));
}

#[test]
fn small_suite_is_reproducible() {
    let args = ["suite", "--max-group-order", "4", "--calj-max-order", "8"];
    let a = equifit(&args);
    let b = equifit(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let j: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(j["checks"].as_array().unwrap().len(), 10);
    assert_eq!(j["verdict"], "pass");
}
