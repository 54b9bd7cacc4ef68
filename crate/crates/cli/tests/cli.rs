//! End-to-end runs of the `sensact` binary: outputs and exit statuses.

use std::path::Path;
use std::process::{Command, Output};

fn sensact(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sensact"))
        .args(["--jobs", "1"])
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generate(dir: &Path, kind: &str) -> std::path::PathBuf {
    let file = dir.join(format!("{kind}.json"));
    let out = sensact(&["generate", kind, "--seed", "3", "--out", path(&file)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    file
}

#[test]
fn solve_prints_the_subset_value() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), "example1");
    let out = sensact(&["solve", "--instance", path(&inst), "--subset", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((json["value"].as_f64().unwrap() - 10.0).abs() < 1e-4);

    let out = sensact(&["solve", "--instance", path(&inst)]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(json["value"].as_f64().unwrap().abs() < 1e-4);
}

#[test]
fn select_writes_report_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), "example4");
    let report = dir.path().join("report.json");
    let trace = dir.path().join("trace.csv");
    let out = sensact(&[
        "select", "--instance", path(&inst), "--method", "greedy",
        "--out", path(&report), "--trace", path(&trace),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(json["selected"], serde_json::json!([0, 1]));
    assert!(std::fs::read_to_string(trace).unwrap().lines().count() > 1);
}

#[test]
fn sweep_preset_emits_csv() {
    let out = sensact(&["sweep", "--preset", "lemma-check"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("instance,method,selected,value"));
    assert_eq!(csv.lines().count(), 5);
    assert!(!csv.contains("fail"));
}

#[test]
fn reduce_builds_a_selection_instance() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("sc.json");
    std::fs::write(&sc, r#"{"kind": "set_cover", "n": 2, "sets": [[0], [1]], "k": 2}"#).unwrap();
    let red = dir.path().join("red.json");
    let out = sensact(&["reduce", "--setcover", path(&sc), "--variant", "actuator", "--out", path(&red)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = sensact(&["select", "--instance", path(&red), "--method", "brute"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn cascade_runs_a_small_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"kind": "asen-sweep", "seed": 2, "instances": 1, "rollouts": 100, "im_rollouts": 20,
            "sweeps": [{"label": "t", "network": {"type": "ba"}, "nodes": [10], "budgets": [2], "faulty": [2]}]}"#,
    )
    .unwrap();
    let csv = dir.path().join("out.csv");
    let out = sensact(&["cascade", "--config", path(&cfg), "--out", path(&csv)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().nth(1).unwrap().starts_with("BA,10,,2,2,"));
}

#[test]
fn input_errors_exit_with_status_2() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), "example1");
    let text = std::fs::read_to_string(&inst).unwrap();
    let truncated = dir.path().join("truncated.json");
    std::fs::write(&truncated, &text[..text.len() / 3]).unwrap();

    let out = sensact(&["solve", "--instance", path(&truncated)]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("truncated.json:"), "{msg}");

    let out = sensact(&["solve", "--instance", path(&inst), "--subset", "5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = sensact(&["solve", "--instance", path(&dir.path().join("missing.json"))]);
    assert_eq!(out.status.code(), Some(2));
    let out = sensact(&["sweep", "--preset", "no-such-experiment"]);
    assert_eq!(out.status.code(), Some(2));
    let out = sensact(&["select", "--instance", path(&inst), "--method", "psychic"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn capacity_errors_exit_with_status_3() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), "example1");
    let out = sensact(&["solve", "--instance", path(&inst), "--subset", "0", "--max-stages", "3"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("capacity"));
    let out = sensact(&["solve", "--instance", path(&inst), "--max-vectors", "1"]);
    assert_eq!(out.status.code(), Some(3));
}
