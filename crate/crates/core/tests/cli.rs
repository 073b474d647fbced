//! End-to-end checks of the `qchain-sim` binary: exit codes, determinism of
//! emitted bytes, format selection, and file output.

use std::path::PathBuf;
use std::process::{Command, Output};

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qchain-sim"))
}

fn write_config(dir: &tempfile::TempDir, name: &str, contents: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    binary().args(args).output().expect("binary runs")
}

#[test]
fn grover_demo_runs_and_emits_parsable_json() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        &dir,
        "grover.json",
        r#"{"scenario": "grover-demo", "master_seed": 42, "params": {"qubits": 3, "marked": 1}}"#,
    );
    let out = run(&[config.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["config"]["scenario"], "grover-demo");
    assert_eq!(report["passed"], true);
    let metrics = report["metrics"].as_array().unwrap();
    let mass = metrics
        .iter()
        .find(|m| m["name"] == "marked_mass")
        .expect("marked_mass metric");
    let value = mass["value"].as_f64().unwrap();
    assert!((value - 0.9453125).abs() < 1e-9);
}

#[test]
fn same_config_and_seed_give_byte_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        &dir,
        "dba.json",
        r#"{"scenario": "dba", "master_seed": 7, "params": {"trials": 500}}"#,
    );
    let first = run(&[config.to_str().unwrap()]);
    let second = run(&[config.to_str().unwrap()]);
    assert!(first.status.success() && second.status.success());
    assert!(!first.stdout.is_empty());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn seed_flag_overrides_the_config_seed() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        &dir,
        "bb84.json",
        r#"{"scenario": "bb84", "master_seed": 1, "params": {"n_qubits": 2048, "f": 0.5}}"#,
    );
    let default_run = run(&[config.to_str().unwrap()]);
    let overridden = run(&[config.to_str().unwrap(), "--seed", "999"]);
    let a: serde_json::Value = serde_json::from_slice(&default_run.stdout).unwrap();
    let b: serde_json::Value = serde_json::from_slice(&overridden.stdout).unwrap();
    assert_eq!(a["config"]["master_seed"], 1);
    assert_eq!(b["config"]["master_seed"], 999);
    assert_ne!(a["transcript_digests"], b["transcript_digests"]);
}

#[test]
fn text_format_has_fixed_layout() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        &dir,
        "grover.json",
        r#"{"scenario": "grover-demo", "master_seed": 3}"#,
    );
    let out = run(&[config.to_str().unwrap(), "--format", "text"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("qchain-sim report: grover-demo\n"));
    assert!(text.contains("wall time:"));
    // 3 header lines, one per metric (9 for this scenario), 3 footer lines.
    assert_eq!(text.lines().count(), 3 + 9 + 3);
}

#[test]
fn out_flag_writes_the_report_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        &dir,
        "grover.json",
        r#"{"scenario": "grover-demo", "master_seed": 3}"#,
    );
    let out_path = dir.path().join("report.json");
    let out = run(&[
        config.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_path).unwrap()).unwrap();
    assert_eq!(report["config"]["master_seed"], 3);
}

#[test]
fn invalid_configs_exit_2() {
    let dir = tempfile::tempdir().unwrap();

    let missing = dir.path().join("nope.json");
    let out = run(&[missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let unknown = write_config(
        &dir,
        "unknown.json",
        r#"{"scenario": "warp-drive", "master_seed": 1}"#,
    );
    let out = run(&[unknown.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let bad_field = write_config(
        &dir,
        "bad.json",
        r#"{"scenario": "bb84", "master_seed": 1, "params": {"n_qubits": 4}}"#,
    );
    let out = run(&[bad_field.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("n_qubits"), "stderr: {stderr}");
}

#[test]
fn missed_expectations_exit_3() {
    // L = 8 gives a forger about a 30% escape rate, far below the built-in
    // 99.9% detection expectation.
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        &dir,
        "weak-dba.json",
        r#"{"scenario": "dba", "master_seed": 11, "params": {"L": 8, "trials": 300}}"#,
    );
    let out = run(&[config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], false);
}

#[test]
fn repository_sample_configs_are_valid() {
    let configs = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["grover-demo.json", "bb84.json"] {
        let path = configs.join(name);
        let out = run(&[path.to_str().unwrap()]);
        assert!(
            out.status.success(),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}
