use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn kdspin(dir: &Path, config: &str, extra: &[&str]) -> Output {
    let cfg = dir.join("run.json");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_kdspin"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap()
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("out/summary.json")).unwrap()).unwrap()
}

const SHORT_RUN: &str = r#"{"mode": "simulate", "physics": {"duration": {"cycles": 200}, "p_z": 1.000134}}"#;

#[test]
fn unknown_field_is_a_config_error_with_location() {
    let d = TempDir::new().unwrap();
    let out = kdspin(d.path(), "{\"mode\": \"tune\",\n  \"phisics\": {}}", &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("phisics") && err.contains("line 2"), "{err}");
}

#[test]
fn missing_config_is_a_config_error() {
    let d = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_kdspin")).args(["--config", "/nonexistent/run.json"]).current_dir(d.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn single_point_sweep_is_rejected() {
    let d = TempDir::new().unwrap();
    let out = kdspin(d.path(), r#"{"mode": "sweep", "sweep": {"axis": "xi", "values": [1e-3]}}"#, &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn physics_precondition_is_exit_three() {
    let d = TempDir::new().unwrap();
    let out = kdspin(d.path(), r#"{"mode": "simulate", "physics": {"xi": 0, "xi_prime": 0, "duration": {"rabi_periods": 1}}}"#, &[]);
    assert_eq!(out.status.code(), Some(3));
    let out = kdspin(d.path(), r#"{"mode": "simulate", "physics": {"duration": {"cycles": 4}}}"#, &[]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn tune_reports_the_momentum() {
    let d = TempDir::new().unwrap();
    let out = kdspin(d.path(), r#"{"mode": "tune"}"#, &[]);
    assert!(out.status.success());
    let pz = summary(d.path())["p_z"].as_f64().unwrap();
    assert!((pz - 1.000134).abs() < 2e-6, "{pz}");
}

#[test]
fn compton_check_meets_its_tolerance() {
    let d = TempDir::new().unwrap();
    assert!(kdspin(d.path(), r#"{"mode": "compton-check", "samples": 20}"#, &[]).status.success());
    let s = summary(d.path());
    assert_eq!(s["samples"], 20);
    assert!(s["max_relative_residual"].as_f64().unwrap() < 1e-12);
    assert_eq!(s["channels"].as_array().unwrap().len(), 8);
}

#[test]
fn experiment_mode_writes_the_report() {
    let d = TempDir::new().unwrap();
    assert!(kdspin(d.path(), r#"{"mode": "experiment"}"#, &[]).status.success());
    let n = summary(d.path())["electrons_per_window"].as_f64().unwrap();
    assert!((n - 124.0).abs() <= 1.0);
}

#[test]
fn simulate_writes_the_timeseries_header() {
    let d = TempDir::new().unwrap();
    let out = kdspin(d.path(), SHORT_RUN, &["--steps-per-cycle", "1024", "--truncation", "6"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(d.path().join("out/timeseries.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t_cycles,t_fs,P_2_nw,P_0_se,norm_residual"));
    let s = summary(d.path());
    assert_eq!(s["steps_per_cycle"], 1024);
    assert_eq!(s["truncation"], 6);
    assert_eq!(s["total_cycles"], 200);
    // far too short to see an oscillation; the fit declines instead of guessing
    assert!(s["fit"].is_null() && s["fit_error"].is_string());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let read = |d: &TempDir| {
        ["timeseries.csv", "summary.json"].map(|f| std::fs::read(d.path().join("out").join(f)).unwrap())
    };
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for d in [&a, &b] {
        assert!(kdspin(d.path(), SHORT_RUN, &["--steps-per-cycle", "1024"]).status.success());
    }
    assert_eq!(read(&a), read(&b));
}

#[test]
fn sweep_keeps_going_past_failed_rows() {
    let d = TempDir::new().unwrap();
    let cfg = r#"{"mode": "sweep", "physics": {"duration": {"rabi_periods": 0.6}, "p_z": 1.000134, "steps_per_cycle": 2048},
                  "sweep": {"axis": "xi", "values": [0.0, 1e-2]}}"#;
    let out = kdspin(d.path(), cfg, &["--jobs", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(d.path());
    assert!(s["rows"][0]["error"].is_string());
    assert!(s["rows"][1]["omega_fit"].as_f64().unwrap() > 0.0);
    let csv = std::fs::read_to_string(d.path().join("out/sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);

    let cfg = r#"{"mode": "sweep", "physics": {"duration": {"rabi_periods": 1}}, "sweep": {"axis": "xi", "values": [0.0, 0.0]}}"#;
    assert_eq!(kdspin(d.path(), cfg, &[]).status.code(), Some(3));
}
