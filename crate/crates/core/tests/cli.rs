//! End-to-end checks of the `gss-qpe` binary.

use std::path::Path;
use std::process::{Command, Output};

fn gss_qpe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gss-qpe"))
        .args(args)
        .env_remove("GSS_QPE_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn schedule_prints_both_modes() {
    let out = gss_qpe(&["schedule", "--n0", "100", "-k", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("mode=closed_form K=3 N_T=5300"), "{text}");
    assert!(
        text.contains("mode=recursive_numeric K=3 N_T=5300"),
        "{text}"
    );
    assert!(text.contains("0.023208"), "{text}");
    assert!(text.contains("preferred: recursive_numeric"), "{text}");
}

#[test]
fn schedule_derives_n0_from_budget() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("schedule.json");
    let out = gss_qpe(&[
        "schedule",
        "--nt",
        "1312100",
        "-k",
        "8",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let json = read_json(&path);
    let steps = json["recursive_numeric"]["steps"].as_array().unwrap();
    assert_eq!(steps.len(), 9);
    assert_eq!(steps[0]["n"], 100);
    assert_eq!(steps[8]["n"], 400 * 3u64.pow(7));
    assert_eq!(json["closed_form"]["n_total"], 1312100);
}

#[test]
fn infeasible_budget_exits_with_config_error() {
    let out = gss_qpe(&["schedule", "--nt", "50", "-k", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn unknown_sampler_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = gss_qpe(&[
        "run",
        "--n0",
        "100",
        "-k",
        "1",
        "--trials",
        "10",
        "--sampler",
        "magic",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_writes_outputs_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = gss_qpe(&[
        "run",
        "--n0",
        "100",
        "-k",
        "3",
        "--trials",
        "300",
        "--seed",
        "9",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout(&out).contains("K=3 N_T=5300"));

    for name in [
        "stats.json",
        "residuals.csv",
        "errorprob.csv",
        "manifest.json",
    ] {
        assert!(dir.path().join(name).exists(), "missing {name}");
    }
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["command"], "run");
    assert_eq!(manifest["master_seed"], 9);
    assert_eq!(manifest["csv_schema_version"], 1);
    assert_eq!(manifest["config"]["trials"], 300);

    let stats = read_json(&dir.path().join("stats.json"));
    assert_eq!(stats["trials"], 300);
    let ntd = stats["nt_times_delta"].as_f64().unwrap();
    assert!((3.0..6.0).contains(&ntd), "N_T x Delta = {ntd}");

    let residuals = std::fs::read_to_string(dir.path().join("residuals.csv")).unwrap();
    let mut lines = residuals.lines();
    assert_eq!(lines.next(), Some("trial,theta_true,theta_est,residual"));
    assert_eq!(lines.count(), 300);
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"n0": 100, "k": 2, "trials": 50, "seed": 4}"#).unwrap();
    let out_dir = dir.path().join("out");
    let out = gss_qpe(&[
        "--config",
        cfg.to_str().unwrap(),
        "run",
        "--trials",
        "40",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let manifest = read_json(&out_dir.join("manifest.json"));
    assert_eq!(manifest["config"]["k"], 2);
    assert_eq!(manifest["config"]["trials"], 40);
    assert_eq!(manifest["master_seed"], 4);
}

#[test]
fn stats_do_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut stats = Vec::new();
    for workers in ["1", "2"] {
        let out_dir = dir.path().join(workers);
        let out = gss_qpe(&[
            "--workers",
            workers,
            "run",
            "--n0",
            "100",
            "-k",
            "4",
            "--trials",
            "200",
            "--seed",
            "3",
            "--noise",
            "dephasing:10",
            "--out-dir",
            out_dir.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        stats.push(std::fs::read(out_dir.join("stats.json")).unwrap());
    }
    assert_eq!(stats[0], stats[1]);
}
