//! End-to-end tests of the `hs` binary: exit codes, file outputs, round trips.

use std::path::Path;
use std::process::{Command, Output};

fn hs(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hs"))
        .args(args)
        .current_dir(dir)
        .env_remove("HS_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn run_writes_snapshots_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{ "problem": "peakon", "dx": 0.25, "alpha": 1.0, "T": 4.0, "snapshots": [0.0, 2.0, 4.0] }"#,
    )
    .unwrap();
    let out = hs(
        &["run", "--config", "cfg.json", "--out", "result", "--json"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    for i in 0..3 {
        assert!(dir.path().join(format!("result/snapshot_{i:03}.csv")).exists());
        assert!(dir.path().join(format!("result/snapshot_{i:03}.json")).exists());
    }
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("result/trajectory.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["dt"], 0.25);
    assert_eq!(manifest["steps"], 16);
    // --json stdout is a single parseable line
    let line = stdout(&out);
    let parsed: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    assert_eq!(parsed["dt"], 0.25);
}

#[test]
fn run_then_validate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = hs(
        &[
            "run", "--problem", "peakon", "--dx", "0.25", "--T", "2", "--snapshots", "2",
            "--out", "rt",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let val = hs(&["validate", "rt/snapshot_000.csv"], dir.path());
    assert_eq!(val.status.code(), Some(0), "{}", stderr(&val));
    assert!(stdout(&val).contains("valid"));
}

#[test]
fn validate_rejects_decreasing_f() {
    let dir = tempfile::tempdir().unwrap();
    hs(
        &[
            "run", "--problem", "peakon", "--dx", "0.25", "--T", "1", "--snapshots", "1",
            "--out", "bad",
        ],
        dir.path(),
    );
    let csv = dir.path().join("bad/snapshot_000.csv");
    let mut lines: Vec<String> = std::fs::read_to_string(&csv)
        .unwrap()
        .lines()
        .map(String::from)
        .collect();
    // hand-edit one F entry to break monotonicity
    let mid = lines.len() / 2;
    let cols: Vec<&str> = lines[mid].split(',').collect();
    lines[mid] = format!("{},{},{}", cols[0], cols[1], -0.5);
    std::fs::write(&csv, lines.join("\n") + "\n").unwrap();
    let val = hs(&["validate", "bad/snapshot_000.csv"], dir.path());
    assert_eq!(val.status.code(), Some(2));
    assert!(stdout(&val).contains("F decreasing") || stdout(&val).contains("below zero"));
}

#[test]
fn malformed_config_exits_one_without_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg.json"), "{ not json").unwrap();
    let out = hs(
        &["run", "--config", "cfg.json", "--out", "never"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("never").exists());
    assert!(stderr(&out).contains("invalid JSON"));
}

#[test]
fn snapshot_beyond_t_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("cfg.json"),
        r#"{ "T": 1.0, "snapshots": [0.5, 2.0] }"#,
    )
    .unwrap();
    let out = hs(&["run", "--config", "cfg.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("/snapshots/1"));
}

#[test]
fn unknown_flag_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = hs(&["run", "--frobnicate"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn converge_writes_csv_and_prints_slopes() {
    let dir = tempfile::tempdir().unwrap();
    let out = hs(
        &[
            "converge", "--problem", "peakon", "--T", "2", "--snapshots", "2",
            "--dx-list", "0.25,0.125,0.0625", "--out", "conv",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("conv/convergence.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "dx,dt,t,err_u_inf,err_u_l2,err_F_l1,err_F_l2,rate_pairwise_u_inf,rate_pairwise_F_l1"
    );
    assert_eq!(lines.count(), 3);
    assert!(stdout(&out).contains("slope"));
}

#[test]
fn converge_empty_dx_list_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg.json"), r#"{ "dx_list": [] }"#).unwrap();
    let out = hs(&["converge", "--config", "cfg.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn residual_prints_pairs_and_slope() {
    let dir = tempfile::tempdir().unwrap();
    let out = hs(
        &[
            "residual", "--problem", "peakon", "--dx-list", "0.25,0.125", "--json",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let lines: Vec<serde_json::Value> = stdout(&out)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 3); // two dx rows plus the slope summary
    assert!(lines[0]["res_u"].is_number());
    assert!(lines[2]["slope_u"].is_number());
}

#[test]
fn check_bounds_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = hs(
        &[
            "check-bounds", "--problem", "peakon", "--dx", "0.25", "--T", "4",
            "--out", "bounds", "--seed", "3",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("bounds/bounds.json")).unwrap(),
    )
    .unwrap();
    assert!(report["checks"].as_array().unwrap().len() >= 9);
    assert!(stdout(&out).contains("pass"));
}

#[test]
fn hs_out_dir_env_is_default_output_root() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_hs"))
        .args(["run", "--problem", "peakon", "--dx", "0.25", "--T", "1", "--snapshots", "1"])
        .current_dir(dir.path())
        .env("HS_OUT_DIR", dir.path().join("from-env"))
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("from-env/trajectory.json").exists());
}
