use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ipd-basins"))
}

fn run(args: &[&str], dir: &Path) -> i32 {
    bin().args(args).current_dir(dir).output().expect("binary runs").status.code().unwrap_or(-1)
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn grim_alld_table() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", r#"{"strategies": ["grim", "allD"], "game": {"delta": 0.9, "p": 1.0}}"#);
    assert_eq!(run(&["payoff", "--config", &cfg, "--out", "o"], tmp.path()), 0);
    let csv = fs::read_to_string(tmp.path().join("o/payoff_matrix.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("# ipd-basins ") && lines[0].contains("config_hash="));
    assert_eq!(lines[1], "row,grim,allD");
    assert_eq!(lines[2], "grim,3.0000000000000000e0,9.0000000000000002e-1");
    assert_eq!(lines.len(), 4);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("o/payoff_report.json")).unwrap()).unwrap();
    assert_eq!(report["ctx"]["delta"], 0.9);
    assert!(report["version"].as_str().unwrap().starts_with("ipd-basins "));
    assert_eq!(report["config_hash"].as_str().unwrap().len(), 64);
    assert!(lines[0].ends_with(report["config_hash"].as_str().unwrap()));
}

#[test]
fn single_strategy_gives_one_by_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", r#"{"strategies": ["wsls"]}"#);
    assert_eq!(run(&["payoff", "--config", &cfg, "--out", "o"], tmp.path()), 0);
    let csv = fs::read_to_string(tmp.path().join("o/payoff_matrix.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn validation_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    for (i, body) in [
        r#"{"game": {"p": 1.5}}"#,
        r#"{"strategies": ["wsls_n"]}"#,
        r#"{"strategies": ["grim"], "extra": 1}"#,
        r#"{"game": {"payoffs": {"t": 1, "r": 3, "p": 1, "s": 0}}}"#,
        "not json",
    ]
    .iter()
    .enumerate()
    {
        let cfg = write(tmp.path(), &format!("bad{i}.json"), body);
        assert_eq!(run(&["payoff", "--config", &cfg, "--out", "o"], tmp.path()), 2, "{body}");
    }
    let off = write(tmp.path(), "off.json", r#"{"source": {"matrix": [[1,0],[0,1]]}, "x0": [0.5, 0.6]}"#);
    assert_eq!(run(&["simulate", "--config", &off, "--out", "o"], tmp.path()), 2);
    assert_eq!(run(&["reproduce", "no-such-id", "--out", "o"], tmp.path()), 2);
    assert_eq!(run(&["payoff", "--threads", "0"], tmp.path()), 2);
    assert_eq!(run(&["frobnicate"], tmp.path()), 2);
}

#[test]
fn outputs_are_byte_identical_across_runs_and_threads() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "b.json", r#"{"mc_samples": 60, "gral_samples": 2000, "full_simplex_samples": 40}"#);
    assert_eq!(run(&["basin", "--config", &cfg, "--out", "a", "--seed", "5"], tmp.path()), 0);
    assert_eq!(run(&["basin", "--config", &cfg, "--out", "b", "--seed", "5", "--threads", "1"], tmp.path()), 0);
    assert_eq!(read_dir_sorted(&tmp.path().join("a")), read_dir_sorted(&tmp.path().join("b")));
    assert_eq!(run(&["basin", "--config", &cfg, "--out", "c", "--seed", "6"], tmp.path()), 0);
    assert_ne!(read_dir_sorted(&tmp.path().join("a")), read_dir_sorted(&tmp.path().join("c")));
}

#[test]
fn svg_only_for_three_strategies() {
    let tmp = tempfile::tempdir().unwrap();
    let three = write(tmp.path(), "t.json", r#"{"source": {"strategies": ["wsls", "allD", "grim"]}, "t_max": 50}"#);
    assert_eq!(run(&["simulate", "--config", &three, "--out", "three"], tmp.path()), 0);
    let svg = fs::read_to_string(tmp.path().join("three/trajectory.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("config_hash="));
    let four = write(tmp.path(), "f.json", r#"{"source": {"strategies": ["wsls", "allD", "grim", "tft"]}, "t_max": 50}"#);
    assert_eq!(run(&["simulate", "--config", &four, "--out", "four"], tmp.path()), 0);
    assert!(!tmp.path().join("four/trajectory.svg").exists());
    let report = fs::read_to_string(tmp.path().join("four/simulate_report.json")).unwrap();
    assert!(report.contains("svg skipped"));
}

#[test]
fn vertex_start_is_a_single_row() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "v.json", r#"{"source": {"matrix": [[1,2,0],[0,1,2],[2,0,1]]}, "x0": [0, 1, 0]}"#);
    assert_eq!(run(&["simulate", "--config", &cfg, "--out", "o"], tmp.path()), 0);
    let csv = fs::read_to_string(tmp.path().join("o/trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn counterexample_start_escapes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run(&["counterexample", "--out", "o"], tmp.path()), 0);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("o/counterexample_report.json")).unwrap()).unwrap();
    assert_ne!(report["result"]["terminal"]["kind"], "converged_to_vertex");
    assert!(tmp.path().join("o/counterexample.svg").exists());
}

#[test]
fn every_subcommand_runs_with_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    let small = write(tmp.path(), "b.json", r#"{"mc_samples": 20, "gral_samples": 500}"#);
    assert_eq!(run(&["basin", "--config", &small, "--out", "o"], tmp.path()), 0);
    for cmd in ["payoff", "simulate", "bound", "sweep", "check-sgp"] {
        assert_eq!(run(&[cmd, "--out", "o"], tmp.path()), 0, "{cmd}");
    }
    let names: Vec<String> = read_dir_sorted(&tmp.path().join("o")).into_iter().map(|(n, _)| n).collect();
    for f in ["basin_report.json", "bound_report.json", "sgp_report.json", "sgp_gaps.csv", "sweep.csv", "trajectory.csv"] {
        assert!(names.contains(&f.to_string()), "{f} missing from {names:?}");
    }
}

#[test]
fn reproduce_reports_and_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run(&["reproduce", "grim-collapse", "--out", "o"], tmp.path()), 0);
    let txt = fs::read_to_string(tmp.path().join("o/reproduce_grim-collapse.txt")).unwrap();
    assert!(txt.contains("PASS 3:"));
    assert_eq!(run(&["reproduce", "aw", "--out", "o"], tmp.path()), 0);
    let cfg = write(tmp.path(), "e.json", r#"{"ensemble": {"matrices": 3, "starts": 10, "gral_samples": 500}}"#);
    assert_eq!(run(&["reproduce", "thm-a1-ensemble", "--config", &cfg, "--seed", "9", "--out", "o"], tmp.path()), 0);
    // the strictness margin of wsls at delta = 0.95 is below C0, so this one fails
    assert_eq!(run(&["reproduce", "wsls-sgp", "--out", "o"], tmp.path()), 3);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("o/reproduce_wsls-sgp.json")).unwrap()).unwrap();
    assert_eq!(json["result"]["passed"], false);
}
