//! End-to-end tests of the CLI binary: error paths, determinism, and the
//! shape of every file the pipeline writes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_motesel")
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("spawn motesel")
}

fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "motesel {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn common_args(out_dir: &Path) -> Vec<String> {
    vec![
        "--data".into(),
        data_dir().join("mini_log.txt").display().to_string(),
        "--positions".into(),
        data_dir().join("mini_positions.txt").display().to_string(),
        "--sink".into(),
        "6".into(),
        "--windows".into(),
        "35,100,200".into(),
        "--seed".into(),
        "7".into(),
        "--out".into(),
        out_dir.display().to_string(),
    ]
}

fn run_stage(stage: &[&str], out_dir: &Path) -> Output {
    let mut args: Vec<String> = stage.iter().map(|s| s.to_string()).collect();
    args.extend(common_args(out_dir));
    let refs: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
    run_ok(&refs)
}

#[test]
fn empty_input_fails_with_diagnostic() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty.txt");
    fs::write(&empty, "").unwrap();
    let out = run(&[
        "ingest",
        "--data",
        empty.to_str().unwrap(),
        "--sink",
        "6",
        "--out",
        tmp.path().join("out").to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("motesel:"), "stderr: {err}");
    assert!(err.to_lowercase().contains("empty"), "stderr: {err}");
}

#[test]
fn missing_data_file_fails_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&[
        "ingest",
        "--data",
        tmp.path().join("nope.txt").to_str().unwrap(),
        "--out",
        tmp.path().join("out").to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("nope.txt"), "stderr: {err}");
}

#[test]
fn experiment_before_ingest_says_so() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let mut args: Vec<String> = vec!["experiment".into()];
    args.extend(common_args(&out_dir));
    let refs: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
    let out = run(&refs);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("ingest"), "stderr: {err}");
}

#[test]
fn reingest_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    run_stage(&["ingest"], &out_dir);
    let first = fs::read(out_dir.join("matrix.csv")).unwrap();
    run_stage(&["ingest"], &out_dir);
    let second = fs::read(out_dir.join("matrix.csv")).unwrap();
    assert_eq!(first, second);
    assert!(!first.is_empty());
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("epoch,"), "header: {}", text.lines().next().unwrap());
}

#[test]
fn no_selection_arm_omits_selection_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    run_stage(&["ingest"], &out_dir);
    run_stage(&["experiment", "--no-selection"], &out_dir);
    let table = fs::read_to_string(out_dir.join("experiment_table.csv")).unwrap();
    let header = table.lines().next().unwrap();
    assert!(!header.contains("ltef"), "header: {header}");
    assert!(!header.contains("selected"), "header: {header}");
    assert_eq!(table.lines().count(), 4);
    assert!(!out_dir.join("selection_map.csv").exists());

    run_stage(&["experiment"], &out_dir);
    let table = fs::read_to_string(out_dir.join("experiment_table.csv")).unwrap();
    let header = table.lines().next().unwrap();
    assert!(header.contains("ltef"), "header: {header}");
    assert!(out_dir.join("selection_map.csv").exists());
}

#[test]
fn report_summarises_experiment_and_simulation() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    run_stage(&["ingest"], &out_dir);
    run_stage(&["experiment"], &out_dir);
    run_stage(&["simulate"], &out_dir);
    let out = run_stage(&["report"], &out_dir);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("experiment summary"), "report: {text}");
    assert!(text.contains("adaptive routing"), "report: {text}");
    assert!(text.contains("window_200"), "report: {text}");
}

#[test]
fn report_without_outputs_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&[
        "report",
        "--out",
        tmp.path().join("nothing").to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no outputs"));
}

#[test]
fn zero_threshold_adopts_only_first_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    run_stage(&["ingest"], &out_dir);
    run_stage(&["simulate", "--threshold", "0"], &out_dir);
    let log = fs::read_to_string(out_dir.join("adoption_log.csv")).unwrap();
    let rows: Vec<&str> = log.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("35,true,"), "row: {}", rows[0]);
    for row in &rows[1..] {
        let adopted = row.split(',').nth(1).unwrap();
        assert_eq!(adopted, "false", "row: {row}");
    }
}

#[test]
fn simulation_outputs_exist_per_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    run_stage(&["ingest"], &out_dir);
    run_stage(&["simulate"], &out_dir);
    for len in [35, 100, 200] {
        let plan = fs::read_to_string(out_dir.join(format!("plan_{len}.csv"))).unwrap();
        assert!(plan.contains("mote_id,state,next_hop"), "plan_{len}: {plan}");
        assert!(plan.contains("sink"), "plan_{len} lacks a sink row");
        let ledger = fs::read_to_string(out_dir.join(format!("ledger_{len}.csv"))).unwrap();
        assert!(ledger.lines().count() > 1, "ledger_{len} empty");
    }
}

#[test]
fn config_file_drives_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("cfg_out");
    let cfg = format!(
        "[data]\npath = \"{log}\"\nsink = 6\n\n\
         [experiment]\nwindows = [[0, 35], [0, 200]]\nseed = 7\n\n\
         [output]\ndir = \"{out}\"\n",
        log = data_dir().join("mini_log.txt").display(),
        out = out_dir.display(),
    );
    let cfg_path = tmp.path().join("run.toml");
    fs::write(&cfg_path, cfg).unwrap();
    run_ok(&["ingest", "--config", cfg_path.to_str().unwrap()]);
    run_ok(&["experiment", "--config", cfg_path.to_str().unwrap()]);
    let table = fs::read_to_string(out_dir.join("experiment_table.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
    assert!(table.contains("window_35,"));
    assert!(table.contains("window_200,"));
}
