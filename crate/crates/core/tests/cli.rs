use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn lab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lab")).args(args).current_dir(cwd).output().unwrap()
}

fn preset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets").join(name)
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&["selftest"], dir.path());
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.lines().count() >= 9);
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn config_errors_exit_2_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "[experiment]\nname = x\nhorizon = 10\nhorizon = 20\n").unwrap();
    let out = lab(&["run", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 4"));

    let out = lab(&["run", "missing.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = lab(&["frobnicate"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("bad.log");
    std::fs::write(&log, "K=2\n0 1 0 0 0 0 0 0 0 0 0\n").unwrap();
    let out = lab(&["replay", "--log", log.to_str().unwrap(), "--policy", "ucb1"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = preset("break-ftl.cfg");
    let mut files = Vec::new();
    for run in ["a", "b"] {
        let out_dir = dir.path().join(run);
        let out = lab(
            &["run", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "--plot", "--reps", "3"],
            dir.path(),
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let csv = std::fs::read(out_dir.join("break-ftl.csv")).unwrap();
        let svg = std::fs::read(out_dir.join("break-ftl.svg")).unwrap();
        files.push((csv, svg));
    }
    assert_eq!(files[0], files[1]);
    assert!(String::from_utf8(files[0].1.clone()).unwrap().contains("<svg"));

    // a different seed changes the randomized series
    let out_dir = dir.path().join("c");
    let out = lab(
        &["run", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "--seed", "99", "--reps", "3"],
        dir.path(),
    );
    assert!(out.status.success());
    assert_ne!(std::fs::read(out_dir.join("break-ftl.csv")).unwrap(), files[0].0);
}

#[test]
fn bounds_compare_writes_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&["bounds-compare", "--grid", "11", "--out", "bc"], dir.path());
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("bc/bounds-compare.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,series,mean,std");
    assert_eq!(csv.lines().filter(|l| l.contains(",hoeffding,")).count(), 11);
    assert!(dir.path().join("bc/bounds-compare.svg").exists());
}

#[test]
fn replay_reports_horizon() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("uniform.log");
    let mut text = String::from("# two arms\nK=2\n");
    for i in 0..200 {
        text.push_str(&format!("{} {} 0 0 0 0 0 0 0 0 0 0\n", i % 2, (i % 3 == 0) as u8));
    }
    std::fs::write(&log, text).unwrap();
    let out =
        lab(&["replay", "--log", log.to_str().unwrap(), "--policy", "fixed", "--arm", "1", "--mode", "rs"], dir.path());
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("effective_horizon=100"), "{stdout}");
}
