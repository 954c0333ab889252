use std::path::Path;
use std::process::{Command, Output};

fn sebm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sebm")).args(args).env_remove("SEBM_THREADS").output().unwrap()
}

fn desk() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/desk.json").display().to_string()
}

#[test]
fn verify_passes() {
    let out = sebm(&["--config", &desk(), "verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 11);
}

#[test]
fn wide_ramp_is_rejected_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(desk()).unwrap().replace("\"ramp_width\": 0.3", "\"ramp_width\": 0.5");
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, text).unwrap();
    let out = sebm(&["--config", cfg.to_str().unwrap(), "simulate", "--out", dir.path().join("r").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("delta <= 1/e"));
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(desk()).unwrap().replacen('{', "{\"bogus\": 1,", 1);
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, text).unwrap();
    assert_eq!(sebm(&["--config", cfg.to_str().unwrap(), "verify"]).status.code(), Some(2));
}

#[test]
fn non_convergence_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let out = sebm(&["--config", &desk(), "--out", run.to_str().unwrap(), "picard", "--max-iter", "2", "--tol", "1e-12"]);
    assert_eq!(out.status.code(), Some(3));
    let manifest = std::fs::read_to_string(run.join("manifest.json")).unwrap();
    assert!(manifest.contains("not_converged"));
}

#[test]
fn picard_then_icecaps() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let run_s = run.to_str().unwrap();
    let out = sebm(&["--config", &desk(), "--out", run_s, "--threads", "2", "picard"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(run.join("diagnostics.json").exists());
    let out = sebm(&["icecaps", run_s, "--emit-gnuplot"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(run.join("ice_fraction.csv")).unwrap();
    assert!(csv.lines().count() > 2);
    assert!(run.join("icecaps.csv").exists());
}

#[test]
fn seed_override_is_recorded_and_thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(sebm(&["--config", &desk(), "--seed", "9", "--threads", "1", "--out", a.to_str().unwrap(), "simulate"]).status.success());
    assert!(sebm(&["--config", &desk(), "--seed", "9", "--threads", "3", "--out", b.to_str().unwrap(), "simulate"]).status.success());
    let ta = std::fs::read(a.join("trajectories.csv")).unwrap();
    let tb = std::fs::read(b.join("trajectories.csv")).unwrap();
    assert_eq!(ta, tb);
    assert!(std::fs::read_to_string(a.join("manifest.json")).unwrap().contains("\"master_seed\": 9"));
}

#[test]
fn oracle_prints_csv() {
    let out = sebm(&["oracle", "--v0", "0.001", "--alpha", "1", "--points", "10"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("t,v,closed_form"));
    assert_eq!(text.lines().count(), 12);
}
