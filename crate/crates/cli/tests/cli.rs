use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_morawetz"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn small_diag(dir: &Path, extra: &[&str]) -> Output {
    let mut cmd = bin();
    cmd.arg("run")
        .arg("--config")
        .arg(configs().join("gaussian-1d-diag.conf"))
        .args(["--set", "grid.n_points=32", "--set", "grid.box_length=16", "--set", "time.t_final=0.2"])
        .arg("--out")
        .arg(dir);
    for e in extra {
        cmd.args(["--set", e]);
    }
    cmd.output().unwrap()
}

#[test]
fn passing_run_exits_zero_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = small_diag(dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let csv = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(csv.starts_with("t,mass,energy,px,hhalf_sq,h1_norm,M_diag,l8\n"));
    assert!(stdout(&o).contains("check=monotonicity "));
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .arg("run")
        .arg("--config")
        .arg(configs().join("focusing-control.conf"))
        .args(["--set", "time.t_final=1"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("verdict=fail"));
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = small_diag(dir.path(), &["weight.radius=3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("weight.radius"));
    let o = bin().args(["run", "--config", "/nonexistent.conf"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn thread_count_does_not_change_output() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let run = |dir: &Path, threads: &str| {
        let o = bin()
            .env("MORAWETZ_THREADS", threads)
            .arg("run")
            .arg("--config")
            .arg(configs().join("gaussian-2d-line.conf"))
            .args(["--set", "grid.n_points=32", "--set", "time.t_final=0.1", "--set", "weight.n_theta=8"])
            .arg("--out")
            .arg(dir)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        std::fs::read(dir.join("trace.csv")).unwrap()
    };
    assert_eq!(run(a.path(), "1"), run(b.path(), "3"));
}

#[test]
fn sweep_writes_table_and_runs() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .arg("sweep")
        .arg("--config")
        .arg(configs().join("gaussian-1d-diag.conf"))
        .args(["--axis", "time.dt", "--values", "4e-3,2e-3"])
        .args(["--set", "grid.n_points=32", "--set", "grid.box_length=16", "--set", "time.t_final=0.2"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let table = std::fs::read_to_string(dir.path().join("sweep.txt")).unwrap();
    assert!(table.contains("check=ftc axis=time.dt value=2e-3"));
    assert!(dir.path().join("time.dt=4e-3/trace.csv").exists());
    let o = bin()
        .arg("sweep")
        .arg("--config")
        .arg(configs().join("gaussian-1d-diag.conf"))
        .args(["--axis", "dim", "--values", "1,2"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn selftest_passes() {
    let o = bin().arg("selftest").output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("check=oracle-pair3d@0h"));
}

#[test]
fn verify_fields_exit_code_tracks_failures() {
    let o = bin().arg("verify-fields").output().unwrap();
    let out = stdout(&o);
    assert!(out.contains("check=delta-pair3d "));
    let failed = out.contains("verdict=fail");
    assert_eq!(o.status.code(), Some(if failed { 1 } else { 0 }));
}
