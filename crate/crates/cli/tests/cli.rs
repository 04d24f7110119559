use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use crlab_core::io::{read_snapshot, HEADER_LEN};
use serde_json::Value;

fn run(args: &[&str], config: &str, dir: &Path, threads: Option<&str>) -> Output {
    let cfg = dir.join("run.conf");
    fs::write(&cfg, config).unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_crlab"));
    cmd.current_dir(dir)
        .args(args)
        .arg("--config")
        .arg("run.conf")
        .arg("--out")
        .arg("out");
    if let Some(t) = threads {
        cmd.env("CRLAB_THREADS", t);
    }
    cmd.output().unwrap()
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn metadata(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out/metadata.json")).unwrap()).unwrap()
}

fn snapshots(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir.join("out"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "crf"))
        .collect();
    v.sort();
    v
}

const SMALL_EVOLVE: &str = "dimension = 2\ngrid_n = 16\ngrid_half_width = 4\nquad_nodes = 16\ninit = two_bumps\ndt = 0.01\nt_final = 0.05\noutput_every = 1\n";

#[test]
fn zero_nonlinearity_leaves_the_field_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    ok(&run(&["evolve", "--zero-nonlinearity"], SMALL_EVOLVE, dir.path(), None));
    let snaps = snapshots(dir.path());
    assert_eq!(snaps.len(), 6);
    let first = fs::read(&snaps[0]).unwrap();
    let last = fs::read(snaps.last().unwrap()).unwrap();
    assert_eq!(first[HEADER_LEN..], last[HEADER_LEN..]);
    let (_, t) = read_snapshot(snaps.last().unwrap()).unwrap();
    assert!((t - 0.05).abs() < 1e-12);
    assert_eq!(metadata(dir.path())["zero_nonlinearity"], Value::Bool(true));
}

#[test]
fn evolution_is_bitwise_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    ok(&run(&["evolve", "--deterministic"], SMALL_EVOLVE, a.path(), Some("1")));
    ok(&run(&["evolve", "--deterministic"], SMALL_EVOLVE, b.path(), Some("3")));
    for name in ["diagnostics.csv", "metadata.json", "config.txt", "snap_00005.crf"] {
        let x = fs::read(a.path().join("out").join(name)).unwrap();
        let y = fs::read(b.path().join("out").join(name)).unwrap();
        assert!(x == y, "{name} differs");
    }
    let csv = fs::read_to_string(a.path().join("out/diagnostics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn config_errors_are_reported_on_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["evolve"], "", dir.path(), None);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error: kind=config message=\""), "{err}");
    assert!(err.contains("dimension") && err.contains("t_final"), "{err}");

    let out = run(&["stationary"], "dimension = 6\ngrid_n = 8\ngrid_half_width = 2\n", dir.path(), None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("error: kind="));
}

#[test]
fn oracle_compare_agrees_with_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "dimension = 2\ngrid_n = 32\ngrid_half_width = 8\nquad_nodes = 64\ninit = gaussian\noracle_points = 0,0; 1,0.5\n";
    ok(&run(&["oracle-compare"], cfg, dir.path(), None));
    let meta = metadata(dir.path());
    let points = meta["results"]["points"].as_array().unwrap();
    assert_eq!(points.len(), 2);
    for p in points {
        let e = p["rel_err"].as_f64().unwrap();
        assert!(e <= 1e-3, "{p}");
    }
}

#[test]
fn stationary_then_diagnose() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "dimension = 2\ngrid_n = 64\ngrid_half_width = 10\ninit = random_even\ninit_width = 1.5\nseed = 11\ntol = 1e-9\nmax_iter = 300\n";
    ok(&run(&["stationary"], cfg, dir.path(), None));
    let res = &metadata(dir.path())["results"];
    assert_eq!(res["converged"], Value::Bool(true));
    assert!(res["residual"].as_f64().unwrap() <= 1e-9);
    let profile = dir.path().join("out/profile.crf");
    let (phi, _) = read_snapshot(&profile).unwrap();
    assert_eq!(phi.grid().n(), 64);

    let second = tempfile::tempdir().unwrap();
    let diag_cfg = "dimension = 2\ngrid_n = 64\ngrid_half_width = 10\n";
    let out = run(&["diagnose", "--input", profile.to_str().unwrap()], diag_cfg, second.path(), None);
    ok(&out);
    let csv = fs::read_to_string(second.path().join("out/diagnostics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);

    // A snapshot on the wrong grid is refused.
    let third = tempfile::tempdir().unwrap();
    let bad = "dimension = 2\ngrid_n = 32\ngrid_half_width = 10\n";
    let out = run(&["diagnose", "--input", profile.to_str().unwrap()], bad, third.path(), None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn symmetry_and_virial_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "dimension = 2\ngrid_n = 32\ngrid_half_width = 8\nquad_nodes = 32\ninit = gaussian\nsymmetry = phase 0.5; rotate -2 1; translate 1 1\n";
    ok(&run(&["symmetry"], cfg, dir.path(), None));
    let csv = fs::read_to_string(dir.path().join("out/symmetry.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.contains("rotate -2 1"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = "dimension = 3\ngrid_n = 16\ngrid_half_width = 6\nquad_nodes = 48\ninit = two_bumps\ndt = 5e-4\nt_final = 0.004\noutput_every = 1\n";
    ok(&run(&["virial"], cfg, dir.path(), None));
    let csv = fs::read_to_string(dir.path().join("out/virial.csv")).unwrap();
    assert!(csv.lines().count() >= 6, "{csv}");
}

#[test]
fn norm_bench_reports_each_radius() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "dimension = 3\ngrid_n = 16\ngrid_half_width = 6\nquad_nodes = 8\nnorm_p = 2\nnorm_s = 2.5\nbench_radii = 0, 2\nseed = 5\n";
    ok(&run(&["norm-bench"], cfg, dir.path(), None));
    let csv = fs::read_to_string(dir.path().join("out/norm_bench.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 20, "{csv}");
    let res = &metadata(dir.path())["results"];
    assert_eq!(res["within_hypotheses"], Value::Bool(true), "{res}");
}
