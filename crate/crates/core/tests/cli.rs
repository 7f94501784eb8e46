use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Arc;

use ymh_core::algebra::{AlgebraKind, LieAlgebra};
use ymh_core::snapshot::read_snapshot;

fn ymh(cmd: &str, config: &str, dir: &Path, extra: &[&str]) -> Output {
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_ymh"))
        .arg(cmd)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read(p: PathBuf) -> String {
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

const ZERO_RUN: &str = "\
grid.N = 8
data.kind = zero
data.band = 1
evolve.dt = 0.01
evolve.T = 0.05
simulate.stride = 1
simulate.snapshot_stride = 0
";

#[test]
fn zero_data_stays_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = ymh("simulate", ZERO_RUN, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = dir.path().join("out");
    let manifest = read(out.join("manifest.txt"));
    assert!(manifest.starts_with("# config_hash="));
    assert!(manifest.contains("status = pass"));
    let diag = read(out.join("diagnostics.csv"));
    assert!(diag.lines().next().unwrap().starts_with("# config_hash="));
    assert_eq!(diag.lines().count(), 2 + 6);
    let alg = Arc::new(LieAlgebra::new(AlgebraKind::su(2)));
    for k in [0, 5] {
        let (fields, _) = read_snapshot(&out.join(format!("snapshots/state_{k:06}")), &alg, 22).unwrap();
        assert!(fields.iter().all(|f| f.l2_norm() == 0.0));
    }
}

#[test]
fn runs_are_byte_identical() {
    let cfg = "grid.N = 8\ndata.kind = random\ndata.band = 1\nevolve.dt = 0.01\nevolve.T = 0.03\nsimulate.stride = 1\n";
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(ymh("simulate", cfg, a.path(), &["--seed", "4"]).status.code(), Some(0));
    assert_eq!(ymh("simulate", cfg, b.path(), &["--seed", "4"]).status.code(), Some(0));
    let f = |d: &Path| std::fs::read(d.join("out/diagnostics.csv")).unwrap();
    assert_eq!(f(a.path()), f(b.path()));
    let g = |d: &Path| std::fs::read(d.join("out/snapshots/state_000003.ymh")).unwrap();
    assert_eq!(g(a.path()), g(b.path()));
}

#[test]
fn supercritical_exponent_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = ymh("simulate", "model.p = 5\n", dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("subcritical"), "{}", stderr(&o));
}

#[test]
fn unknown_key_names_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let o = ymh("simulate", "grid.N = 8\ngrid.M = 8\n", dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains(":2:") && e.contains("grid.M"), "{e}");
}

#[test]
fn command_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = ymh("simulate", "command = converge\n", dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("converge"));
}

#[test]
fn blow_up_exits_non_finite() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "grid.N = 8\ndata.kind = random\ndata.band = 1\ndata.amplitude = 1000\nevolve.dt = 0.5\nevolve.T = 5\n";
    let o = ymh("simulate", cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn small_verify_run_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = ymh("verify-identities", "grid.N = 8\ndata.band = 1\nverify.seeds = 2\n", dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = read(dir.path().join("out/identities.csv"));
    for check in ["lemma1_frak", "lemma1_time", "nullform_trick", "recombination", "b_sigma_q12"] {
        assert!(csv.contains(check), "{check}");
    }
    assert!(!csv.contains(",false"));
}

#[test]
fn small_probe_run_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg =
        "probe.batch = 2\nprobe.small_N = 4\nprobe.large_N = 8\nprobe.estimates = NullEst1:1\nprobe.linear = false\n";
    let o = ymh("probe-estimates", cfg, dir.path(), &[]);
    assert!(matches!(o.status.code(), Some(0 | 1)), "{}", stderr(&o));
    let out = dir.path().join("out");
    let probes = read(out.join("probes.csv"));
    assert_eq!(probes.lines().filter(|l| l.starts_with("NullEst1:1")).count(), 2);
    assert!(read(out.join("growth.csv")).contains("NullEst1:1"));
    assert!(out.join("hxh.csv").exists());
}

#[test]
fn converge_and_data_check_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "grid.N = 8\ndata.band = 1\nevolve.T = 0.04\nconverge.dts = 0.02, 0.01\n";
    let o = ymh("converge", cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(read(dir.path().join("out/converge.csv")).lines().count(), 2 + 2);
    assert!(read(dir.path().join("out/fits.csv")).contains("lorenz"));

    let dir = tempfile::tempdir().unwrap();
    let o = ymh("data-check", "grid.N = 8\ndata.band = 1\ncheck.seeds = 1\n", dir.path(), &[]);
    assert!(matches!(o.status.code(), Some(0 | 1)), "{}", stderr(&o));
    assert!(dir.path().join("out/data_check.csv").exists());
}
