use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qismet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qismet")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("exp.ini");
    std::fs::write(&path, body).unwrap();
    path
}

const SMALL: &str = "\
[problem]
n = 3

[ansatz]
reps = 1

[noise]
transient_scale = 0.5
trace = synthetic
base_sigma = 0.01
spike_prob = 0.1

[run]
scheme = qismet
iterations = 80
";

#[test]
fn run_writes_the_golden_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("run.csv");
    let o = qismet(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "iteration,job_index,scheme,E_m,E_mR_prev,T_m,E_p,G_m,G_p,decision,retries,E_ideal,committed_energy"
    );
    assert_eq!(lines.count(), 80);
}

#[test]
fn runs_are_reproducible_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let cfg = cfg.to_str().unwrap();
    let stdout = |seed: &str| qismet(&["run", "--config", cfg, "--seed", seed]).stdout;
    assert_eq!(stdout("3"), stdout("3"));
    assert_ne!(stdout("3"), stdout("4"));
}

#[test]
fn scheme_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let o = qismet(&["run", "--config", cfg.to_str().unwrap(), "--scheme", "only-transients"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().split(',').nth(2) == Some("only_transients"));
}

#[test]
fn errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let cfg = cfg.to_str().unwrap();
    assert!(!qismet(&["run", "--config", cfg, "--scheme", "nope"]).status.success());
    let missing = qismet(&["run", "--config", "/nonexistent/exp.ini"]);
    assert!(!missing.status.success());
    assert!(!missing.stderr.is_empty());
    let bad = write_config(dir.path(), "[run]\nschem = qismet\n");
    assert!(!qismet(&["run", "--config", bad.to_str().unwrap()]).status.success());
}

#[test]
fn exact_energy_of_classical_chain() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[problem]\nn = 5\nfield = 0.0\n");
    let o = qismet(&["exact-energy", "--config", cfg.to_str().unwrap()]);
    let e: f64 = String::from_utf8(o.stdout).unwrap().trim().parse().unwrap();
    assert!((e + 4.0).abs() < 1e-9);
}

#[test]
fn gen_trace_is_seeded() {
    let args = ["gen-trace", "--length", "100", "--spike-prob", "0.2", "--seed", "9"];
    let a = qismet(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, qismet(&args).stdout);
    let values: Vec<f64> = String::from_utf8(a.stdout)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| l.trim().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 100);
}

#[test]
fn sweep_writes_long_and_summary_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("sweep.csv");
    let o = qismet(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--kind",
        "threshold",
        "--grid",
        "0.05,0.25",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let long = std::fs::read_to_string(&out).unwrap();
    assert!(long.starts_with("grid_value,iteration,"));
    let summary = std::fs::read_to_string(dir.path().join("sweep.csv.summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
}

#[test]
fn compare_reports_each_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("cmp.csv");
    let o = qismet(&[
        "compare",
        "--config",
        cfg.to_str().unwrap(),
        "--scheme",
        "baseline,qismet,blocking",
        "--seeds",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    for s in ["baseline", "qismet", "blocking"] {
        assert!(stdout.lines().any(|l| l.starts_with(s)), "{stdout}");
    }
    assert!(out.exists());
}
