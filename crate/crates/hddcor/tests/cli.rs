mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::{planted_default, Signal};
use hddcor::io::{read_sample_csv, render_test_result, Format};
use hddcor_core::calibration::{run_test, Method, PermutationConfig};
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn hddcor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hddcor"))
        .args(args)
        .env_remove("HDDCOR_THREADS")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = hddcor(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn self_pair_gives_the_maximal_statistic() {
    let x = fixture("x.csv");
    let out = ok(&["--format", "json", "test", "--x", path(&x), "--y", path(&x)]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let n = 8.0_f64;
    let t = v["statistic"].as_f64().unwrap();
    assert!((t - (n * (n - 1.0) / 2.0).sqrt()).abs() < 1e-9, "{t}");
    assert!(v["p_value"].as_f64().unwrap() < 1e-6);
    assert_eq!(v["reject"], Value::Bool(true));
    assert_eq!(v["method"], "normal-tn");
}

#[test]
fn mismatched_rows_exit_2() {
    let out = hddcor(&["test", "--x", path(&fixture("x.csv")), "--y", path(&fixture("y_short.csv"))]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("row counts differ"));
}

#[test]
fn bad_alpha_exits_2() {
    let x = fixture("x.csv");
    let out = hddcor(&["test", "--x", path(&x), "--y", path(&x), "--alpha", "0"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn rv_output_matches_golden_and_library() {
    let (px, py) = (fixture("x.csv"), fixture("y.csv"));
    let out = ok(&[
        "--seed", "5", "test", "--x", path(&px), "--y", path(&py), "--method", "rv", "--permutations", "99",
    ]);
    let golden = std::fs::read(fixture("test_rv.golden.csv")).unwrap();
    assert_eq!(out.stdout, golden);

    let x = read_sample_csv(&px).unwrap();
    let y = read_sample_csv(&py).unwrap();
    let perm = PermutationConfig { permutations: 99, seed: 5 };
    let r = run_test(Method::RvPermutation, &x, &y, 0.05, perm).unwrap();
    assert_eq!(out.stdout, render_test_result(&r, Format::Csv).unwrap());
}

#[test]
fn simulate_rejects_zero_replicates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "example = \"ex1\"\nreplicates = 0\n\n[[grid]]\nn = 10\np = 2\n").unwrap();
    let out = hddcor(&["simulate", "--config", path(&cfg)]);
    assert_eq!(code(&out), 2);
}

#[test]
fn simulate_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "example = \"ex1\"\nreplicates = 10\nfoo = 1\n\n[[grid]]\nn = 10\np = 2\n").unwrap();
    assert_eq!(code(&hddcor(&["simulate", "--config", path(&cfg)])), 2);
}

#[test]
fn simulate_output_is_thread_independent() {
    let cfg = fixture("small_grid.toml");
    let one = ok(&["--threads", "1", "simulate", "--config", path(&cfg)]);
    let many = ok(&["--threads", "8", "simulate", "--config", path(&cfg)]);
    assert_eq!(one.stdout, many.stdout);
    let text = String::from_utf8(one.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "example,n,p,q,method,alpha,replicates,rate,stderr,kde_max_gap"
    );
    assert_eq!(lines.count(), 6);
}

fn write_planted(dir: &Path, signal: Signal) -> (PathBuf, PathBuf, common::Fixture) {
    let f = planted_default(signal);
    let (px, py) = (dir.join("x.csv"), dir.join("y.csv"));
    std::fs::write(&px, f.x.to_csv().unwrap()).unwrap();
    std::fs::write(&py, f.y.to_csv().unwrap()).unwrap();
    (px, py, f)
}

#[test]
fn rolling_window_longer_than_sample_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let (px, py, _) = write_planted(dir.path(), Signal::None);
    let out = hddcor(&["rolling", "--x", path(&px), "--y", path(&py), "--window", "401"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn rolling_flags_the_planted_period_and_writes_the_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let (px, py, f) = write_planted(dir.path(), Signal::Abs);
    let out_path = dir.path().join("series.csv");
    ok(&["rolling", "--x", path(&px), "--y", path(&py), "--out", path(&out_path)]);

    let text = std::fs::read_to_string(&out_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "date,statistic,p_value,flagged");
    let flagged: Vec<&str> = lines
        .filter(|l| l.ends_with(",true"))
        .map(|l| l.split(',').next().unwrap())
        .collect();
    let inside = &f.x.dates[f.period.start + 65..f.period.end];
    for d in inside {
        assert!(flagged.contains(&d.as_str()), "{d} not flagged");
    }

    let sidecar: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("series.csv.cutoff.json")).unwrap()).unwrap();
    assert_eq!(sidecar["method"], "normal-tn");
    assert!(sidecar["cutoff"].as_f64().unwrap() > 0.0);
}

#[test]
fn rolling_compare_has_both_methods() {
    let dir = tempfile::tempdir().unwrap();
    let (px, py, _) = write_planted(dir.path(), Signal::None);
    let side = dir.path().join("cut.json");
    let out = ok(&[
        "--seed", "1", "rolling", "--x", path(&px), "--y", path(&py), "--compare", "--permutations", "99",
        "--cutoff-out", path(&side),
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("date,normal_tn_statistic,normal_tn_p_value,normal_tn_flagged,rv_statistic"));
    assert_eq!(text.lines().count(), 1 + 400 - 65);
    let cuts: Value = serde_json::from_str(&std::fs::read_to_string(&side).unwrap()).unwrap();
    assert_eq!(cuts.as_array().unwrap().len(), 2);
}

fn oracle(name: &str) -> Value {
    let out = ok(&["--format", "json", "oracle", "--joint", path(&fixture(name))]);
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn oracle_product_measure_has_zero_covariance() {
    let v = oracle("product.json");
    assert!(v["v2_xy"].as_f64().unwrap().abs() < 1e-12);
    assert!(v["v2_xy_via_d"].as_f64().unwrap().abs() < 1e-12);
    assert!(v["dcor2"].as_f64().unwrap().abs() < 1e-12);
    assert_eq!(v["bounds"]["all_pass"], Value::Bool(true));
}

#[test]
fn oracle_bernoulli_self_pair() {
    let v = oracle("bernoulli_self.json");
    for key in ["v2_xy", "v2_x", "v2_y"] {
        assert!((v[key].as_f64().unwrap() - 0.25).abs() < 1e-12, "{key}");
    }
    assert!((v["dcor2"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn oracle_rejects_bad_probabilities() {
    let out = hddcor(&["oracle", "--joint", path(&fixture("bad_probs.json"))]);
    assert_eq!(code(&out), 2);
}

#[test]
fn oracle_csv_is_flat() {
    let out = ok(&["oracle", "--joint", path(&fixture("bernoulli_self.json"))]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("quantity,value\n"));
    assert!(text.lines().any(|l| l.starts_with("bounds.tau,")));
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        let cfg = hddcor::experiment::ExperimentConfig::read(&p).unwrap();
        cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        seen += 1;
    }
    assert_eq!(seen, 4);
}
