//! End-to-end tests of the command-line binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn featnet(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_featnet"))
        .args(args)
        .current_dir(dir)
        .env("FEATNET_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn generate(dir: &Path, edges: &str, features: &str) {
    let out = featnet(
        dir,
        &[
            "generate",
            "--family",
            "chi-bernoulli",
            "--n",
            "500",
            "--seed",
            "7",
            "--edges",
            edges,
            "--features",
            features,
        ],
    );
    assert_success(&out);
}

#[test]
fn generate_is_reproducible_byte_for_byte() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), "e1.tsv", "f1.tsv");
    generate(dir.path(), "e2.tsv", "f2.tsv");
    let e1 = fs::read(dir.path().join("e1.tsv")).unwrap();
    let e2 = fs::read(dir.path().join("e2.tsv")).unwrap();
    assert!(!e1.is_empty());
    assert_eq!(e1, e2);
    assert_eq!(
        fs::read(dir.path().join("f1.tsv")).unwrap(),
        fs::read(dir.path().join("f2.tsv")).unwrap()
    );
}

#[test]
fn fit_writes_matrix_and_diagnostics() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), "e.tsv", "f.tsv");
    let out = featnet(
        dir.path(),
        &[
            "fit", "--edges", "e.tsv", "--features", "f.tsv", "--estimator", "llama", "--out",
            "w.tsv", "--diagnostics", "d.json",
        ],
    );
    assert_success(&out);
    let matrix = fs::read_to_string(dir.path().join("w.tsv")).unwrap();
    assert!(matrix.starts_with("#featnet-matrix\t"));
    let diag = fs::read_to_string(dir.path().join("d.json")).unwrap();
    for key in ["mistakes", "radius_sq", "examples_seen", "skipped", "wall_time_s"] {
        assert!(diag.contains(key), "missing {key} in {diag}");
    }

    // naive smoothing flags reach the estimator
    let out = featnet(
        dir.path(),
        &[
            "fit", "--edges", "e.tsv", "--features", "f.tsv", "--estimator", "naive",
            "--smoothing", "add-one", "--out", "wn.tsv",
        ],
    );
    assert_success(&out);
    assert!(dir.path().join("wn.tsv").exists());
}

#[test]
fn evaluate_writes_report_and_curves() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), "e.tsv", "f.tsv");
    let out = featnet(
        dir.path(),
        &[
            "evaluate", "--edges", "e.tsv", "--features", "f.tsv", "--estimator", "llama",
            "--kappa", "1.5", "--folds", "10", "--seed", "42", "--report", "r.csv",
            "--curve-dir", "curves",
        ],
    );
    assert_success(&out);
    let report = fs::read_to_string(dir.path().join("r.csv")).unwrap();
    let lines: Vec<&str> = report.trim_end().lines().collect();
    assert_eq!(lines[0], "fold,aupr");
    assert_eq!(lines.len(), 12); // header + 10 folds + mean,std row
    assert!(dir.path().join("curves/curve_fold_0.csv").exists());
    assert!(String::from_utf8_lossy(&out.stdout).contains("mean AUPR"));

    // identical invocation, identical bytes
    let rerun = featnet(
        dir.path(),
        &[
            "evaluate", "--edges", "e.tsv", "--features", "f.tsv", "--estimator", "llama",
            "--kappa", "1.5", "--folds", "10", "--seed", "42", "--report", "r2.csv",
        ],
    );
    assert_success(&rerun);
    assert_eq!(report, fs::read_to_string(dir.path().join("r2.csv")).unwrap());
}

#[test]
fn explain_prints_mean_and_std() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), "e.tsv", "f.tsv");
    let out = featnet(
        dir.path(),
        &["explain", "--edges", "e.tsv", "--features", "f.tsv", "--folds", "5"],
    );
    assert_success(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with("explainability: "), "{stdout}");
    assert!(stdout.contains('\u{00b1}'));
}

#[test]
fn curve_from_scored_pairs_file() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("pairs.tsv"),
        "0\t1\t0.9\t+1\n1\t2\t0.8\t-1\n2\t0\t0.7\t+1\n",
    )
    .unwrap();
    let out = featnet(
        dir.path(),
        &["curve", "--pairs", "pairs.tsv", "--out", "c.csv"],
    );
    assert_success(&out);
    let curve = fs::read_to_string(dir.path().join("c.csv")).unwrap();
    assert!(curve.starts_with("recall,precision\n0,1\n"));
    assert!(curve.trim_end().ends_with("1,0.6666666666666666"));
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = TempDir::new().unwrap();
    // unknown flag: usage error
    let out = featnet(dir.path(), &["evaluate", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
    // missing file: data error
    let out = featnet(
        dir.path(),
        &["curve", "--pairs", "missing.tsv", "--out", "c.csv"],
    );
    assert_eq!(out.status.code(), Some(2));
    // malformed input: data error with location
    fs::write(dir.path().join("bad.tsv"), "not enough fields\n").unwrap();
    fs::write(dir.path().join("empty.tsv"), "").unwrap();
    let out = featnet(
        dir.path(),
        &[
            "fit", "--edges", "bad.tsv", "--features", "empty.tsv", "--estimator", "naive",
            "--out", "w.tsv",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.tsv:1"));
    // help is a success
    let out = featnet(dir.path(), &["--help"]);
    assert_eq!(out.status.code(), Some(0));
}
