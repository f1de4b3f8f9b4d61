use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qgen::io::{parse_distribution, parse_mle_history, parse_params, parse_qgan_history, parse_samples};
use serde_json::Value;

fn qgen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qgen"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn cfg(name: &str) -> String {
    configs().join(name).to_str().unwrap().to_string()
}

fn pretrained() -> String {
    cfg("pretrained/task1_params.txt")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("exp.cfg");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn train_mle_writes_artifacts_that_parse_back() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = qgen(&["--quiet", "--out-dir", out.to_str().unwrap(), "train-mle", &cfg("mle_minimal.cfg")]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let (ansatz, params) = parse_params(&fs::read_to_string(out.join("params.txt")).unwrap()).unwrap();
    assert_eq!((ansatz.n_qubits(), params.len()), (1, 1));
    let history = parse_mle_history(&fs::read_to_string(out.join("history.csv")).unwrap()).unwrap();
    assert_eq!(history.len(), 200);
    let dist = parse_distribution(&fs::read_to_string(out.join("distribution.tsv")).unwrap()).unwrap();
    assert!(dist.probs()[1] > 0.9);
    let summary: Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert!(summary["final_nll"].as_f64().unwrap() < summary["initial_nll"].as_f64().unwrap());
    assert!(summary["divergence"]["kl"].is_number());
    let echo = fs::read_to_string(out.join("config-echo.txt")).unwrap();
    assert!(echo.contains("iterations = 200"));
}

#[test]
fn train_qgan_writes_artifacts_that_parse_back() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "[ansatz]\nn_qubits = 2\nn_layers = 1\n\n[train]\niterations = 20\neval_interval = 5\n\n[target]\nkind = uniform\n",
    );
    let out = dir.path().join("out");
    let o = qgen(&["--quiet", "--out-dir", out.to_str().unwrap(), "train-qgan", &config]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let h = parse_qgan_history(&fs::read_to_string(out.join("history.csv")).unwrap()).unwrap();
    let its: Vec<usize> = h.records.iter().map(|r| r.iteration).collect();
    assert_eq!(its, vec![0, 5, 10, 15, 20]);
    parse_params(&fs::read_to_string(out.join("disc_params.txt")).unwrap()).unwrap();
    let summary: Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    for key in ["js", "tv", "kl"] {
        assert!(summary["divergence"][key].is_number());
    }
    assert!(summary["generated"]["mean"].is_number());
}

#[test]
fn zero_iterations_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "[ansatz]\nn_qubits = 1\n\n[train]\niterations = 0\n\n[target]\nkind = uniform\n",
    );
    let o = qgen(&["--out-dir", dir.path().join("o").to_str().unwrap(), "train-mle", &config]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn bad_config_and_missing_files_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write_config(dir.path(), "[ansatz]\nn_qubits = 1\nwidth = 3\n\n[target]\nkind = uniform\n");
    assert_eq!(qgen(&["train-mle", &unknown]).status.code(), Some(2));
    assert_eq!(qgen(&["train-qgan", "/nonexistent/x.cfg"]).status.code(), Some(2));
    assert_eq!(qgen(&["sample", "/nonexistent/params.txt"]).status.code(), Some(2));
    assert_eq!(qgen(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn sample_pretrained_gives_four_rows_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let mut tables = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = qgen(&["--quiet", "--seed", "4", "--out-dir", out.to_str().unwrap(), "sample", &pretrained(), "-n", "500"]);
        assert_eq!(o.status.code(), Some(0));
        tables.push(fs::read_to_string(out.join("samples.tsv")).unwrap());
    }
    assert_eq!(tables[0], tables[1]);
    let rows: Vec<&str> = tables[0].lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 4);
    let set = parse_samples(&tables[0]).unwrap();
    assert_eq!(set.total(), 500);
}

#[test]
fn sample_zero_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = qgen(&["--out-dir", dir.path().to_str().unwrap(), "sample", &pretrained(), "-n", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn eval_requires_a_target() {
    assert_eq!(qgen(&["eval", &pretrained()]).status.code(), Some(2));
    assert_eq!(qgen(&["eval", &pretrained(), "--target", "nonsense"]).status.code(), Some(2));
    assert_eq!(qgen(&["eval", &pretrained(), "--target", "uniform", "--perturb", "-1"]).status.code(), Some(2));
}

#[test]
fn eval_without_noise_reports_identical_metrics() {
    let o = qgen(&["eval", &pretrained(), "--target", "uniform", "--perturb", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["before"], report["after"]);
    assert_eq!(report["js_shift"].as_f64(), Some(0.0));
}

#[test]
fn eval_small_noise_on_pretrained_generator() {
    let o = qgen(&["--seed", "3", "eval", &pretrained(), "--target", "uniform", "--perturb", "0.01"]);
    assert_eq!(o.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(report["before"]["tv"].as_f64().unwrap() < 0.05);
    assert!(report["js_shift"].as_f64().unwrap() < 0.01);
}

#[test]
fn training_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut runs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = qgen(&["--quiet", "--seed", "7", "--out-dir", out.to_str().unwrap(), "train-mle", &cfg("mle_minimal.cfg")]);
        assert_eq!(o.status.code(), Some(0));
        runs.push(fs::read(out.join("history.csv")).unwrap());
    }
    assert_eq!(runs[0], runs[1]);
}
