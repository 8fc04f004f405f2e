//! Small end-to-end runs: determinism, persistence and the command line.

use std::path::{Path, PathBuf};
use std::process::Command;

use trigzeros::runner::{run_experiment, ExperimentConfig, RunResult};
use trigzeros::Error;

const SMALL: &str = r#"
[model]
kind = "finite_variance"
family = "rademacher"
sigma1_sq = 1.0
sigma2_sq = 1.0
rho = 0.0

[window]
center = 1.0
a = 0.0
b = 2.0
n = 60

[run]
experiment_id = "small"
replicas = 300
master_seed = 9
outputs = ["json", "csv"]
"#;

fn small() -> ExperimentConfig {
    ExperimentConfig::from_toml_str(SMALL).unwrap()
}

#[test]
fn reruns_are_identical() {
    let cfg = small();
    let first = run_experiment(&cfg, 1).unwrap();
    let second = run_experiment(&cfg, 3).unwrap();
    assert!(first.same_outcome(&second));
    assert_eq!(first.flags.replicas, 300);
    assert_eq!(first.poly.n_samples(), first.flags.n_samples);
    // below the chi-square sample floor only TV is reported
    assert!(first.verdict.chi2_pvalue.is_none());
    let mut other = cfg.clone();
    other.run.master_seed = 10;
    assert!(!run_experiment(&other, 1).unwrap().same_outcome(&first));
}

#[test]
fn json_layout_and_round_trip() {
    let r = run_experiment(&small(), 1).unwrap();
    let text = r.to_json_string().unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in ["config", "poly_pmf", "limit_pmf", "verdict", "flags", "timing"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let pmf = v["poly_pmf"].as_array().unwrap();
    let total: f64 = pmf.iter().map(|e| e[1].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert!(pmf.iter().all(|e| e[0].is_u64()));
    let back = RunResult::from_json_str(&text).unwrap();
    assert_eq!(back, r);
}

#[test]
fn csv_columns() {
    let r = run_experiment(&small(), 1).unwrap();
    let mut buf = Vec::new();
    r.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,poly_prob,limit_prob"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert!(!rows.is_empty());
    for col in [1, 2] {
        let s: f64 = rows.iter().map(|r| r[col]).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }
}

#[test]
fn config_errors() {
    let unknown = SMALL.replace("n = 60", "n = 60\nwidth = 3");
    assert!(matches!(ExperimentConfig::from_toml_str(&unknown), Err(Error::Config(_))));
    let zero = SMALL.replace("replicas = 300", "replicas = 0");
    assert!(ExperimentConfig::from_toml_str(&zero).unwrap().validate().is_err());
    let backwards = SMALL.replace("b = 2.0", "b = -1.0");
    assert!(run_experiment(&ExperimentConfig::from_toml_str(&backwards).unwrap(), 1).is_err());
}

#[test]
fn shipped_configs_validate() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cfg = ExperimentConfig::from_path(&path).unwrap();
            cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 4);
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_trigzeros")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = cli(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn command_line() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("small.toml");
    std::fs::write(&config, SMALL).unwrap();
    let base = dir.path().join("run");
    ok(&["simulate", "--config", s(&config), "--out", s(&base)]);
    let json = base.with_extension("json");
    let csv = base.with_extension("csv");
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("k,poly_prob,limit_prob"));
    let stored = RunResult::from_json_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert!(stored.same_outcome(&run_experiment(&small(), 1).unwrap()));

    let other = dir.path().join("other.json");
    ok(&["simulate", "--config", s(&config), "--seed", "77", "--workers", "2", "--format", "json", "--out", s(&other)]);
    let verdict: serde_json::Value = serde_json::from_str(&ok(&["compare", s(&json), s(&other)])).unwrap();
    assert!((0.0..=1.0).contains(&verdict["tv"].as_f64().unwrap()));

    let shown = ok(&["show", s(&json)]);
    assert!(shown.contains("experiment   small"));

    let cov: serde_json::Value = serde_json::from_str(&ok(&["covariance", "--n", "512,1024"])).unwrap();
    assert_eq!(cov.as_array().unwrap().len(), 6);
    let weyl = ok(&["weyl", "--n", "1000", "--format", "csv"]);
    assert!(weyl.lines().count() >= 2);

    let bad = cli(&["simulate", "--config", s(&dir.path().join("missing.toml"))]);
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).starts_with("error:"));
}
