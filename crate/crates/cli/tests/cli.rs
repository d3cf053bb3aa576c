//! End-to-end tests of the binary: golden fit output, reproducible
//! simulation artifacts, and the documented exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ompboost"))
}

fn manifest_path(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn demo_csv() -> PathBuf {
    manifest_path("data/demo.csv")
}

fn write_config(dir: &Path, runs: usize, seed: u64) -> PathBuf {
    let path = dir.join("config.json");
    let text = format!(
        r#"{{
            "signal": {{"kind": "g2"}},
            "design": {{"kind": "uncorrelated"}},
            "noise": {{"kind": "gaussian", "sigma_sq": 1.0}},
            "n": 50, "p": 40, "runs": {runs}, "seed": {seed},
            "m_max": 15,
            "rules": [{{"name": "tau-true-noise"}}, {{"name": "hdaic"}}]
        }}"#
    );
    std::fs::write(&path, text).unwrap();
    path
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ompboost-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn fit_demo_matches_golden_file() {
    let out = bin()
        .args(["fit", "--data"])
        .arg(demo_csv())
        .args(["--rule", "tau-true-noise"])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let golden = std::fs::read_to_string(manifest_path("tests/golden/fit_demo.json")).unwrap();
    assert_eq!(
        stdout_of(&out),
        golden,
        "fit output drifted from the golden file"
    );
}

#[test]
fn fit_two_step_reports_tau_and_noise_estimate() {
    let out = bin()
        .args(["fit", "--data"])
        .arg(demo_csv())
        .args(["--rule", "two-step", "--param", "lambda0_factor=0.5"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert!(v.get("tau").is_some());
    assert!(v.get("sigma_hat_sq").is_some());
    let tau = v["tau"].as_u64().unwrap();
    let selected = v["selected_m"].as_u64().unwrap();
    assert!(selected <= tau);
}

#[test]
fn fit_unknown_rule_exits_2_and_lists_rules() {
    let out = bin()
        .args(["fit", "--data"])
        .arg(demo_csv())
        .args(["--rule", "magic"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_of(&out);
    assert!(
        err.contains("oracle-classical") && err.contains("two-step"),
        "{err}"
    );
}

#[test]
fn fit_oracle_without_truth_exits_2() {
    let dir = temp_dir("no-truth");
    let csv = dir.join("plain.csv");
    std::fs::write(&csv, "y,a,b\n1.0,0.5,1.0\n2.0,1.5,0.0\n0.5,0.2,0.4\n").unwrap();
    let out = bin()
        .args(["fit", "--data"])
        .arg(&csv)
        .args(["--rule", "oracle-classical"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("ground truth"));
}

#[test]
fn simulate_is_reproducible_and_writes_artifacts() {
    let dir = temp_dir("simulate");
    let config = write_config(&dir, 2, 7);

    let run = |out_name: &str| {
        let out_dir = dir.join(out_name);
        let out = bin()
            .args(["simulate", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out_dir)
            .args(["--workers", "2"])
            .output()
            .unwrap();
        assert!(out.status.success(), "stderr: {}", stderr_of(&out));
        out_dir
    };
    let a = run("a");
    let b = run("b");

    // The summary carries no wall-clock values and must be byte-identical.
    let sa = std::fs::read(a.join("summary.json")).unwrap();
    let sb = std::fs::read(b.join("summary.json")).unwrap();
    assert_eq!(sa, sb);

    // The CSV is identical except for the measured `seconds` column.
    let strip_seconds = |path: &Path| -> Vec<String> {
        std::fs::read_to_string(path)
            .unwrap()
            .lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect()
    };
    assert_eq!(
        strip_seconds(&a.join("runs.csv")),
        strip_seconds(&b.join("runs.csv"))
    );

    let csv = std::fs::read_to_string(a.join("runs.csv")).unwrap();
    assert!(csv.starts_with("run_id,method,selected_m,emp_risk,pop_risk"));
    // Two runs, two methods each.
    assert_eq!(csv.lines().count(), 1 + 2 * 2);
}

#[test]
fn simulate_rejects_malformed_config_without_output() {
    let dir = temp_dir("malformed");
    let config = dir.join("bad.json");
    std::fs::write(&config, "{ not json").unwrap();
    let out_dir = dir.join("out");
    let out = bin()
        .args(["simulate", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("line"), "{}", stderr_of(&out));
    assert!(!out_dir.exists());
}

#[test]
fn simulate_rejects_unknown_config_keys() {
    let dir = temp_dir("unknown-key");
    let config = dir.join("config.json");
    std::fs::write(
        &config,
        r#"{"signal": {"kind": "g2"}, "design": {"kind": "uncorrelated"},
           "noise": {"kind": "gaussian"}, "n": 10, "p": 5, "runs": 1, "seed": 1,
           "rules": [{"name": "tau-true-noise"}], "bogus_knob": 3}"#,
    )
    .unwrap();
    let out = bin()
        .args(["simulate", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("bogus_knob"));
}

#[test]
fn check_passes_clean_and_fails_when_corrupted() {
    let dir = temp_dir("check");
    let config = write_config(&dir, 3, 11);

    let clean = bin()
        .args(["check", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(
        clean.status.code(),
        Some(0),
        "stderr: {}",
        stderr_of(&clean)
    );
    let reports: serde_json::Value = serde_json::from_str(&stdout_of(&clean)).unwrap();
    assert!(reports.as_array().unwrap().len() >= 5);

    let corrupted = bin()
        .args(["check", "--config"])
        .arg(&config)
        .arg("--corrupt-r-sq")
        .output()
        .unwrap();
    assert_eq!(corrupted.status.code(), Some(1));
    assert!(stderr_of(&corrupted).contains("deterministic"));
}

#[test]
fn noise_estimate_emits_json() {
    let out = bin()
        .args(["noise-estimate", "--data"])
        .arg(demo_csv())
        .args(["--lambda0-factor", "1.0"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert!(v["sigma_hat_sq"].as_f64().unwrap() > 0.0);
    assert_eq!(v["converged"], serde_json::Value::Bool(true));
}
