use std::collections::BTreeMap;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{Context, Result};
use serde_json::json;

use ompboost::checks::run_check_suite;
use ompboost::lasso::{default_lambda0, scaled_lasso};
use ompboost::simulate::{monte_carlo, ExperimentConfig};
use ompboost::stopping::{self, StoppingConfig};
use ompboost::{coefficients_at, diagnostics, run_path, Dataset};

use crate::output;

const FIT_RULES: [&str; 6] = [
    "tau-true-noise",
    "tau-estimated-noise",
    "two-step",
    "hdaic",
    "oracle-classical",
    "oracle-balanced",
];

fn usage_error(msg: impl std::fmt::Display) -> Result<ExitCode> {
    eprintln!("error: {msg}");
    Ok(ExitCode::from(2))
}

fn build_pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w);
    }
    Ok(builder.build()?)
}

fn load_config(path: &Path) -> std::result::Result<ExperimentConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("config error: {}: {e}", path.display()))
}

pub fn simulate(
    config_path: &Path,
    out_dir: &Path,
    workers: Option<usize>,
    debug_asserts: bool,
) -> Result<ExitCode> {
    let config = match load_config(config_path) {
        Ok(c) => c,
        Err(msg) => return usage_error(msg),
    };
    let mut spec = match config.to_run_spec() {
        Ok(s) => s,
        Err(e) => return usage_error(e),
    };
    spec.debug_asserts = debug_asserts;

    let pool = build_pool(workers)?;
    let out = pool.install(|| monte_carlo(&spec, config.runs, config.seed))?;

    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create {}", out_dir.display()))?;
    std::fs::write(out_dir.join("runs.csv"), output::runs_csv(&out.results))?;
    std::fs::write(
        out_dir.join("summary.json"),
        output::summary_json(&out.summary),
    )?;

    print!("{}", output::summary_table(&out.summary, &out.results));
    for failure in &out.summary.failures {
        eprintln!(
            "warning: run {} failed: {}",
            failure.run_id, failure.message
        );
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Default)]
struct FitParams {
    c_tau: f64,
    lambda0_factor: Option<f64>,
    c_aic: f64,
    c_hdaic: f64,
    m_cap: Option<usize>,
    m_max: Option<usize>,
}

fn parse_fit_params(raw: &[String]) -> std::result::Result<FitParams, String> {
    let mut p = FitParams {
        c_tau: 0.0,
        c_aic: 2.0,
        c_hdaic: 2.0,
        ..Default::default()
    };
    for item in raw {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| format!("parameter '{item}' is not of the form key=value"))?;
        fn parsed<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
            value
                .parse()
                .map_err(|_| format!("cannot parse value '{value}' for parameter '{key}'"))
        }
        match key {
            "c_tau" => p.c_tau = parsed(key, value)?,
            "lambda0_factor" => p.lambda0_factor = Some(parsed(key, value)?),
            "c_aic" => p.c_aic = parsed(key, value)?,
            "c_hdaic" => p.c_hdaic = parsed(key, value)?,
            "m_cap" => p.m_cap = Some(parsed(key, value)?),
            "m_max" => p.m_max = Some(parsed(key, value)?),
            other => {
                return Err(format!(
                    "unknown parameter '{other}' (expected c_tau, lambda0_factor, c_aic, \
                     c_hdaic, m_cap, m_max)"
                ))
            }
        }
    }
    Ok(p)
}

pub fn fit(
    data_path: &Path,
    rule: &str,
    raw_params: &[String],
    intercept: bool,
) -> Result<ExitCode> {
    if !FIT_RULES.contains(&rule) {
        return usage_error(format!(
            "unknown rule '{rule}'; valid rules: {}",
            FIT_RULES.join(", ")
        ));
    }
    let params = match parse_fit_params(raw_params) {
        Ok(p) => p,
        Err(msg) => return usage_error(msg),
    };
    let mut data = match Dataset::from_csv_path(data_path) {
        Ok(d) => d,
        Err(e) => return usage_error(format!("{}: {e}", data_path.display())),
    };
    if intercept {
        data = data.with_intercept_column();
    }

    let needs_truth = matches!(
        rule,
        "tau-true-noise" | "oracle-classical" | "oracle-balanced"
    );
    if needs_truth && data.truth().is_none() {
        return usage_error(format!(
            "rule '{rule}' requires ground truth (f_star and epsilon columns in the CSV)"
        ));
    }

    let cap = data.n().min(data.p());
    let m_max = params.m_max.unwrap_or(cap / 2).clamp(1, cap);
    let path = run_path(&data, m_max)?;

    let mut extra = BTreeMap::<String, serde_json::Value>::new();
    let eps_norm_sq = data
        .truth()
        .map(|t| t.epsilon.iter().map(|e| e * e).sum::<f64>() / data.n() as f64);
    let mut cfg = StoppingConfig {
        sigma_hat_sq: 0.0,
        c_tau: params.c_tau,
        c_aic: params.c_aic,
        c_hdaic: params.c_hdaic,
        m_max,
        n: data.n(),
        p: data.p(),
    };

    let estimate_noise = |factor: f64,
                          cfg: &mut StoppingConfig,
                          extra: &mut BTreeMap<String, serde_json::Value>|
     -> Result<()> {
        let lambda0 = default_lambda0(data.n(), data.p(), factor)?;
        let est = scaled_lasso(&data, lambda0)?;
        cfg.sigma_hat_sq = est.sigma_hat_sq;
        extra.insert("sigma_hat_sq".into(), json!(est.sigma_hat_sq));
        extra.insert("sigma_hat".into(), json!(est.sigma_hat));
        extra.insert("lambda0".into(), json!(est.lambda0));
        extra.insert("noise_converged".into(), json!(est.converged));
        Ok(())
    };

    let (selected_m, capped) = match rule {
        "tau-true-noise" => {
            cfg.sigma_hat_sq = eps_norm_sq.expect("checked above");
            extra.insert("sigma_hat_sq".into(), json!(cfg.sigma_hat_sq));
            let sel = stopping::tau(path.r_sq(), &cfg);
            (sel.m, sel.capped)
        }
        "tau-estimated-noise" => {
            estimate_noise(params.lambda0_factor.unwrap_or(1.0), &mut cfg, &mut extra)?;
            let sel = stopping::tau(path.r_sq(), &cfg);
            extra.insert("tau".into(), json!(sel.m));
            (sel.m, sel.capped)
        }
        "two-step" => {
            estimate_noise(params.lambda0_factor.unwrap_or(0.5), &mut cfg, &mut extra)?;
            let tau = stopping::tau(path.r_sq(), &cfg);
            extra.insert("tau".into(), json!(tau.m));
            let sel = stopping::two_step(path.r_sq(), &cfg);
            (sel.m, sel.capped)
        }
        "hdaic" => {
            let cap = params
                .m_cap
                .unwrap_or_else(|| stopping::default_hdaic_cap(data.n(), data.p()));
            extra.insert("m_cap".into(), json!(cap.min(path.len())));
            (stopping::hdaic(path.r_sq(), &cfg, cap), false)
        }
        "oracle-classical" => {
            let diag = diagnostics(&path, &data)?;
            (stopping::classical_oracle(&diag), false)
        }
        "oracle-balanced" => {
            let diag = diagnostics(&path, &data)?;
            let sel = stopping::balanced_oracle(&diag);
            (sel.m, sel.capped)
        }
        _ => unreachable!("rule validated above"),
    };

    let beta = coefficients_at(&path, selected_m, &data)?;
    let selected_columns: Vec<String> = path.selected()[..selected_m]
        .iter()
        .map(|&j| data.column_name(j))
        .collect();
    let coefficients: BTreeMap<String, f64> = beta
        .iter()
        .enumerate()
        .filter(|(_, &b)| b != 0.0)
        .map(|(j, &b)| (data.column_name(j), b))
        .collect();

    let mut report = json!({
        "rule": rule,
        "n": data.n(),
        "p": data.p(),
        "m_max": m_max,
        "selected_m": selected_m,
        "capped": capped,
        "selected_columns": selected_columns,
        "coefficients": coefficients,
        "r_sq": path.r_sq(),
        "zero_correlation_steps": path.zero_correlation_steps(),
    });
    if let Some(obj) = report.as_object_mut() {
        for (k, v) in extra {
            obj.insert(k, v);
        }
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(ExitCode::SUCCESS)
}

pub fn noise_estimate(data_path: &Path, lambda0_factor: f64) -> Result<ExitCode> {
    let data = match Dataset::from_csv_path(data_path) {
        Ok(d) => d,
        Err(e) => return usage_error(format!("{}: {e}", data_path.display())),
    };
    let lambda0 = match default_lambda0(data.n(), data.p(), lambda0_factor) {
        Ok(l) => l,
        Err(e) => return usage_error(e),
    };
    let est = scaled_lasso(&data, lambda0)?;
    let report = json!({
        "sigma_hat_sq": est.sigma_hat_sq,
        "sigma_hat": est.sigma_hat,
        "lambda0": est.lambda0,
        "iterations": est.iterations,
        "converged": est.converged,
        "degenerate": est.degenerate,
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(ExitCode::SUCCESS)
}

pub fn check(config_path: &Path, workers: Option<usize>, corrupt_r_sq: bool) -> Result<ExitCode> {
    let config = match load_config(config_path) {
        Ok(c) => c,
        Err(msg) => return usage_error(msg),
    };
    if let Err(e) = config.to_run_spec() {
        return usage_error(e);
    }
    let pool = build_pool(workers)?;
    let suite = pool.install(|| run_check_suite(&config, corrupt_r_sq))?;

    println!("{}", serde_json::to_string_pretty(&suite.reports)?);
    for report in &suite.reports {
        if !report.pass {
            let kind = if report.deterministic {
                "DETERMINISTIC"
            } else {
                "probabilistic"
            };
            eprintln!(
                "warning: {kind} check '{}' failed ({} of {} instances violated)",
                report.name, report.violations, report.instances
            );
        }
    }
    if suite.deterministic_pass {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("error: deterministic identity checks failed");
        Ok(ExitCode::from(1))
    }
}
