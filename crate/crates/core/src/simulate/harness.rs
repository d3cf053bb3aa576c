//! Per-replication pipeline and the Monte Carlo aggregator.
//!
//! Every replication builds one dataset, computes the greedy path once, and
//! evaluates all selection rules on that shared path, so risk comparisons are
//! not confounded by path randomness. Wall-clock cost per method is measured
//! separately: sequential rules re-run the path only up to their stopping
//! iteration, exhaustive rules are charged the full path.

use std::collections::HashMap;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{Dataset, PopCovariance, Truth};
use crate::error::{Error, Result};
use crate::lasso::{self, ScaledLassoResult};
use crate::omp::{self, OmpPath, PathDiagnostics};
use crate::stopping::{self, StoppingConfig};

use super::gen::{
    build_signal, sample_design, sample_response, DesignKind, DesignSpec, NoiseSpec, SignalSpec,
};

/// A selection rule evaluated per replication. Constants default to the
/// regression-study choices (`C_tau = 0`, `C_AIC = C_HDAIC = 2`,
/// `lambda_0` factors 1 and 0.5).
#[derive(Clone, Debug, PartialEq)]
pub enum Rule {
    TauTrueNoise {
        c_tau: f64,
    },
    TauEstimatedNoise {
        c_tau: f64,
        lambda0_factor: f64,
    },
    TwoStep {
        c_tau: f64,
        lambda0_factor: f64,
        c_aic: f64,
    },
    Hdaic {
        c_hdaic: f64,
        m_cap: Option<usize>,
    },
    OracleClassical,
    OracleBalanced,
    LassoCv {
        folds: usize,
        grid_size: usize,
    },
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::TauTrueNoise { .. } => "tau-true-noise",
            Rule::TauEstimatedNoise { .. } => "tau-estimated-noise",
            Rule::TwoStep { .. } => "two-step",
            Rule::Hdaic { .. } => "hdaic",
            Rule::OracleClassical => "oracle-classical",
            Rule::OracleBalanced => "oracle-balanced",
            Rule::LassoCv { .. } => "lasso-cv",
        }
    }
}

/// Full specification of one experiment cell.
#[derive(Clone, Debug)]
pub struct RunSpec {
    pub signal: SignalSpec,
    pub design: DesignSpec,
    pub noise: NoiseSpec,
    pub rules: Vec<Rule>,
    /// Path length; defaults to `min(n, p) / 2`.
    pub m_max: Option<usize>,
    /// Assert the deterministic identities on every replication.
    pub debug_asserts: bool,
    /// Retain per-run diagnostics for the check suites.
    pub keep_diagnostics: bool,
}

impl RunSpec {
    pub fn effective_m_max(&self, n: usize, p: usize) -> usize {
        let cap = n.min(p);
        self.m_max.unwrap_or(cap / 2).min(cap).max(1)
    }
}

/// One method's outcome within a replication.
#[derive(Clone, Debug, Serialize)]
pub struct MethodResult {
    pub method: String,
    pub selected_m: usize,
    pub capped: bool,
    pub emp_risk: f64,
    pub pop_risk: Option<f64>,
    pub rel_efficiency: f64,
    /// `m_hat - m_classical` (support size minus oracle for the Lasso).
    pub dev_from_oracle: i64,
    pub sigma_hat_sq: Option<f64>,
    pub noise_abs_err: Option<f64>,
    /// Chosen penalty, for the cross-validated Lasso.
    pub lambda: Option<f64>,
    /// Measured wall-clock cost of the method (excluded from determinism).
    pub seconds: f64,
}

/// Everything recorded for one replication.
#[derive(Clone, Debug, Serialize)]
pub struct RunResult {
    pub run_id: usize,
    pub oracle_classical: usize,
    pub oracle_balanced: usize,
    pub oracle_balanced_capped: bool,
    pub risk_at_classical: f64,
    pub risk_at_balanced: f64,
    pub eps_norm_sq: f64,
    pub methods: Vec<MethodResult>,
}

/// Retained per-run material for the theory-check suites.
#[derive(Clone, Debug)]
pub struct RunArtifacts {
    pub run_id: usize,
    pub r_sq: Vec<f64>,
    pub diag: PathDiagnostics,
    /// `sigma_hat^2` per estimated-noise lambda0 factor (bits of the factor).
    pub noise_estimates: Vec<(f64, f64)>,
}

/// Relative efficiency of a selection: `min_m ||F_m - f*||_n / ||F_mhat -
/// f*||_n`, with the 0/0 case (exact recovery everywhere) defined as 1.
pub fn relative_efficiency(diag: &PathDiagnostics, m_hat: usize) -> f64 {
    let min_risk = diag.emp_risk.iter().cloned().fold(f64::INFINITY, f64::min);
    let sel = diag.emp_risk[m_hat];
    if sel == 0.0 {
        return 1.0;
    }
    (min_risk / sel).sqrt()
}

/// Derive the per-replication seed from the master seed; splittable, so the
/// result never depends on how runs are distributed over workers.
pub fn derive_run_seed(master_seed: u64, run_index: u64) -> u64 {
    let mut s = master_seed ^ 0x7f4a_7c15_9e37_79b9;
    for x in [run_index, 0x243f_6a88_85a3_08d3] {
        s = s.wrapping_add(x).wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = s;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        s = z ^ (z >> 31);
    }
    s
}

struct NoiseCache {
    entries: HashMap<u64, (ScaledLassoResult, f64)>,
}

impl NoiseCache {
    fn new() -> Self {
        NoiseCache {
            entries: HashMap::new(),
        }
    }

    fn get(&mut self, data: &Dataset, factor: f64) -> Result<(ScaledLassoResult, f64)> {
        if let Some(hit) = self.entries.get(&factor.to_bits()) {
            return Ok(hit.clone());
        }
        let lambda0 = lasso::default_lambda0(data.n(), data.p(), factor)?;
        let start = Instant::now();
        let result = lasso::scaled_lasso(data, lambda0)?;
        let seconds = start.elapsed().as_secs_f64();
        self.entries
            .insert(factor.to_bits(), (result.clone(), seconds));
        Ok((result, seconds))
    }
}

fn base_config(sigma_hat_sq: f64, c_tau: f64, m_max: usize, data: &Dataset) -> StoppingConfig {
    StoppingConfig {
        sigma_hat_sq,
        c_tau,
        c_aic: 2.0,
        c_hdaic: 2.0,
        m_max,
        n: data.n(),
        p: data.p(),
    }
}

/// Time a fresh sequential run of the path up to the stopping condition of
/// `cfg`; this is what the stopping rule actually costs.
fn timed_sequential_path(
    data: &Dataset,
    m_max: usize,
    cfg: &StoppingConfig,
) -> Result<(usize, f64)> {
    let start = Instant::now();
    let path = omp::run_path_until(data, m_max, |m, r| r <= stopping::threshold(m, cfg))?;
    Ok((path.len(), start.elapsed().as_secs_f64()))
}

/// Sample the dataset for one replication seed: signal, design, response,
/// plus the population covariance (regression) or the intercept column
/// (classification).
pub fn build_run_dataset(spec: &RunSpec, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let beta_star = build_signal(&spec.signal, spec.design.p)?;
    let x = sample_design(&spec.design, &mut rng)?;
    let response = sample_response(&x, &beta_star, &spec.noise, &mut rng)?;

    match spec.noise {
        NoiseSpec::Gaussian { .. } => {
            let gamma = match spec.design.kind {
                DesignKind::Uncorrelated => PopCovariance::Identity,
                DesignKind::Banded { a, b } => PopCovariance::Banded { a, b },
            };
            Dataset::new(x, response.y)?
                .with_truth(Truth {
                    beta_star: Some(beta_star),
                    epsilon: response.epsilon,
                    f_star: response.f_star,
                })?
                .with_population_covariance(gamma)
        }
        NoiseSpec::Classification => {
            // The design handed to the greedy algorithm carries an intercept
            // column; the clamped probability is the estimation target.
            let ds = Dataset::new(x, response.y)?.with_truth(Truth {
                beta_star: None,
                epsilon: response.epsilon,
                f_star: response.f_star,
            })?;
            Ok(ds.with_intercept_column())
        }
    }
}

/// Evaluate one replication: sample data, run the shared path, apply every
/// rule. The RNG stream is fully determined by `seed`.
pub fn run_once(
    spec: &RunSpec,
    run_id: usize,
    seed: u64,
) -> Result<(RunResult, Option<RunArtifacts>)> {
    let data = build_run_dataset(spec, seed)?;
    let m_max = spec.effective_m_max(data.n(), data.p());
    let path_start = Instant::now();
    let path = omp::run_path(&data, m_max)?;
    let path_seconds = path_start.elapsed().as_secs_f64();
    let diag = omp::diagnostics(&path, &data)?;

    if spec.debug_asserts {
        assert_deterministic_identities(&path, &diag)?;
    }

    let m_classical = stopping::classical_oracle(&diag);
    let balanced = stopping::balanced_oracle(&diag);
    let mut noise_cache = NoiseCache::new();
    let mut methods = Vec::with_capacity(spec.rules.len());

    for rule in &spec.rules {
        let result = match rule {
            Rule::TauTrueNoise { c_tau } => {
                let cfg = base_config(diag.eps_norm_sq, *c_tau, m_max, &data);
                let sel = stopping::tau(path.r_sq(), &cfg);
                let (rerun_len, seconds) = timed_sequential_path(&data, m_max, &cfg)?;
                debug_assert_eq!(rerun_len, sel.m, "sequential rerun disagrees with scan");
                method_result(
                    rule.name(),
                    sel.m,
                    sel.capped,
                    &path,
                    &diag,
                    &data,
                    m_classical,
                    Some(diag.eps_norm_sq),
                    seconds,
                )?
            }
            Rule::TauEstimatedNoise {
                c_tau,
                lambda0_factor,
            } => {
                let (est, est_seconds) = noise_cache.get(&data, *lambda0_factor)?;
                let cfg = base_config(est.sigma_hat_sq, *c_tau, m_max, &data);
                let sel = stopping::tau(path.r_sq(), &cfg);
                let (_, path_secs) = timed_sequential_path(&data, m_max, &cfg)?;
                method_result(
                    rule.name(),
                    sel.m,
                    sel.capped,
                    &path,
                    &diag,
                    &data,
                    m_classical,
                    Some(est.sigma_hat_sq),
                    est_seconds + path_secs,
                )?
            }
            Rule::TwoStep {
                c_tau,
                lambda0_factor,
                c_aic,
            } => {
                let (est, est_seconds) = noise_cache.get(&data, *lambda0_factor)?;
                let mut cfg = base_config(est.sigma_hat_sq, *c_tau, m_max, &data);
                cfg.c_aic = *c_aic;
                let sel = stopping::two_step(path.r_sq(), &cfg);
                // Cost: sequential path to tau plus the AIC scan over m <= tau.
                let start = Instant::now();
                let rerun =
                    omp::run_path_until(&data, m_max, |m, r| r <= stopping::threshold(m, &cfg))?;
                let timed_sel = stopping::two_step(rerun.r_sq(), &cfg);
                let seconds = start.elapsed().as_secs_f64();
                debug_assert_eq!(timed_sel.m, sel.m, "two-step rerun disagrees with scan");
                method_result(
                    rule.name(),
                    sel.m,
                    sel.capped,
                    &path,
                    &diag,
                    &data,
                    m_classical,
                    Some(est.sigma_hat_sq),
                    est_seconds + seconds,
                )?
            }
            Rule::Hdaic { c_hdaic, m_cap } => {
                let mut cfg = base_config(diag.eps_norm_sq, 0.0, m_max, &data);
                cfg.c_hdaic = *c_hdaic;
                let cap = m_cap.unwrap_or(path.len());
                let scan_start = Instant::now();
                let m = stopping::hdaic(path.r_sq(), &cfg, cap);
                let scan_secs = scan_start.elapsed().as_secs_f64();
                // Exhaustive criterion: charged the full path it requires.
                method_result(
                    rule.name(),
                    m,
                    false,
                    &path,
                    &diag,
                    &data,
                    m_classical,
                    None,
                    path_seconds + scan_secs,
                )?
            }
            Rule::OracleClassical => {
                let start = Instant::now();
                let m = stopping::classical_oracle(&diag);
                method_result(
                    rule.name(),
                    m,
                    false,
                    &path,
                    &diag,
                    &data,
                    m_classical,
                    None,
                    start.elapsed().as_secs_f64(),
                )?
            }
            Rule::OracleBalanced => {
                let start = Instant::now();
                let sel = stopping::balanced_oracle(&diag);
                method_result(
                    rule.name(),
                    sel.m,
                    sel.capped,
                    &path,
                    &diag,
                    &data,
                    m_classical,
                    None,
                    start.elapsed().as_secs_f64(),
                )?
            }
            Rule::LassoCv { folds, grid_size } => {
                let start = Instant::now();
                let grid = lasso::default_lambda_grid(&data, *grid_size);
                let cv = lasso::lasso_cv(&data, *folds, &grid, seed)?;
                let seconds = start.elapsed().as_secs_f64();
                lasso_method_result(&cv, &diag, &data, m_classical, seconds)?
            }
        };
        methods.push(result);
    }

    let artifacts = if spec.keep_diagnostics {
        let mut noise_estimates: Vec<(f64, f64)> = noise_cache
            .entries
            .iter()
            .map(|(bits, (est, _))| (f64::from_bits(*bits), est.sigma_hat_sq))
            .collect();
        noise_estimates.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Some(RunArtifacts {
            run_id,
            r_sq: path.r_sq().to_vec(),
            noise_estimates,
            diag: diag.clone(),
        })
    } else {
        None
    };

    Ok((
        RunResult {
            run_id,
            oracle_classical: m_classical,
            oracle_balanced: balanced.m,
            oracle_balanced_capped: balanced.capped,
            risk_at_classical: diag.emp_risk[m_classical],
            risk_at_balanced: diag.emp_risk[balanced.m],
            eps_norm_sq: diag.eps_norm_sq,
            methods,
        },
        artifacts,
    ))
}

#[allow(clippy::too_many_arguments)]
fn method_result(
    name: &str,
    m: usize,
    capped: bool,
    path: &OmpPath,
    diag: &PathDiagnostics,
    data: &Dataset,
    m_classical: usize,
    sigma_hat_sq: Option<f64>,
    seconds: f64,
) -> Result<MethodResult> {
    let pop_risk = match (
        data.gamma(),
        data.truth().and_then(|t| t.beta_star.as_ref()),
    ) {
        (Some(gamma), Some(beta_star)) => {
            let beta_hat = omp::coefficients_at(path, m, data)?;
            Some(omp::population_risk(&beta_hat, beta_star, gamma)?)
        }
        _ => None,
    };
    Ok(MethodResult {
        method: name.to_string(),
        selected_m: m,
        capped,
        emp_risk: diag.emp_risk[m],
        pop_risk,
        rel_efficiency: relative_efficiency(diag, m),
        dev_from_oracle: m as i64 - m_classical as i64,
        noise_abs_err: sigma_hat_sq.map(|s| (s - diag.eps_norm_sq).abs()),
        sigma_hat_sq,
        lambda: None,
        seconds,
    })
}

fn lasso_method_result(
    cv: &lasso::LassoCvResult,
    diag: &PathDiagnostics,
    data: &Dataset,
    m_classical: usize,
    seconds: f64,
) -> Result<MethodResult> {
    let truth = data
        .truth()
        .ok_or(Error::MissingTruth("lasso baseline risk"))?;
    let fit = data.x().mat_vec(&cv.beta)?;
    let n = data.n() as f64;
    let emp_risk = fit
        .iter()
        .zip(&truth.f_star)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n;
    let pop_risk = match (data.gamma(), truth.beta_star.as_ref()) {
        (Some(gamma), Some(beta_star)) => Some(omp::population_risk(&cv.beta, beta_star, gamma)?),
        _ => None,
    };
    let support = cv.beta.iter().filter(|&&b| b != 0.0).count();
    let min_risk = diag.emp_risk.iter().cloned().fold(f64::INFINITY, f64::min);
    // The baseline is off-path, so this ratio may exceed one.
    let rel_efficiency = if emp_risk == 0.0 {
        1.0
    } else {
        (min_risk / emp_risk).sqrt()
    };
    Ok(MethodResult {
        method: "lasso-cv".to_string(),
        selected_m: support,
        capped: false,
        emp_risk,
        pop_risk,
        rel_efficiency,
        dev_from_oracle: support as i64 - m_classical as i64,
        sigma_hat_sq: None,
        noise_abs_err: None,
        lambda: Some(cv.lambda),
        seconds,
    })
}

/// Deterministic identity assertions, run per replication when
/// `debug_asserts` is set. Violations are reported as run failures.
fn assert_deterministic_identities(path: &OmpPath, diag: &PathDiagnostics) -> Result<()> {
    let scale = path.r_sq()[0].max(1.0);
    for m in 0..=path.len() {
        let lhs = path.r_sq()[m];
        let rhs = diag.b_sq[m] + 2.0 * diag.c[m] + diag.eps_norm_sq - diag.s[m];
        if (lhs - rhs).abs() > 1e-8 * scale {
            return Err(Error::Dataset(format!(
                "residual decomposition violated at m = {m}: {lhs} vs {rhs}"
            )));
        }
        let risk = diag.b_sq[m] + diag.s[m];
        if (diag.emp_risk[m] - risk).abs() > 1e-8 * diag.emp_risk[m].max(1.0) {
            return Err(Error::Dataset(format!(
                "risk decomposition violated at m = {m}"
            )));
        }
    }
    Ok(())
}

/// A failed replication (excluded from aggregation, never retried).
#[derive(Clone, Debug, Serialize)]
pub struct RunFailure {
    pub run_id: usize,
    pub message: String,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

/// Per-method aggregate over the completed runs.
#[derive(Clone, Debug, Serialize)]
pub struct MethodSummary {
    pub method: String,
    pub selected_m: Vec<usize>,
    pub emp_risk: Vec<f64>,
    pub pop_risk: Option<Vec<f64>>,
    pub rel_efficiency: Vec<f64>,
    pub dev_from_oracle: Vec<i64>,
    pub capped_runs: usize,
    pub selected_m_quartiles: Quartiles,
    pub emp_risk_quartiles: Quartiles,
    pub rel_efficiency_quartiles: Quartiles,
    pub dev_from_oracle_quartiles: Quartiles,
}

/// Monte Carlo aggregate: per-method arrays over runs plus quartiles.
/// Contains no wall-clock values, so its serialization is byte-stable for a
/// fixed `(master_seed, spec)`.
#[derive(Clone, Debug, Serialize)]
pub struct McSummary {
    pub runs_requested: usize,
    pub runs_completed: usize,
    pub failures: Vec<RunFailure>,
    pub oracle_classical: Vec<usize>,
    pub oracle_balanced: Vec<usize>,
    pub oracle_classical_quartiles: Quartiles,
    pub oracle_balanced_quartiles: Quartiles,
    pub methods: Vec<MethodSummary>,
}

/// Everything a Monte Carlo invocation produces.
#[derive(Debug)]
pub struct McOutput {
    pub results: Vec<RunResult>,
    pub artifacts: Vec<RunArtifacts>,
    pub summary: McSummary,
}

/// Linear-interpolation quantile of a sorted copy of `values`.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of empty slice");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

pub fn median(values: &[f64]) -> f64 {
    quantile(values, 0.5)
}

fn quartiles_of(values: &[f64]) -> Quartiles {
    Quartiles {
        q1: quantile(values, 0.25),
        median: quantile(values, 0.5),
        q3: quantile(values, 0.75),
    }
}

type RunOutcome = (usize, Result<(RunResult, Option<RunArtifacts>)>);

/// Run `runs` independent replications in parallel with per-run seeds derived
/// from `master_seed`. The aggregate is identical for any worker count.
pub fn monte_carlo(spec: &RunSpec, runs: usize, master_seed: u64) -> Result<McOutput> {
    if runs == 0 {
        return Err(Error::contract("need at least one Monte Carlo run"));
    }
    let outcomes: Vec<RunOutcome> = (0..runs)
        .into_par_iter()
        .map(|run_id| {
            let seed = derive_run_seed(master_seed, run_id as u64);
            (run_id, run_once(spec, run_id, seed))
        })
        .collect();

    let mut results = Vec::with_capacity(runs);
    let mut artifacts = Vec::new();
    let mut failures = Vec::new();
    for (run_id, outcome) in outcomes {
        match outcome {
            Ok((result, art)) => {
                results.push(result);
                if let Some(a) = art {
                    artifacts.push(a);
                }
            }
            Err(e) => failures.push(RunFailure {
                run_id,
                message: e.to_string(),
            }),
        }
    }
    if results.is_empty() {
        return Err(Error::AllRunsFailed(runs));
    }

    let summary = summarize(runs, &results, failures);
    Ok(McOutput {
        results,
        artifacts,
        summary,
    })
}

fn summarize(runs_requested: usize, results: &[RunResult], failures: Vec<RunFailure>) -> McSummary {
    let oracle_classical: Vec<usize> = results.iter().map(|r| r.oracle_classical).collect();
    let oracle_balanced: Vec<usize> = results.iter().map(|r| r.oracle_balanced).collect();
    let as_f64 = |v: &[usize]| v.iter().map(|&x| x as f64).collect::<Vec<_>>();

    let mut methods = Vec::new();
    if let Some(first) = results.first() {
        for (k, m) in first.methods.iter().enumerate() {
            let sel: Vec<usize> = results.iter().map(|r| r.methods[k].selected_m).collect();
            let emp: Vec<f64> = results.iter().map(|r| r.methods[k].emp_risk).collect();
            let pop: Option<Vec<f64>> = results
                .iter()
                .map(|r| r.methods[k].pop_risk)
                .collect::<Option<Vec<f64>>>();
            let eff: Vec<f64> = results
                .iter()
                .map(|r| r.methods[k].rel_efficiency)
                .collect();
            let dev: Vec<i64> = results
                .iter()
                .map(|r| r.methods[k].dev_from_oracle)
                .collect();
            let dev_f: Vec<f64> = dev.iter().map(|&d| d as f64).collect();
            methods.push(MethodSummary {
                method: m.method.clone(),
                selected_m_quartiles: quartiles_of(&as_f64(&sel)),
                emp_risk_quartiles: quartiles_of(&emp),
                rel_efficiency_quartiles: quartiles_of(&eff),
                dev_from_oracle_quartiles: quartiles_of(&dev_f),
                capped_runs: results.iter().filter(|r| r.methods[k].capped).count(),
                selected_m: sel,
                emp_risk: emp,
                pop_risk: pop,
                rel_efficiency: eff,
                dev_from_oracle: dev,
            });
        }
    }

    McSummary {
        runs_requested,
        runs_completed: results.len(),
        failures,
        oracle_classical_quartiles: quartiles_of(&as_f64(&oracle_classical)),
        oracle_balanced_quartiles: quartiles_of(&as_f64(&oracle_balanced)),
        oracle_classical,
        oracle_balanced,
        methods,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::gen::SignalKind;

    fn small_spec() -> RunSpec {
        RunSpec {
            signal: SignalSpec::new(SignalKind::G2),
            design: DesignSpec {
                kind: DesignKind::Uncorrelated,
                n: 40,
                p: 30,
            },
            noise: NoiseSpec::Gaussian { sigma_sq: 1.0 },
            rules: vec![
                Rule::TauTrueNoise { c_tau: 0.0 },
                Rule::OracleClassical,
                Rule::OracleBalanced,
                Rule::Hdaic {
                    c_hdaic: 2.0,
                    m_cap: None,
                },
            ],
            m_max: Some(15),
            debug_asserts: true,
            keep_diagnostics: true,
        }
    }

    #[test]
    fn run_once_is_deterministic_in_the_seed() {
        let spec = small_spec();
        let (a, _) = run_once(&spec, 0, 12345).unwrap();
        let (b, _) = run_once(&spec, 0, 12345).unwrap();
        assert_eq!(a.oracle_classical, b.oracle_classical);
        assert_eq!(a.eps_norm_sq, b.eps_norm_sq);
        for (ma, mb) in a.methods.iter().zip(&b.methods) {
            assert_eq!(ma.selected_m, mb.selected_m);
            assert_eq!(ma.emp_risk.to_bits(), mb.emp_risk.to_bits());
            assert_eq!(ma.rel_efficiency.to_bits(), mb.rel_efficiency.to_bits());
        }
    }

    #[test]
    fn oracle_selection_has_unit_efficiency() {
        let (r, _) = run_once(&small_spec(), 0, 99).unwrap();
        let oracle = r
            .methods
            .iter()
            .find(|m| m.method == "oracle-classical")
            .unwrap();
        assert!((oracle.rel_efficiency - 1.0).abs() < 1e-12);
        assert_eq!(oracle.dev_from_oracle, 0);
        let true_noise = r
            .methods
            .iter()
            .find(|m| m.method == "tau-true-noise")
            .unwrap();
        assert_eq!(true_noise.noise_abs_err, Some(0.0));
    }

    #[test]
    fn monte_carlo_summary_is_worker_independent() {
        let spec = small_spec();
        let pool1 = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let pool2 = rayon::ThreadPoolBuilder::new()
            .num_threads(2)
            .build()
            .unwrap();
        let a = pool1.install(|| monte_carlo(&spec, 6, 7).unwrap());
        let b = pool2.install(|| monte_carlo(&spec, 6, 7).unwrap());
        let ja = serde_json::to_string(&a.summary).unwrap();
        let jb = serde_json::to_string(&b.summary).unwrap();
        assert_eq!(ja, jb);
    }

    #[test]
    fn single_run_summary_mirrors_the_run() {
        let spec = small_spec();
        let out = monte_carlo(&spec, 1, 3).unwrap();
        assert_eq!(out.summary.runs_completed, 1);
        let run = &out.results[0];
        for ms in &out.summary.methods {
            let mr = run.methods.iter().find(|m| m.method == ms.method).unwrap();
            assert_eq!(ms.selected_m, vec![mr.selected_m]);
            assert_eq!(ms.selected_m_quartiles.median, mr.selected_m as f64);
        }
    }

    #[test]
    fn tau_rerun_matches_scan_on_shared_path() {
        // The sequential rerun used for timing must stop at exactly the
        // iteration the scan of the shared path reports.
        let spec = small_spec();
        let seed = derive_run_seed(21, 0);
        let (result, art) = run_once(&spec, 0, seed).unwrap();
        let art = art.unwrap();
        let tn = result
            .methods
            .iter()
            .find(|m| m.method == "tau-true-noise")
            .unwrap();
        let cfg = StoppingConfig {
            sigma_hat_sq: result.eps_norm_sq,
            c_tau: 0.0,
            c_aic: 2.0,
            c_hdaic: 2.0,
            m_max: 15,
            n: 40,
            p: 30,
        };
        let scan = stopping::tau(&art.r_sq, &cfg);
        assert_eq!(tn.selected_m, scan.m);
        assert_eq!(tn.capped, scan.capped);
    }

    #[test]
    fn relative_efficiency_is_the_risk_norm_ratio() {
        let diag = crate::omp::PathDiagnostics {
            b_sq: vec![4.0, 1.0],
            s: vec![0.0, 0.0],
            c: vec![0.0, 0.0],
            emp_risk: vec![4.0, 1.0],
            eps_norm_sq: 0.0,
            delta_r_sq: vec![0.0, 3.0],
            delta_s: vec![0.0, 0.0],
        };
        // Selecting the minimizer gives 1; double the oracle norm gives 1/2.
        assert_eq!(relative_efficiency(&diag, 1), 1.0);
        assert_eq!(relative_efficiency(&diag, 0), 0.5);
    }

    #[test]
    fn quantiles_interpolate_linearly() {
        let v = vec![1.0, 2.0, 3.0, 4.0];
        assert_eq!(median(&v), 2.5);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert_eq!(quantile(&v, 0.25), 1.75);
    }

    #[test]
    fn derived_seeds_differ_across_runs_and_masters() {
        let a = derive_run_seed(1, 0);
        let b = derive_run_seed(1, 1);
        let c = derive_run_seed(2, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_run_seed(1, 0));
    }
}
