//! Executable verification of the deterministic identities and, at declared
//! finite-sample allowances, the high-probability bounds behind the stopping
//! theory. Deterministic checks must pass on every run; the probabilistic
//! suites tolerate a small violation fraction (5% for the path bounds, 10%
//! for noise estimation), with calibration constants documented on the
//! report itself.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lasso;
use crate::linalg::norm_sq;
use crate::omp::{self, OmpPath, PathDiagnostics};
use crate::simulate::{
    build_run_dataset, derive_run_seed, DesignKind, ExperimentConfig, Rule, RunSpec,
};
use crate::stopping::{self, rate_target, Sparsity, StoppingConfig};

/// Iterations beyond this are not probed by the statistical suites.
pub const CHECK_M_LIMIT: usize = 50;
/// Allowed violation fraction for the path-bound suites.
pub const PATH_BOUND_ALLOWANCE: f64 = 0.05;
/// Allowed violation fraction for the noise-estimation suite.
pub const NOISE_ALLOWANCE: f64 = 0.10;
/// Calibrated constant in the stochastic-error bound.
pub const DEFAULT_STOCH_C: f64 = 8.0;
/// Band multiplier for the noise-estimation suite.
pub const NOISE_BAND_MULTIPLIER: f64 = 10.0;

const DECOMPOSITION_TOL: f64 = 1e-8;
const ORACLE_SLACK: f64 = 1e-10;
const NORM_COMPARISON_SLACK: f64 = 1e-10;
/// Absolute dust tolerance so exactly-zero quantities do not register as
/// violations through rounding.
const ABS_DUST: f64 = 1e-12;

/// Outcome of one check over one or many runs.
#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub name: String,
    /// Deterministic checks must hold on 100% of instances.
    pub deterministic: bool,
    pub instances: usize,
    pub violations: usize,
    pub max_abs_violation: f64,
    pub max_rel_violation: f64,
    pub violation_fraction: f64,
    /// Violation fraction tolerated (0 for deterministic checks).
    pub allowed_fraction: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckReport {
    fn new(name: &str, deterministic: bool, allowed_fraction: f64, tolerance: f64) -> Self {
        CheckReport {
            name: name.to_string(),
            deterministic,
            instances: 0,
            violations: 0,
            max_abs_violation: 0.0,
            max_rel_violation: 0.0,
            violation_fraction: 0.0,
            allowed_fraction,
            tolerance,
            pass: true,
        }
    }

    fn record(&mut self, abs_violation: f64, rel_violation: f64, violated: bool) {
        self.instances += 1;
        if violated {
            self.violations += 1;
        }
        self.max_abs_violation = self.max_abs_violation.max(abs_violation);
        self.max_rel_violation = self.max_rel_violation.max(rel_violation);
        self.refresh();
    }

    fn refresh(&mut self) {
        self.violation_fraction = if self.instances == 0 {
            0.0
        } else {
            self.violations as f64 / self.instances as f64
        };
        self.pass = if self.deterministic {
            self.violations == 0
        } else {
            self.violation_fraction <= self.allowed_fraction
        };
    }

    /// Fold another report of the same check into this one.
    pub fn merge(&mut self, other: &CheckReport) {
        assert_eq!(self.name, other.name, "merging different checks");
        self.instances += other.instances;
        self.violations += other.violations;
        self.max_abs_violation = self.max_abs_violation.max(other.max_abs_violation);
        self.max_rel_violation = self.max_rel_violation.max(other.max_rel_violation);
        self.refresh();
    }
}

/// Merge per-run reports grouped by name, preserving first-seen order.
pub fn merge_reports(reports: impl IntoIterator<Item = CheckReport>) -> Vec<CheckReport> {
    let mut out: Vec<CheckReport> = Vec::new();
    for r in reports {
        match out.iter_mut().find(|o| o.name == r.name) {
            Some(existing) => existing.merge(&r),
            None => out.push(r),
        }
    }
    out
}

/// `r_m^2 = b_m^2 + 2 c_m + ||eps||_n^2 - s_m` for every `m`, relative to
/// `max(1, ||Y||_n^2)`.
pub fn check_residual_decomposition(path: &OmpPath, diag: &PathDiagnostics) -> CheckReport {
    residual_decomposition_report(path.r_sq(), diag)
}

fn residual_decomposition_report(r_sq: &[f64], diag: &PathDiagnostics) -> CheckReport {
    let mut report = CheckReport::new("residual-decomposition", true, 0.0, DECOMPOSITION_TOL);
    let scale = r_sq[0].max(1.0);
    for (m, &r) in r_sq.iter().enumerate().take(diag.b_sq.len()) {
        let rhs = diag.b_sq[m] + 2.0 * diag.c[m] + diag.eps_norm_sq - diag.s[m];
        let abs = (r - rhs).abs();
        let rel = abs / scale;
        report.record(abs, rel, rel > DECOMPOSITION_TOL);
    }
    report
}

/// `emp_risk[m^b] <= 2 min_m emp_risk[m] + Delta(s_{m^b})` with `1e-10`
/// slack; deterministic on every run.
pub fn check_balanced_oracle(diag: &PathDiagnostics) -> CheckReport {
    let mut report = CheckReport::new("balanced-oracle", true, 0.0, ORACLE_SLACK);
    let m_b = stopping::balanced_oracle(diag).m;
    let min_risk = diag.emp_risk.iter().cloned().fold(f64::INFINITY, f64::min);
    let lhs = diag.emp_risk[m_b];
    let rhs = 2.0 * min_risk + diag.delta_s[m_b];
    let abs = (lhs - rhs).max(0.0);
    let scale = lhs.max(1.0);
    report.record(abs, abs / scale, abs > ORACLE_SLACK * scale);
    report
}

/// The deterministic norm comparison between the stopped fit and the fit at
/// a probe index `m`:
///
/// `||F_tau - F_m||_n^2 <= emp_risk[m] + 2 |c_m|
///   + (kappa_tau - ||eps||_n^2)              if tau < m
///   + (||eps||_n^2 + drop(r_tau^2) - kappa_{tau-1})  if tau > m`
///
/// With `m_probe = None` every index on the path is probed; an explicit
/// probe must not exceed the path length.
pub fn check_norm_comparison(
    path: &OmpPath,
    diag: &PathDiagnostics,
    cfg: &StoppingConfig,
    m_probe: Option<usize>,
) -> CheckReport {
    let mut report = CheckReport::new("norm-comparison", true, 0.0, NORM_COMPARISON_SLACK);
    let tau = stopping::tau(path.r_sq(), cfg).m;
    let n = path.n() as f64;
    let fitted_tau = path.fitted(tau);
    let scale = path.r_sq()[0].max(1.0);

    let probes: Vec<usize> = match m_probe {
        Some(m) => vec![m],
        None => (0..=path.len()).collect(),
    };
    for m in probes {
        let fitted_m = path.fitted(m);
        let diff: Vec<f64> = fitted_tau
            .iter()
            .zip(&fitted_m)
            .map(|(a, b)| a - b)
            .collect();
        let lhs = norm_sq(&diff) / n;
        let mut rhs = diag.emp_risk[m] + 2.0 * diag.c[m].abs();
        if tau < m {
            rhs += stopping::threshold(tau, cfg) - diag.eps_norm_sq;
        } else if tau > m {
            rhs += diag.eps_norm_sq + diag.delta_r_sq[tau] - stopping::threshold(tau - 1, cfg);
        }
        let abs = (lhs - rhs).max(0.0);
        let rel = abs / scale;
        report.record(abs, rel, rel > NORM_COMPARISON_SLACK);
    }
    report
}

/// High-probability cross-term bound
/// `|c_m| <= b_m sqrt(4 sigma_bar^2 (m+1) log(p) / n)` pooled over runs and
/// `m <= 50`, plus the companion residual-drop bound
/// `drop(r_m^2) <= 2 b_{m-1}^2 + 8 sigma_bar^2 m log(p) / n` as a secondary
/// series. Pass when at most 5% of (run, m) pairs violate.
pub fn check_cross_term_bound(
    diags: &[&PathDiagnostics],
    sigma_bar_sq: f64,
    n: usize,
    p: usize,
) -> Vec<CheckReport> {
    let unit = (p as f64).ln() / n as f64;
    let mut cross = CheckReport::new("cross-term-bound", false, PATH_BOUND_ALLOWANCE, 0.0);
    let mut drop = CheckReport::new("residual-drop-bound", false, PATH_BOUND_ALLOWANCE, 0.0);
    for diag in diags {
        let len = diag.len().min(CHECK_M_LIMIT);
        for m in 0..=len {
            let bound = diag.b_sq[m].sqrt() * (4.0 * sigma_bar_sq * (m as f64 + 1.0) * unit).sqrt();
            let excess = diag.c[m].abs() - bound - ABS_DUST;
            cross.record(excess.max(0.0), excess.max(0.0), excess > 0.0);
        }
        for m in 1..=len {
            let bound = 2.0 * diag.b_sq[m - 1] + 8.0 * sigma_bar_sq * m as f64 * unit;
            let excess = diag.delta_r_sq[m] - bound - ABS_DUST;
            drop.record(excess.max(0.0), excess.max(0.0), excess > 0.0);
        }
    }
    vec![cross, drop]
}

/// High-probability stochastic-error bound
/// `s_m <= C sigma_bar^2 m log(p) / n` pooled over runs and `m <= 50`;
/// pass when at most 5% of pairs violate.
pub fn check_stochastic_error_bound(
    diags: &[&PathDiagnostics],
    sigma_bar_sq: f64,
    c: f64,
    n: usize,
    p: usize,
) -> CheckReport {
    let unit = (p as f64).ln() / n as f64;
    let mut report = CheckReport::new("stochastic-error-bound", false, PATH_BOUND_ALLOWANCE, 0.0);
    for diag in diags {
        let len = diag.len().min(CHECK_M_LIMIT);
        for m in 0..=len {
            let bound = c * sigma_bar_sq * m as f64 * unit;
            let excess = diag.s[m] - bound - ABS_DUST;
            report.record(excess.max(0.0), excess.max(0.0), excess > 0.0);
        }
    }
    report
}

/// Noise-estimation accuracy: fraction of runs with
/// `|sigma_hat^2 - ||eps||_n^2| > 10 * R(s, gamma)`; pass when at most 10%
/// of runs violate.
pub fn check_noise_estimation(
    abs_errors: &[f64],
    sparsity: Sparsity,
    n: usize,
    p: usize,
    sigma_bar_sq: f64,
    rho_sq: f64,
) -> Result<CheckReport> {
    let band = NOISE_BAND_MULTIPLIER * rate_target(sparsity, n, p, sigma_bar_sq, rho_sq)?;
    let mut report = CheckReport::new("noise-estimation", false, NOISE_ALLOWANCE, band);
    for &err in abs_errors {
        let excess = err - band;
        report.record(excess.max(0.0), excess.max(0.0), excess > 0.0);
    }
    Ok(report)
}

impl DesignKind {
    /// Upper bound on the squared subgaussian design parameter (the largest
    /// covariance eigenvalue; Gershgorin bound for the banded case).
    pub fn rho_sq_bound(&self) -> f64 {
        match self {
            DesignKind::Uncorrelated => 1.0,
            DesignKind::Banded { a, b } => 1.0 + 2.0 * (a.abs() + b.abs()),
        }
    }
}

/// Outcome of the full suite over a seeded batch of replications.
#[derive(Debug, Serialize)]
pub struct CheckSuite {
    pub reports: Vec<CheckReport>,
    pub deterministic_pass: bool,
    pub probabilistic_pass: bool,
}

/// Configuration knobs the suite reads from the experiment's rules: the
/// kappa rule in force for the norm comparison and the noise-estimation
/// penalty factor, when an estimating rule is present.
fn kappa_rule_of(spec: &RunSpec) -> (f64, Option<f64>) {
    let mut c_tau = 0.0;
    let mut est_factor = None;
    for rule in &spec.rules {
        match rule {
            Rule::TauTrueNoise { c_tau: c } => {
                c_tau = *c;
                break;
            }
            Rule::TauEstimatedNoise {
                c_tau: c,
                lambda0_factor,
            } => {
                c_tau = *c;
                est_factor = Some(*lambda0_factor);
                break;
            }
            _ => {}
        }
    }
    if est_factor.is_none() {
        for rule in &spec.rules {
            if let Rule::TauEstimatedNoise { lambda0_factor, .. }
            | Rule::TwoStep { lambda0_factor, .. } = rule
            {
                est_factor = Some(*lambda0_factor);
                break;
            }
        }
    }
    (c_tau, est_factor)
}

/// Run the whole check suite over `config.runs` seeded replications:
/// deterministic identities on every run, pooled high-probability bounds,
/// and (when an estimating rule is configured) the noise-estimation band.
/// `corrupt_r_sq` is a test hook that perturbs the residual sequence to
/// exercise failure reporting.
pub fn run_check_suite(config: &ExperimentConfig, corrupt_r_sq: bool) -> Result<CheckSuite> {
    let spec = config.to_run_spec()?;
    let (c_tau, est_factor) = kappa_rule_of(&spec);
    let sigma_bar_sq = spec.noise.sigma_bar_sq();
    let rho_sq = spec.design.kind.rho_sq_bound();

    struct PerRun {
        reports: Vec<CheckReport>,
        diag: PathDiagnostics,
        noise_abs_err: Option<f64>,
    }

    let runs: Vec<Result<PerRun>> = (0..config.runs)
        .into_par_iter()
        .map(|run_id| {
            let seed = derive_run_seed(config.seed, run_id as u64);
            let data = build_run_dataset(&spec, seed)?;
            let m_max = spec.effective_m_max(data.n(), data.p());
            let path = omp::run_path(&data, m_max)?;
            let diag = omp::diagnostics(&path, &data)?;

            let mut r_sq = path.r_sq().to_vec();
            if corrupt_r_sq && r_sq.len() > 1 {
                r_sq[1] += 1.0 + r_sq[0];
            }

            let (sigma_hat_sq, noise_abs_err) = match est_factor {
                Some(factor) => {
                    let lambda0 = lasso::default_lambda0(data.n(), data.p(), factor)?;
                    let est = lasso::scaled_lasso(&data, lambda0)?;
                    (
                        est.sigma_hat_sq,
                        Some((est.sigma_hat_sq - diag.eps_norm_sq).abs()),
                    )
                }
                None => (diag.eps_norm_sq, None),
            };
            let cfg = StoppingConfig {
                sigma_hat_sq,
                c_tau,
                c_aic: 2.0,
                c_hdaic: 2.0,
                m_max,
                n: data.n(),
                p: data.p(),
            };

            let reports = vec![
                residual_decomposition_report(&r_sq, &diag),
                check_balanced_oracle(&diag),
                check_norm_comparison(&path, &diag, &cfg, None),
            ];
            Ok(PerRun {
                reports,
                diag,
                noise_abs_err,
            })
        })
        .collect();

    let mut per_run = Vec::with_capacity(config.runs);
    for r in runs {
        per_run.push(r?);
    }

    let mut merged = merge_reports(per_run.iter().flat_map(|r| r.reports.clone()));
    let diags: Vec<&PathDiagnostics> = per_run.iter().map(|r| &r.diag).collect();
    merged.extend(check_cross_term_bound(
        &diags,
        sigma_bar_sq,
        config.n,
        config.p,
    ));
    merged.push(check_stochastic_error_bound(
        &diags,
        sigma_bar_sq,
        DEFAULT_STOCH_C,
        config.n,
        config.p,
    ));
    if est_factor.is_some() {
        let errors: Vec<f64> = per_run.iter().filter_map(|r| r.noise_abs_err).collect();
        merged.push(check_noise_estimation(
            &errors,
            spec.signal.kind.sparsity(),
            config.n,
            config.p,
            sigma_bar_sq,
            rho_sq,
        )?);
    }

    let deterministic_pass = merged.iter().filter(|r| r.deterministic).all(|r| r.pass);
    let probabilistic_pass = merged.iter().filter(|r| !r.deterministic).all(|r| r.pass);
    Ok(CheckSuite {
        reports: merged,
        deterministic_pass,
        probabilistic_pass,
    })
}

/// Convenience for callers holding artifacts: noise errors from the
/// artifacts' estimate table at a given penalty factor.
pub fn noise_errors_at_factor(
    artifacts: &[crate::simulate::RunArtifacts],
    factor: f64,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(artifacts.len());
    for a in artifacts {
        let est = a
            .noise_estimates
            .iter()
            .find(|(f, _)| (*f - factor).abs() < 1e-12)
            .ok_or_else(|| {
                Error::contract(format!("no noise estimate stored at factor {factor}"))
            })?;
        out.push((est.1 - a.diag.eps_norm_sq).abs());
    }
    Ok(out)
}
