//! Iteration-selection rules over a computed path: the sequential stopping
//! time `tau`, classical and balanced oracles, AIC and HDAIC minimization,
//! the two-step rule, and the rate targets used to scale statistical checks.
//!
//! All rules are pure functions over the `r_m^2` sequence or the path
//! diagnostics; evaluating several of them on one path shares all the work.

use crate::error::{Error, Result};
use crate::omp::PathDiagnostics;

/// Parameters shared by the selection rules. `sigma_hat_sq` estimates the
/// empirical noise level `||eps||_n^2`.
#[derive(Clone, Copy, Debug)]
pub struct StoppingConfig {
    pub sigma_hat_sq: f64,
    pub c_tau: f64,
    pub c_aic: f64,
    pub c_hdaic: f64,
    pub m_max: usize,
    pub n: usize,
    pub p: usize,
}

impl StoppingConfig {
    /// `C_tau = 0` and the regression-study constants `C_AIC = C_HDAIC = 2`.
    pub fn with_true_noise(eps_norm_sq: f64, n: usize, p: usize, m_max: usize) -> Self {
        StoppingConfig {
            sigma_hat_sq: eps_norm_sq,
            c_tau: 0.0,
            c_aic: 2.0,
            c_hdaic: 2.0,
            m_max,
            n,
            p,
        }
    }

    #[inline]
    pub fn log_p(&self) -> f64 {
        (self.p as f64).ln()
    }

    /// Penalty slope `log(p) / n` shared by every criterion here.
    #[inline]
    fn penalty_unit(&self) -> f64 {
        self.log_p() / self.n as f64
    }
}

/// A selected iteration together with a flag marking that the defining
/// condition never triggered and the value was capped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Selected {
    pub m: usize,
    pub capped: bool,
}

/// `kappa_m = sigma_hat^2 + C_tau * m * log(p) / n`.
pub fn threshold(m: usize, cfg: &StoppingConfig) -> f64 {
    cfg.sigma_hat_sq + cfg.c_tau * m as f64 * cfg.penalty_unit()
}

/// Sequential early stopping: the first `m` with `r_m^2 <= kappa_m`, scanned
/// over `m <= min(m_max, path length)`. If the residual never crosses the
/// threshold, the scan end is returned with `capped` set.
pub fn tau(r_sq: &[f64], cfg: &StoppingConfig) -> Selected {
    let end = cfg.m_max.min(r_sq.len().saturating_sub(1));
    for (m, &r) in r_sq.iter().enumerate().take(end + 1) {
        if r <= threshold(m, cfg) {
            return Selected { m, capped: false };
        }
    }
    Selected {
        m: end,
        capped: true,
    }
}

/// Classical oracle: argmin of the empirical risk, smallest index on ties.
pub fn classical_oracle(diag: &PathDiagnostics) -> usize {
    argmin(&diag.emp_risk)
}

/// Balanced oracle: first `m` with `b_m^2 <= s_m`, capped at the path length.
pub fn balanced_oracle(diag: &PathDiagnostics) -> Selected {
    for m in 0..diag.b_sq.len() {
        if diag.b_sq[m] <= diag.s[m] {
            return Selected { m, capped: false };
        }
    }
    Selected {
        m: diag.b_sq.len() - 1,
        capped: true,
    }
}

/// `AIC(m) = r_m^2 + C_AIC * m * log(p) / n`.
pub fn aic(r_sq: &[f64], m: usize, cfg: &StoppingConfig) -> f64 {
    r_sq[m] + cfg.c_aic * m as f64 * cfg.penalty_unit()
}

/// Two-step rule: AIC minimizer restricted to `m <= tau`, smallest on ties.
/// Always `<= tau`.
pub fn two_step(r_sq: &[f64], cfg: &StoppingConfig) -> Selected {
    let t = tau(r_sq, cfg);
    let mut best_m = 0;
    let mut best = aic(r_sq, 0, cfg);
    for m in 1..=t.m {
        let v = aic(r_sq, m, cfg);
        if v < best {
            best = v;
            best_m = m;
        }
    }
    Selected {
        m: best_m,
        capped: t.capped,
    }
}

/// `HDAIC(m) = r_m^2 * (1 + C_HDAIC * m * log(p) / n)`, minimized over
/// `0 <= m <= m_cap`; the cap guards against the criterion's collapse at
/// `r_m^2 -> 0` on long paths.
pub fn hdaic(r_sq: &[f64], cfg: &StoppingConfig, m_cap: usize) -> usize {
    let end = m_cap.min(r_sq.len() - 1);
    let mut best_m = 0;
    let mut best = r_sq[0];
    for (m, &r) in r_sq.iter().enumerate().take(end + 1).skip(1) {
        let v = r * (1.0 + cfg.c_hdaic * m as f64 * cfg.penalty_unit());
        if v < best {
            best = v;
            best_m = m;
        }
    }
    best_m
}

/// Default HDAIC evaluation cap, `floor(sqrt(n / log p))`.
pub fn default_hdaic_cap(n: usize, p: usize) -> usize {
    (n as f64 / (p as f64).ln()).sqrt().floor() as usize
}

/// Declared sparsity class of the target coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Sparsity {
    /// At most `s` nonzero coefficients.
    SSparse(usize),
    /// Polynomial-decay class with exponent `gamma >= 1`.
    GammaSparse(f64),
}

/// Both oracle iterations with their risks, plus the rate-optimal index
/// when a sparsity class is declared.
#[derive(Clone, Debug)]
pub struct OracleReport {
    pub m_classical: usize,
    pub m_balanced: usize,
    pub balanced_capped: bool,
    pub risk_at_classical: f64,
    pub risk_at_balanced: f64,
    pub m_star: Option<usize>,
}

/// Index at which the bias and stochastic-error bounds balance: the support
/// size in the `s`-sparse class (support-recovery constant taken as 1) and
/// `(n / ((sigma_bar^2 + rho^4) log p))^(1/(2 gamma))` in the decay class.
pub fn rate_optimal_index(
    sparsity: Sparsity,
    n: usize,
    p: usize,
    sigma_bar_sq: f64,
    rho_sq: f64,
) -> Result<usize> {
    match sparsity {
        Sparsity::SSparse(s) => Ok(s),
        Sparsity::GammaSparse(gamma) => {
            if gamma < 1.0 {
                return Err(Error::contract(format!(
                    "gamma-sparse class requires gamma >= 1, got {gamma}"
                )));
            }
            let base = n as f64 / ((sigma_bar_sq + rho_sq * rho_sq) * (p as f64).ln());
            Ok(base.powf(1.0 / (2.0 * gamma)).floor() as usize)
        }
    }
}

/// Evaluate both oracles on one diagnostic set; `m_star` is filled when the
/// sparsity class is declared.
pub fn oracle_report(
    diag: &PathDiagnostics,
    sparsity: Option<Sparsity>,
    n: usize,
    p: usize,
    sigma_bar_sq: f64,
    rho_sq: f64,
) -> Result<OracleReport> {
    let m_classical = classical_oracle(diag);
    let balanced = balanced_oracle(diag);
    let m_star = match sparsity {
        Some(class) => Some(rate_optimal_index(class, n, p, sigma_bar_sq, rho_sq)?),
        None => None,
    };
    let report = OracleReport {
        m_classical,
        m_balanced: balanced.m,
        balanced_capped: balanced.capped,
        risk_at_classical: diag.emp_risk[m_classical],
        risk_at_balanced: diag.emp_risk[balanced.m],
        m_star,
    };
    // The classical oracle minimizes the risk, so it can never sit above the
    // balanced one.
    debug_assert!(report.risk_at_classical <= report.risk_at_balanced + 1e-12);
    Ok(report)
}

/// Rate target `R(s, gamma)` used to scale statistical acceptance bands:
/// `sigma_bar^2 * s * log(p) / n` in the `s`-sparse class and
/// `((sigma_bar^2 + rho^4) * log(p) / n)^(1 - 1/(2 gamma))` in the
/// `gamma`-sparse class (`rho_sq` is the squared subgaussian design
/// parameter, so `rho^4 = rho_sq^2`).
pub fn rate_target(
    sparsity: Sparsity,
    n: usize,
    p: usize,
    sigma_bar_sq: f64,
    rho_sq: f64,
) -> Result<f64> {
    let unit = (p as f64).ln() / n as f64;
    match sparsity {
        Sparsity::SSparse(s) => Ok(sigma_bar_sq * s as f64 * unit),
        Sparsity::GammaSparse(gamma) => {
            if gamma < 1.0 {
                return Err(Error::contract(format!(
                    "gamma-sparse class requires gamma >= 1, got {gamma}"
                )));
            }
            let base = (sigma_bar_sq + rho_sq * rho_sq) * unit;
            Ok(base.powf(1.0 - 1.0 / (2.0 * gamma)))
        }
    }
}

fn argmin(values: &[f64]) -> usize {
    let mut best_m = 0;
    let mut best = values[0];
    for (m, &v) in values.iter().enumerate().skip(1) {
        if v < best {
            best = v;
            best_m = m;
        }
    }
    best_m
}
