//! Greedy `L^2`-boosting for high-dimensional linear models with sequential
//! early stopping.
//!
//! The crate implements orthogonal matching pursuit over the empirical inner
//! product together with the machinery needed to stop it well:
//!
//! * [`omp`] — the incremental greedy path, its residual norms, least-squares
//!   coefficients, and the bias/variance/cross-term diagnostics available
//!   when ground truth is known;
//! * [`stopping`] — the residual-threshold stopping time, classical and
//!   balanced oracles, AIC/HDAIC criteria, and the two-step rule;
//! * [`lasso`] — coordinate-descent Lasso, the Scaled Lasso estimator of the
//!   empirical noise level, and a cross-validated Lasso baseline;
//! * [`simulate`] — a deterministic, parallel Monte Carlo harness over the
//!   benchmark signals, Gaussian designs, and both noise models;
//! * [`checks`] — executable verification of the deterministic identities
//!   and high-probability bounds that justify the stopping rules.

pub mod checks;
pub mod dataset;
pub mod error;
pub mod lasso;
pub mod linalg;
pub mod omp;
pub mod simulate;
pub mod stopping;

pub use dataset::{Dataset, PopCovariance, Truth};
pub use error::{Error, Result};
pub use linalg::Mat;
pub use omp::{
    coefficients_at, diagnostics, empirical_inner, empirical_norm, population_risk, run_path,
    run_path_until, select_next, OmpPath, PathDiagnostics,
};
pub use stopping::{OracleReport, Selected, Sparsity, StoppingConfig};
