//! The Monte Carlo benchmark harness: synthetic signals, designs, and noise
//! models; a per-replication pipeline evaluating every selection rule on one
//! shared path; and deterministic parallel aggregation.

mod config;
mod gen;
mod harness;

pub use config::{
    DesignConfig, ExperimentConfig, NoiseConfig, RuleConfig, RuleParams, SignalConfig,
    VALID_RULE_NAMES,
};
pub use gen::{
    build_signal, sample_design, sample_response, BandedCholesky, DesignKind, DesignSpec,
    NoiseSpec, Response, SignalKind, SignalSpec,
};
pub use harness::{
    build_run_dataset, derive_run_seed, median, monte_carlo, quantile, relative_efficiency,
    run_once, McOutput, McSummary, MethodResult, MethodSummary, Quartiles, Rule, RunArtifacts,
    RunFailure, RunResult, RunSpec,
};
