//! Shared setup for the benchmark targets.

use ompboost::simulate::{
    build_run_dataset, DesignKind, DesignSpec, NoiseSpec, Rule, RunSpec, SignalKind, SignalSpec,
};
use ompboost::Dataset;

/// One replication-sized dataset of the uncorrelated regression benchmark.
pub fn benchmark_dataset(n: usize, p: usize, seed: u64) -> Dataset {
    let spec = RunSpec {
        signal: SignalSpec::new(SignalKind::G2),
        design: DesignSpec {
            kind: DesignKind::Uncorrelated,
            n,
            p,
        },
        noise: NoiseSpec::Gaussian { sigma_sq: 1.0 },
        rules: vec![Rule::TauTrueNoise { c_tau: 0.0 }],
        m_max: None,
        debug_asserts: false,
        keep_diagnostics: false,
    };
    build_run_dataset(&spec, seed).expect("benchmark dataset")
}
