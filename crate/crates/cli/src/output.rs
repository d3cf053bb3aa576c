//! Result emission: the per-run CSV and the summary JSON.
//!
//! Numeric CSV fields use 17 significant digits so every value round-trips
//! exactly. The summary JSON carries no wall-clock values and is therefore
//! byte-identical across reruns of the same seeded experiment; the `seconds`
//! column of the CSV is measured and exempt from that guarantee.

use std::fmt::Write as _;

use ompboost::simulate::{McSummary, RunResult};

pub const RUNS_CSV_HEADER: &str = "run_id,method,selected_m,emp_risk,pop_risk,rel_efficiency,\
dev_from_oracle,sigma_hat_sq,noise_abs_err,seconds";

/// Full-precision decimal formatting (17 significant digits).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn runs_csv(results: &[RunResult]) -> String {
    let mut out = String::new();
    out.push_str(RUNS_CSV_HEADER);
    out.push('\n');
    for run in results {
        for m in &run.methods {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                run.run_id,
                m.method,
                m.selected_m,
                fmt_f64(m.emp_risk),
                fmt_opt(m.pop_risk),
                fmt_f64(m.rel_efficiency),
                m.dev_from_oracle,
                fmt_opt(m.sigma_hat_sq),
                fmt_opt(m.noise_abs_err),
                fmt_f64(m.seconds),
            )
            .expect("write to string");
        }
    }
    out
}

pub fn summary_json(summary: &McSummary) -> String {
    let mut s = serde_json::to_string_pretty(summary).expect("summary serializes");
    s.push('\n');
    s
}

/// Human-oriented table printed after a simulation: per-method median
/// selected iteration, median relative efficiency, and total measured cost.
pub fn summary_table(summary: &McSummary, results: &[RunResult]) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:<22} {:>10} {:>12} {:>12}",
        "method", "median_m", "median_eff", "seconds"
    )
    .unwrap();
    for ms in &summary.methods {
        let secs: f64 = results
            .iter()
            .flat_map(|r| r.methods.iter())
            .filter(|m| m.method == ms.method)
            .map(|m| m.seconds)
            .sum();
        writeln!(
            out,
            "{:<22} {:>10.1} {:>12.3} {:>12.2}",
            ms.method, ms.selected_m_quartiles.median, ms.rel_efficiency_quartiles.median, secs
        )
        .unwrap();
    }
    writeln!(
        out,
        "oracles: classical median {:.1}, balanced median {:.1}; {} of {} runs completed",
        summary.oracle_classical_quartiles.median,
        summary.oracle_balanced_quartiles.median,
        summary.runs_completed,
        summary.runs_requested
    )
    .unwrap();
    out
}
