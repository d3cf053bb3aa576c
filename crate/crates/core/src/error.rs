use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-side precondition was violated (dimension mismatch, bad
    /// parameter range, malformed input).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Greedy selection found no eligible column.
    #[error("no selectable column: {0}")]
    NoCandidate(String),

    /// The selected column is empirically in the span of the columns chosen
    /// before it; the path cannot be extended.
    #[error("column {index} is numerically in the span of the selected set (step {step})")]
    DegenerateColumn { index: usize, step: usize },

    /// The operation needs `f_star_values` and `epsilon`, which the dataset
    /// does not carry.
    #[error("{0} requires ground truth (f_star_values and epsilon)")]
    MissingTruth(&'static str),

    /// A design specification cannot produce a valid covariance.
    #[error("invalid design: {0}")]
    InvalidDesign(String),

    /// Every Monte Carlo replication failed; there is nothing to aggregate.
    #[error("all {0} Monte Carlo runs failed")]
    AllRunsFailed(usize),

    #[error("dataset: {0}")]
    Dataset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
