use thiserror::Error;

use crate::npmle::EmReport;

/// Errors produced anywhere in the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A data row could not be turned into an observation. `row` is 1-based
    /// and counts every line of the input, including headers.
    #[error("row {row}: {msg}")]
    Parse { row: usize, msg: String },

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sample is empty")]
    EmptySample,

    #[error(
        "EM did not converge after {} iterations (last sup-norm change {:.3e})",
        .0.iterations,
        .0.final_sup_change
    )]
    NotConverged(EmReport),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("degenerate: {0}")]
    Degenerate(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
