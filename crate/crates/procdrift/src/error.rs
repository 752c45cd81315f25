//! Crate error type.

use thiserror::Error;

/// Everything that can go wrong across parsing, detection, and generation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("missing required column `{0}`")]
    MissingColumn(String),

    #[error("row {row}: cannot parse timestamp `{value}` in column `{column}`")]
    BadTimestamp {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row}: column `{column}` is empty")]
    EmptyField { row: usize, column: String },

    #[error("event log contains no events")]
    EmptyLog,

    #[error("malformed XES: {0}")]
    Xes(String),

    #[error("event is missing the `{0}` attribute")]
    MissingEventAttribute(&'static str),

    #[error("conformance window contains no traces")]
    EmptyWindow,

    #[error("cannot discover a model from an empty trace sequence")]
    EmptyDiscovery,

    #[error("regression needs at least 2 points, got {0}")]
    ShortSeries(usize),

    #[error("log has {len} traces but the minimum window size is {min}")]
    LogTooShort { len: usize, min: usize },

    #[error("invalid detector config: {0}")]
    InvalidConfig(String),

    #[error("no eligible fragment for pattern `{0}`")]
    NoEligibleFragment(String),

    #[error("invalid distribution spec: {0}")]
    InvalidDistribution(String),

    #[error("invalid process tree: {0}")]
    InvalidTree(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
