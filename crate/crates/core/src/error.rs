//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv parse error: {0}")]
    Csv(#[from] csv::Error),

    #[error("duplicate column name '{0}' in header")]
    DuplicateHeader(String),

    #[error("dataset has no data rows")]
    EmptyDataset,

    #[error("missing cell at row {row}, column '{column}'")]
    MissingCell { row: usize, column: String },

    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("column '{0}' has a single observed state; no dependency is measurable")]
    SingleStateColumn(String),

    #[error("unknown variable '{0}'")]
    UnknownVariable(String),

    #[error("graph error: {0}")]
    Graph(String),

    #[error("network file error: {0}")]
    Network(String),

    #[error("node sets differ between learned and reference graphs: {0}")]
    NodeMismatch(String),

    #[error("metric undefined: {0}")]
    MetricUndefined(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("internal invariant breached: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
