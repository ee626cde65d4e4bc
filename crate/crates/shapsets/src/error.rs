//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A named column is missing or an input violates the declared schema.
    #[error("schema error: {0}")]
    Schema(String),

    /// A cell failed to parse; carries the 1-based data row and column name.
    #[error("parse error at row {row}, column '{column}': {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// A hard capacity limit (subset count, table size) was exceeded.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// Too many distinct values for a categorical partition.
    #[error("cardinality error: {0}")]
    Cardinality(String),

    /// An acquisition plan cannot be satisfied by the available pool.
    #[error("infeasible plan: {0}")]
    Infeasible(String),

    /// Importance weights degenerate to nothing acquirable.
    #[error("degenerate plan: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
