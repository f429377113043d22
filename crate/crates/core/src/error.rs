use thiserror::Error;

/// Errors produced by the analysis library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("missing mandatory column '{column}' (logical field '{field}')")]
    MissingColumn { field: &'static str, column: String },

    #[error("{what} must not be empty")]
    EmptyInput { what: &'static str },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("range must be positive, got {0}")]
    NonPositiveRange(u64),

    #[error("updated timestamp {updated} precedes created timestamp {created}")]
    TimestampOrder { created: i64, updated: i64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("inconsistent stage outputs: {0}")]
    Consistency(String),

    #[error("unknown figure id {0} (expected 1-6)")]
    UnknownFigure(u8),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
