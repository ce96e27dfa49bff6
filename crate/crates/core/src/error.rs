use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("row {row} is not stochastic: {reason}")]
    NotStochastic { row: String, reason: String },

    #[error("empty position set")]
    EmptyPositions,

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("parameter `{name}` out of range: {detail}")]
    OutOfRange { name: &'static str, detail: String },

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error("vertex enumeration: {0}")]
    Enumeration(String),

    #[error("channel file {path}: {detail}")]
    ChannelFile { path: String, detail: String },

    #[error("config: {field}: {detail}")]
    Config { field: String, detail: String },

    #[error("set family construction failed after {attempts} attempts; most frequent violation: {most_failed} ({counts})")]
    FamilyExhausted {
        attempts: usize,
        most_failed: &'static str,
        counts: String,
    },

    #[error("rate {rate} exceeds capacity {capacity:.6} of the no-adversary channel")]
    RateAboveCapacity { rate: f64, capacity: f64 },

    #[error("strategy is missing {0}")]
    MissingWitness(&'static str),

    #[error("nesting violated: {0}")]
    NestingViolated(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn out_of_range(name: &'static str, detail: impl Into<String>) -> Error {
    Error::OutOfRange {
        name,
        detail: detail.into(),
    }
}
