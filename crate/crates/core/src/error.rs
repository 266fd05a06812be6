use thiserror::Error;

/// Errors produced by the bigrank core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} = {value} is outside [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("insufficient data: {context}")]
    InsufficientData { context: String },

    #[error("degenerate sample: log-guess variance is zero")]
    DegenerateSample,

    #[error("guess {value} is below 1 or not finite")]
    InvalidGuess { value: f64 },

    #[error("no stable region exists for position bias p = {p}")]
    NoStableRegion { p: f64 },

    #[error("vote ledger is inconsistent: chosen counts exceed shown counts")]
    InvalidLedger,

    #[error("optimizer failure: {context}")]
    OptimizerFailure { context: String },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("csv row {row}: {context}")]
    CsvField { row: usize, context: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
