use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration value (bad hyperparameter, malformed spec, ...).
    #[error("config error: {0}")]
    Config(String),

    /// Shape or schema mismatch between data structures.
    #[error("schema error: {0}")]
    Schema(String),

    /// Non-finite values or other numeric trouble.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// An operation was called in the wrong state.
    #[error("state error: {0}")]
    State(String),

    /// A caller-side contract was violated (e.g. unclipped gradient fed to
    /// the noising step).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Noise calibration could not reach the requested budget.
    #[error("calibration error: {0}")]
    Calibration(String),

    /// The privacy budget would be exceeded by the next step.
    #[error("privacy budget exhausted: spent {spent:.4}, target {target:.4}")]
    BudgetExhausted { spent: f64, target: f64 },

    /// Metric undefined for the given data (e.g. single-record statistics).
    #[error("statistics error: {0}")]
    Stats(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(String),
}

pub type Result<T> = std::result::Result<T, Error>;
