use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("dimension {dim} exceeds the configured cap {cap}")]
    DimensionOverflow { dim: usize, cap: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("scenario mismatch: expected {expected}, found {found}")]
    ScenarioMismatch { expected: String, found: String },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),

    #[error("invalid behavior: {0}")]
    InvalidBehavior(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("invalid expression: {0}")]
    InvalidExpression(String),

    #[error("composition failed: {0}")]
    Composition(String),

    #[error("enumeration cap exceeded: {0}")]
    CapExceeded(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by malformed or inconsistent user input.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidScenario(_)
                | Error::DimensionMismatch(_)
                | Error::ScenarioMismatch { .. }
                | Error::InvalidState(_)
                | Error::InvalidMeasurement(_)
                | Error::InvalidBehavior(_)
                | Error::OutOfRange(_)
                | Error::InvalidExpression(_)
                | Error::CapExceeded(_)
                | Error::Unsupported(_)
                | Error::Json(_)
        )
    }
}
