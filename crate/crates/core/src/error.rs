use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("error probability {0} is outside [0, 1/2)")]
    InvalidNoiseLevel(f64),
    #[error("invalid repetition target {0}")]
    InvalidTarget(f64),
    #[error("general position violated: {0}")]
    GeneralPositionViolation(String),
    #[error("input segments {0} and {1} cross")]
    CrossingSegments(usize, usize),
    #[error("walk exceeded its step budget of {budget} after {retries} retries")]
    BudgetExhausted { budget: u64, retries: u32 },
    #[error("structural error: {0}")]
    StructuralError(String),
    #[error("invalid handle {0}")]
    InvalidHandle(usize),
    #[error("structure is empty")]
    EmptyStructure,
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("coordinate {0} exceeds the supported bound")]
    CoordinateOutOfRange(i64),
    #[error("instance generation gave up after {0} rejections")]
    GenerationBudgetExceeded(u64),
    #[error("malformed instance: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn gp(msg: impl Into<String>) -> Error {
    Error::GeneralPositionViolation(msg.into())
}
