use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid form: {0}")]
    InvalidForm(String),
    #[error("degenerate basis: rank {rank} < {expected}")]
    DegenerateBasis { rank: usize, expected: usize },
    #[error("degenerate form: {0}")]
    DegenerateForm(String),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("dimension mismatch: {0}")]
    DimensionError(String),
    #[error("numerical failure: {0}")]
    NumericalError(String),
    #[error("direction not in the declared complement (residual {0:.3e})")]
    InvalidDirection(f64),
    #[error("scenario mismatch: {0}")]
    ScenarioMismatch(String),
    #[error("degenerate metric at {at:?}: {reason}")]
    DegenerateMetric { at: Vec<f64>, reason: String },
    #[error("point {0:?} outside chart domain")]
    DomainError(Vec<f64>),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("grid point {at:?} within margin of the zero locus (|sigma| = {sigma:.3e})")]
    MarginViolation { at: Vec<f64>, sigma: f64 },
    #[error("invalid datum: {0}")]
    InvalidDatum(String),
    #[error("serialization: {0}")]
    Serialization(String),
    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
