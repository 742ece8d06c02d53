use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),

    #[error("{what} needs {needed} bytes, budget is {budget}")]
    TooLarge {
        what: &'static str,
        needed: u128,
        budget: u128,
    },

    #[error("projection needs {needed} function evaluations, budget is {budget}")]
    CostExceeded { needed: u128, budget: u128 },

    #[error("shape mismatch at multi-level {level:?}: expected {expected} values, found {found}")]
    ShapeMismatch {
        level: Vec<usize>,
        expected: usize,
        found: usize,
    },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("non-finite function value {value} at {point:?}")]
    NonFinite { point: Vec<f64>, value: f64 },

    #[error("point {0:?} lies outside the unit cube")]
    OutsideDomain(Vec<f64>),

    #[error("step size {h:e} underflowed at t = {t}")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("step limit {0} reached")]
    StepLimit(usize),

    #[error("malformed coefficient file: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
