use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised anywhere in the crate.
///
/// [`Error::category`] groups them into input, numeric and guard failures so
/// front ends can map them to exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("matrix is singular (smallest pivot {pivot:.3e})")]
    Singular { pivot: f64 },

    #[error("matrix is ill-conditioned (condition estimate {condition:.3e}, smallest pivot {pivot:.3e})")]
    IllConditioned { condition: f64, pivot: f64 },

    #[error("matrix is not antisymmetric (deviation {deviation:.3e})")]
    NotAntisymmetric { deviation: f64 },

    #[error("Pfaffian needs an even dimension, got {0}")]
    OddDimension(usize),

    #[error("block matrix is not self-dual (deviation {deviation:.3e})")]
    NotSelfDual { deviation: f64 },

    #[error("connection is not unitary (max ||phi|-1| = {deviation:.3e}); the CRSF measure is undefined")]
    NonUnitary { deviation: f64 },

    #[error("walk is not closed: ends at {end}, started at {start}")]
    NotClosed { start: usize, end: usize },

    #[error("{what}: {count} exceeds the enumeration limit {limit}; use a smaller input")]
    Guard {
        what: &'static str,
        count: f64,
        limit: f64,
    },

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("root {re} {im:+}i is not real")]
    ComplexRoot { re: f64, im: f64 },

    #[error("numerical degradation: {0}")]
    Numerical(String),
}

/// Coarse grouping used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Input,
    Numeric,
    Guard,
}

impl Error {
    pub fn category(&self) -> Category {
        match self {
            Error::Parse { .. }
            | Error::Invalid(_)
            | Error::NotSquare { .. }
            | Error::Dimension { .. }
            | Error::OddDimension(_)
            | Error::NotClosed { .. }
            | Error::NonUnitary { .. }
            | Error::InsufficientSamples { .. } => Category::Input,
            Error::Guard { .. } => Category::Guard,
            Error::Singular { .. }
            | Error::IllConditioned { .. }
            | Error::NotAntisymmetric { .. }
            | Error::NotSelfDual { .. }
            | Error::ComplexRoot { .. }
            | Error::Numerical(_) => Category::Numeric,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
