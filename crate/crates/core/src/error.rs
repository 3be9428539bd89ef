use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An input failed a structural check (Hermiticity, trace, positivity, ...).
    #[error("validation failed: {0}")]
    Validation(String),

    /// Operands have incompatible dimensions.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    /// Two observables that must commute do not.
    #[error("operators do not commute: ||[A,B]||_max = {norm:.3e} exceeds {tolerance:.3e}")]
    NotCommuting { norm: f64, tolerance: f64 },

    /// A numerical routine failed or produced a value outside its admissible range.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("unknown name: {0}")]
    UnknownName(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
