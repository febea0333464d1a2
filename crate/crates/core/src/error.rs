use thiserror::Error;

/// Errors raised by the numerics kernels, the PDD driver and the
/// application solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure in {what} (residual {residual:.3e})")]
    NumericalFailure { what: String, residual: f64 },

    #[error("ill-conditioned system in {what} (condition estimate {condition:.3e})")]
    IllConditioned { what: String, condition: f64 },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("inner solver failed at outer iteration {outer}, inner iteration {inner}: {source}")]
    Inner {
        outer: usize,
        inner: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn numerical(what: impl Into<String>, residual: f64) -> Self {
        Error::NumericalFailure {
            what: what.into(),
            residual,
        }
    }
}
