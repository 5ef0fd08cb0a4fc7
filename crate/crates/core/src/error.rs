use thiserror::Error;

/// Errors raised by the numerical and exact engines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point is off the surface: level {level} (expected {expected})")]
    OffSurface { level: f64, expected: f64 },

    #[error("unresolved crossing in [{t0}, {t1}]: {reason}")]
    UnresolvedCrossing { t0: f64, t1: f64, reason: String },

    #[error("eigenvalue classification ambiguous near 1 (margin {margin:e})")]
    AmbiguousParity { margin: f64 },

    #[error("exact arithmetic overflow: {0}")]
    ExactOverflow(String),

    #[error("{what} did not converge after {iterations} iterations (best value {best}, gradient norm {grad_norm:e})")]
    NoConvergence {
        what: String,
        iterations: usize,
        best: f64,
        grad_norm: f64,
    },

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("{0} is not a common period")]
    NotCommonPeriod(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}

impl Error {
    /// Errors caused by the caller's input rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_) | Error::OffSurface { .. } | Error::NotCommonPeriod(_)
        )
    }
}
