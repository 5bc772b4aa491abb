use thiserror::Error;

use crate::param::AlphaTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {value} lies outside the domain [{a}, {b}]")]
    Domain { value: f64, a: f64, b: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    Shape {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// Cholesky factorization failed; the assembled system is not SPD.
    #[error("system matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("adaptive parameter selection failed after {} iteration(s): {source}", trace.iterations.len())]
    Adaptive {
        trace: Box<AlphaTrace>,
        source: Box<Error>,
    },

    #[error("Monte Carlo trial {trial} (base seed {seed}) failed: {source}")]
    Trial {
        trial: u64,
        seed: u64,
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn parameter(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}
