use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported exponent p = {0}")]
    UnsupportedExponent(f64),

    #[error("point {z} lies outside the open unit disk")]
    Domain { z: Complex64 },

    #[error("quadrature did not converge: best estimate {best}, residual {residual:e}")]
    Convergence { best: f64, residual: f64 },

    #[error("mapping is not sense-preserving at {z} (jacobian {jacobian:e})")]
    SenseViolation { z: Complex64, jacobian: f64 },

    #[error("singular point: {0}")]
    SingularPoint(String),

    #[error("refused: {0}")]
    Refused(String),

    #[error("overflow evaluating {0}")]
    Overflow(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// True for failures caused by numerical non-convergence rather than
    /// bad input or configuration.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Convergence { .. } | Error::Overflow(_))
    }
}
