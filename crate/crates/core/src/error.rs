use thiserror::Error;

/// Errors raised by model validation and the numerical solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("not a generator: {0}")]
    NotGenerator(String),

    #[error("generator is reducible (phase graph is not strongly connected)")]
    Reducible,

    #[error("variance of phase {} is {value}; all variances must be positive", phase + 1)]
    /// `phase` is 0-based; messages number phases from 1.
    NonPositiveVariance { phase: usize, value: f64 },

    #[error("invalid fluid rates: {0}")]
    InvalidRates(String),

    #[error(
        "mean drift {drift} is not negative; the reflected process has no stationary distribution"
    )]
    NotRecurrent { drift: f64 },

    #[error("lambda = {lambda} is not admissible: need sqrt(lambda)*sigma_i > |mu_i| (fails at phase {})", phase + 1)]
    InadmissibleLambda { lambda: f64, phase: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is singular: {0}")]
    Singular(String),

    #[error("null space has dimension {found}, expected 1")]
    NullSpaceDimension { found: usize },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("spectral splitting violated: {0}")]
    Splitting(String),

    #[error("eigenvalue count mismatch: {0}")]
    SpectralCount(String),
}

impl Error {
    /// True for errors caused by invalid input rather than solver trouble.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Parse(_)
                | Error::Dimension(_)
                | Error::NonFinite { .. }
                | Error::NotGenerator(_)
                | Error::Reducible
                | Error::NonPositiveVariance { .. }
                | Error::InvalidRates(_)
                | Error::NotRecurrent { .. }
                | Error::InadmissibleLambda { .. }
                | Error::InvalidArgument(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
