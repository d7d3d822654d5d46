use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gamma function pole at z = {z}")]
    Pole { z: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("series did not converge after {terms} terms")]
    NonConvergence { terms: usize },

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("singular leading coefficient at x = {x}")]
    SingularCoefficient { x: f64 },

    #[error("shooting bracket [{lo}, {hi}] does not enclose a sign change")]
    BracketFailure { lo: f64, hi: f64 },
}

impl Error {
    /// Numerical failures (non-convergence, overflow, singularities, failed
    /// brackets) as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::Overflow(_)
                | Error::SingularCoefficient { .. }
                | Error::BracketFailure { .. }
        )
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
