use alloc::string::String;

use crate::mf::FidelityLevel;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{value} is outside the domain [{lower}, {upper}]")]
    OutOfDomain { value: f64, lower: f64, upper: f64 },

    /// Cholesky failed at every jitter level. `pivot` is the last failing pivot,
    /// `max_diagonal` the largest diagonal entry of the un-jittered matrix.
    #[error(
        "covariance is not positive definite after jitter {jitter:e} \
         (failing pivot {pivot:e}, largest diagonal {max_diagonal:e})"
    )]
    NotPositiveDefinite {
        jitter: f64,
        pivot: f64,
        max_diagonal: f64,
    },

    #[error(
        "all {steps} Metropolis proposals were rejected; \
         try a smaller step scale (final scale {step_scale})"
    )]
    ChainStuck { steps: usize, step_scale: f64 },

    #[error("the {0} candidate pool is exhausted")]
    PoolExhausted(FidelityLevel),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
