use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("eigensolver failed to converge (dim {dim}, {iterations} iterations)")]
    NoConvergence { dim: usize, iterations: usize },

    #[error("undefined result: {0}")]
    Undefined(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("sweep failed at sigma = {sigma}: {failed} of {total} realizations failed")]
    TooManyFailures {
        sigma: f64,
        failed: usize,
        total: usize,
    },
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
