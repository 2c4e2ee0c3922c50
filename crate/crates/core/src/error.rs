use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input violates a documented precondition.
    #[error("validation error: {0}")]
    Validation(String),

    /// An iterative kernel did not converge or a quantity that must be
    /// positive came out non-positive.
    #[error("numerical error: {message} (after {iterations} iterations)")]
    Numerical { message: String, iterations: usize },

    /// The Gram matrix of a channel is singular or too ill-conditioned for
    /// a zero-forcing evaluation.
    #[error("rank-deficient matrix (condition estimate {condition:.3e})")]
    RankDeficient { condition: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>, iterations: usize) -> Self {
        Error::Numerical {
            message: msg.into(),
            iterations,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
