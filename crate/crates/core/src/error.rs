use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("index {index} out of range for size {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("capacity exceeded for {what}: requested {requested}, limit {limit}")]
    Capacity {
        what: &'static str,
        requested: u128,
        limit: u128,
    },

    #[error("parse error at {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("local operator at site {site} is singular (|det| = {det_abs:e})")]
    SingularOperator { site: usize, det_abs: f64 },

    #[error("cannot reconstruct local operator at site {site}: {reason}")]
    Reconstruction { site: usize, reason: String },

    #[error("separable factorization failed: {0}")]
    Factorization(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(position: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            position,
            message: message.into(),
        }
    }

    pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
        if expected == found {
            Ok(())
        } else {
            Err(Error::Dimension { expected, found })
        }
    }
}
