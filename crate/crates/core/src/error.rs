use thiserror::Error;

use crate::parse::ParseError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("bag substitution requires {var} not free in the bag")]
    FreshnessViolation { var: String },
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("no redex at {0}")]
    InvalidRedex(String),
    #[error("invalid trace: {0}")]
    InvalidTrace(String),
    #[error("search exhausted: {0}")]
    SearchExhausted(String),
    #[error("no reduction chain found within {bound} steps")]
    NoChainFound { bound: usize },
    #[error("malformed machine tree: {0}")]
    MalformedTree(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
