use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("out of domain: {0}")]
    Domain(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
