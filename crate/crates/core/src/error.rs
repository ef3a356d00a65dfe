use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RevcError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: negative edge cost {cost}")]
    NegativeCost { line: usize, cost: f64 },

    #[error("line {line}: self-loop on vertex `{label}`")]
    SelfLoop { line: usize, label: String },

    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index does not match graph: {0}")]
    StaleIndex(String),

    #[error("malformed index file: {0}")]
    BadIndex(String),

    #[error("graph has {vertices} vertices, above the oracle limit of {limit}")]
    OracleSizeGuard { vertices: usize, limit: usize },

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, RevcError>;
