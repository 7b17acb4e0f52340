use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid sbox: {0}")]
    InvalidSbox(String),
    #[error("invalid ddt: {0}")]
    InvalidDdt(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dimension {0} exceeds the configured limit {1}")]
    DimensionOverflow(usize, usize),
    #[error("arithmetic overflow in exact computation")]
    Overflow,
    #[error("coverage gap: {0} impossible points are removed by no inequality")]
    CoverageGap(usize),
    #[error("infeasible cover instance: element {0} is in no subset")]
    InfeasibleCover(usize),
    #[error("invalid model: {0}")]
    Model(String),
    #[error("solver stopped without an incumbent after {nodes} nodes")]
    Indeterminate { nodes: u64 },
    #[error("invalid cipher spec: {0}")]
    Spec(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
