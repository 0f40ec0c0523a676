use thiserror::Error;

/// Errors produced by the exact-arithmetic layers of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("elements belong to different groups: {0} vs {1}")]
    GroupMismatch(String, String),
    #[error("vector length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid probability mass function: {0}")]
    InvalidPmf(String),
    #[error("invalid group description: {0}")]
    InvalidGroup(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("operation requires a finite group, got lattice rank {0}")]
    RequiresFinite(usize),
    #[error("inverse transform residual {residual} exceeds tolerance {tolerance}")]
    Reconstruction { residual: f64, tolerance: f64 },
    #[error("malformed input: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;
