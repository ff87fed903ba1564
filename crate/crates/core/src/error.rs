use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    /// A sequence or node outside the object it was looked up in.
    #[error("domain error: {0}")]
    Domain(String),
    /// Structurally well-formed input that violates an invariant.
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("bounds exceeded: {0}")]
    Bounds(String),
}

pub type Result<T> = std::result::Result<T, Error>;
