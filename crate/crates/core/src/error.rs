use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("odd prime required")]
    OddPrimeRequired,
    #[error("invalid group spec: {0}")]
    InvalidSpec(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("composition error: boundary of boundary is nonzero")]
    Composition,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("ring mismatch: {0}")]
    RingMismatch(String),
    #[error("not a cycle")]
    NotACycle,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("degree {degree} exceeds cap {cap}")]
    DegreeCap { degree: u32, cap: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;
