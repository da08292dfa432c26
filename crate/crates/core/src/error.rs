use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("size out of range: {0}")]
    Size(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("division by the zero polynomial")]
    DivisionByZero,

    #[error("partial fraction decomposition failed: {0}")]
    Decomposition(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("site index out of range: {0}")]
    SiteOutOfRange(String),

    #[error("{what} exceeds cap {cap} (requested {requested})")]
    CapExceeded {
        what: &'static str,
        cap: usize,
        requested: usize,
    },

    #[error("verification failed: {0}")]
    Verification(String),
}
