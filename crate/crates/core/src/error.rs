use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("monoid mismatch: expected {expected}, found {found}")]
    MonoidMismatch { expected: String, found: String },
    #[error("{what} requires {requirement}")]
    Precondition { what: String, requirement: String },
    #[error("unknown reference `{0}`")]
    UnknownRef(String),
    #[error("codec error: {0}")]
    Codec(String),
    #[error("rule `{rule}` does not match at {path:?}")]
    NoMatch { rule: String, path: Vec<usize> },
    #[error("rule `{rule}` side condition failed: {reason}")]
    SideCondition { rule: String, reason: String },
    #[error("invalid path {0:?}")]
    InvalidPath(Vec<usize>),
    #[error("rejected: {0}")]
    Rejected(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn precondition(what: impl Into<String>, requirement: impl Into<String>) -> Error {
    Error::Precondition { what: what.into(), requirement: requirement.into() }
}
