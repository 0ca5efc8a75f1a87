use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    #[error("gamma pole at nonpositive integer {0}")]
    Pole(f64),

    #[error("{op}: evaluation on the coordinate hyperplane x_{axis} = 0")]
    Singular { op: &'static str, axis: usize },

    #[error("{op}: kernel undefined on the diagonal x = y")]
    Diagonal { op: &'static str },

    #[error("supports of f and g overlap")]
    SupportOverlap,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("fixture error: {0}")]
    Fixture(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Error {
    Error::Domain { op, msg: msg.into() }
}
