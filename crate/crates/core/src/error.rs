use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("registry mismatch: {0}")]
    RegistryMismatch(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` is not assigned")]
    Unassigned(String),
    #[error("duplicate variable name `{0}`")]
    DuplicateName(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
