use thiserror::Error;

/// Errors raised by the library. Status outcomes such as "infeasible LP" or
/// "unsatisfiable instance" are values, not errors.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("structural error: {0}")]
    Structural(String),

    #[error("resource cap exceeded: {0}")]
    Resource(String),

    #[error("arithmetic error: {0}")]
    Arithmetic(String),

    #[error("unsatisfiable: {0}")]
    Unsatisfiable(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("generator gave up: {0}")]
    RejectionLimit(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
