use thiserror::Error;

use crate::model::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input whose shape is inconsistent (dimension mismatch, duplicate ids).
    #[error("malformed input: {0}")]
    Structure(String),

    /// Structurally sound instance that breaks a modelling assumption.
    #[error("invalid instance: {0}")]
    Invalid(ValidationReport),

    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("{what} {index} out of range 0..{len}")]
    OutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("exact routing oracle refuses {0} stops (limit {limit})", limit = crate::vrp::ORACLE_MAX_STOPS)]
    TooManyStops(usize),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("instance generation failed: {0}")]
    Generation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn structure(msg: impl Into<String>) -> Self {
        Error::Structure(msg.into())
    }

    /// Errors a caller can fix by changing the request, as opposed to I/O.
    pub fn is_user_error(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
