use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A numerical precondition (hermiticity, trace conservation, ...) did not hold.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("target is not normalized: sum |c_n|^2 = {norm_sq:.12}, deficit {deficit:.12}")]
    Normalization { norm_sq: f64, deficit: f64 },

    #[error("internal consistency: {0}")]
    InternalConsistency(String),

    #[error("integration resolution: {0}")]
    IntegrationResolution(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code used by the command-line front-end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) => 2,
            Error::Normalization { .. } => 3,
            Error::Io(_) => 1,
            _ => 4,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
