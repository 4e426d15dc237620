use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_NOT_CONVERGED: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, bad configuration or unreadable input.
    #[error("{0}")]
    Usage(String),
    /// A computation failed, or its result could not be written.
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn failure(msg: impl Into<String>) -> Self {
        CliError::Failure(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failure(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<rotdop_core::Error> for CliError {
    fn from(e: rotdop_core::Error) -> Self {
        use rotdop_core::Error as E;
        match e {
            E::NoSolution { .. } | E::NumericalFailure(_) => CliError::Failure(e.to_string()),
            E::InvalidArgument(_)
            | E::InvalidState(_)
            | E::EmptyState
            | E::OutOfRange { .. }
            | E::InvalidInput(_) => CliError::Usage(e.to_string()),
        }
    }
}
