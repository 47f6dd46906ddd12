use qphlab_core::Error;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Failure(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Failure(_) | CliError::Io(_) => 1,
        }
    }
}

/// Invalid inputs are config errors; guards, contracts and numerical
/// breakdowns are failures.
impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::SizeGuard(_)
            | Error::Precondition(_)
            | Error::Contract(_)
            | Error::VanishingProbability(_)
            | Error::NotTracePreserving(_) => CliError::Failure(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

pub fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}
