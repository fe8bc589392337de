use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] zeroset::Error),

    #[error("input: {0}")]
    Input(String),

    #[error("calibration: {0} (pass --uncalibrated to run without one)")]
    Calibration(String),

    #[error("unresolved: {0}")]
    Unresolved(String),

    #[error("replay mismatch: {0}")]
    Mismatch(String),

    #[error("output: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(zeroset::Error::ResourceCap(_)) => 4,
            CliError::Core(_) | CliError::Input(_) | CliError::Calibration(_) => 2,
            CliError::Unresolved(_) => 3,
            CliError::Mismatch(_) | CliError::Output(_) => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
