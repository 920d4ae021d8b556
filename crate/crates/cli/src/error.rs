use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input: scenario, preset or argument validation.
    #[error("{0}")]
    Invalid(String),
    /// The blade left the terrain.
    #[error("{0}")]
    OutOfBounds(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Invalid(_) => ExitCode::from(2),
            CliError::OutOfBounds(_) => ExitCode::from(3),
            CliError::Io(_) | CliError::Failed(_) => ExitCode::from(1),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
