use thiserror::Error;

/// Failures of a command, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input documents, infeasible models or plans with violations.
    #[error("{0}")]
    Rejected(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Rejected(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<fronthaul_core::LoadError> for CliError {
    fn from(e: fronthaul_core::LoadError) -> Self {
        CliError::Rejected(e.to_string())
    }
}
