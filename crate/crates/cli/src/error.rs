use thiserror::Error;

use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] refram::Error),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 1 for verification or internal failures, 2 for invalid input, 3 when
    /// precision ran out after the retry.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(refram::Error::InsufficientPrecision(_)) => 3,
            CliError::Core(
                refram::Error::InvalidSpec(_)
                | refram::Error::DegenerateExtension(_)
                | refram::Error::Padic(_)
                | refram::Error::PrecisionTooLow(_),
            ) => 2,
            CliError::Core(_) => 1,
            CliError::Config(_) => 2,
            CliError::Io { .. } | CliError::Json(_) => 1,
        }
    }
}
