use std::io;

use thiserror::Error;

/// Exit status for a run: configuration and IO problems, failed comparisons
/// and inadequate Fock truncations are kept apart.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Model(ramsey_core::Error),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl From<ramsey_core::Error> for CliError {
    fn from(e: ramsey_core::Error) -> Self {
        CliError::Model(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 2,
            CliError::Model(ramsey_core::Error::Truncation { .. }) => 3,
            _ => 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 1);
        assert_eq!(CliError::Verification("x".into()).exit_code(), 2);
        assert_eq!(
            CliError::from(ramsey_core::Error::Truncation {
                required: 300,
                actual: 200
            })
            .exit_code(),
            3
        );
        assert_eq!(
            CliError::from(ramsey_core::Error::Argument("x".into())).exit_code(),
            1
        );
    }
}
