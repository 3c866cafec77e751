//! Command-line workflows tying the amplifier model, linewidth fitting and
//! chain calibration into reproducible runs: configuration resolution, CSV
//! ingestion and the self-describing results document.

pub mod commands;
pub mod config;
pub mod csvio;
pub mod results;

use thiserror::Error;

/// Errors at the workflow layer, carrying the process exit code policy:
/// 2 for validation, 3 for numerical failures, 4 for I/O and parse errors.
#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] icta::Error),

    /// A model error with the pipeline stage that raised it.
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        source: icta::Error,
    },

    #[error("{0}")]
    Parse(String),

    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

fn model_exit_code(e: &icta::Error) -> i32 {
    match e {
        icta::Error::Numerical(_) | icta::Error::FitNonConvergence { .. } => 3,
        _ => 2,
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(e) => model_exit_code(e),
            CliError::Stage { source, .. } => model_exit_code(source),
            CliError::Parse(_) => 4,
            CliError::Io { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_error_class() {
        assert_eq!(
            CliError::Model(icta::Error::Validation("x".into())).exit_code(),
            2
        );
        assert_eq!(
            CliError::Model(icta::Error::Divergence { xi: 1.5 }).exit_code(),
            2
        );
        assert_eq!(
            CliError::Model(icta::Error::Numerical("x".into())).exit_code(),
            3
        );
        assert_eq!(
            CliError::Stage {
                stage: "fit",
                source: icta::Error::Numerical("x".into())
            }
            .exit_code(),
            3
        );
        assert_eq!(CliError::Parse("x".into()).exit_code(), 4);
    }
}
