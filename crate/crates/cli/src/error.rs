use pev_bottleneck::ModelError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("budget {budget}: {source}")]
    Numeric { budget: f64, source: ModelError },

    #[error("best response did not converge for budget(s) {0}")]
    Oracle(String),
}

impl CliError {
    /// Process exit status: 1 for bad input, 2 for numeric failures, 3 when
    /// the best-response oracle does not converge.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Numeric { source, .. } if !source.is_numeric_failure() => 1,
            CliError::Numeric { .. } => 2,
            CliError::Oracle(_) => 3,
        }
    }
}
