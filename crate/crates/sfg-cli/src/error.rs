use thiserror::Error;

/// CLI failure classes, mapped to process exit codes in `main`.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unparseable or invalid configuration (exit 2). Messages carry the
    /// offending field path.
    #[error("{0}")]
    Config(String),
    /// Filesystem failure while writing artifacts (exit 3).
    #[error("{0}")]
    Io(String),
}

impl From<sfg_core::Error> for CliError {
    fn from(err: sfg_core::Error) -> Self {
        CliError::Config(err.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
