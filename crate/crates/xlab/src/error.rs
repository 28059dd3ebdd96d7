use thiserror::Error;

/// Exit status for a run that completed and passed every check.
pub const EXIT_OK: i32 = 0;
/// Usage, configuration or I/O failure; nothing was asserted.
pub const EXIT_USAGE: i32 = 1;
/// A mathematical assertion failed; the report holds the witness.
pub const EXIT_VIOLATION: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] xlab_core::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}
