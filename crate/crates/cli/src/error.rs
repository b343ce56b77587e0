use std::path::Path;

use thiserror::Error;

/// Process exit status: 0 success, 1 data/validation error, 2 usage/IO error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success,
    DataError,
    UsageError,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Success => 0,
            ExitStatus::DataError => 1,
            ExitStatus::UsageError => 2,
        }
    }
}

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

    #[error("{context}: {source}")]
    Data {
        context: String,
        #[source]
        source: holdscan::Error,
    },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn data(context: impl Into<String>) -> impl FnOnce(holdscan::Error) -> Self {
        let context = context.into();
        move |source| CliError::Data { context, source }
    }

    pub fn invalid_setting(e: holdscan::Error) -> Self {
        CliError::Usage(format!("invalid setting: {e}"))
    }

    pub fn status(&self) -> ExitStatus {
        match self {
            CliError::Data { .. } => ExitStatus::DataError,
            CliError::Usage(_) | CliError::Io { .. } => ExitStatus::UsageError,
        }
    }
}
