use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed input: {0}")]
    Format(String),
    #[error(transparent)]
    Core(#[from] sfs_core::Error),
}

impl CliError {
    /// 2 for usage errors, 3 for I/O, 4 for numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } | CliError::Format(_) => 3,
            CliError::Core(sfs_core::Error::Diverged { .. } | sfs_core::Error::NonFinite { .. }) => 4,
            CliError::Core(_) => 2,
        }
    }
}
