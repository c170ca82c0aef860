use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    /// The file was read but its contents are not valid for the command.
    #[error("{}: {source}", path.display())]
    Input { path: PathBuf, source: sdmapkit::Error },

    #[error(transparent)]
    Compute(#[from] sdmapkit::Error),
}

impl CliError {
    /// 0 success, 1 computation error, 2 usage, I/O or bad input file.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Compute(_) => 1,
            CliError::Usage(_) | CliError::Io { .. } | CliError::Input { .. } => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
