use std::path::{Path, PathBuf};
use std::process::ExitCode;

use dipole_coupler::Error;
use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] Error),

    /// A library error while handling the named file.
    #[error("{path}: {source}")]
    File { path: PathBuf, source: Error },

    #[error("{op} {path}: {source}")]
    Io {
        op: &'static str,
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(op: &'static str, path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            op,
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn file(path: &Path) -> impl FnOnce(Error) -> CliError + '_ {
        move |source| CliError::File {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 1 numerical, 2 usage or invalid input, 3 file I/O.
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code())
    }

    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Core(e) | CliError::File { source: e, .. } => core_code(e),
        }
    }
}

fn core_code(e: &Error) -> u8 {
    match e {
        e if e.is_io() => 3,
        Error::Domain { .. } => 2,
        _ => 1,
    }
}
