use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] wavefuse_core::Error),
    #[error("{}: {source}", path.display())]
    File { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Format {
        path: PathBuf,
        source: wavefuse_core::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("worker {endpoint}: {reason}")]
    Protocol { endpoint: String, reason: String },
    #[error("tile ({row}, {col}) failed {attempts} times, last error: {reason}")]
    JobFailed {
        row: usize,
        col: usize,
        attempts: u32,
        reason: String,
    },
    #[error("no reachable workers")]
    NoWorkers,
    #[error("network: {0}")]
    Net(#[from] io::Error),
    #[error("interrupted")]
    Interrupted,
}

impl Error {
    /// Process exit status for this error class: 1 usage, 2 I/O, 3
    /// computation or protocol.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::File { .. } | Error::Format { .. } => 2,
            _ => 3,
        }
    }
}
