use std::path::{Path, PathBuf};

use kmeans_core::Error as CoreError;
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const FAILURE: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const DATA: u8 = 3;
    pub const REGIME_NOT_ALLOWED: u8 = 4;
    pub const DEVICE_UNAVAILABLE: u8 = 5;
    pub const MISMATCH: u8 = 6;
}

/// Problems with the contents of an input file. Rows and columns are
/// 1-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DataError {
    #[error("row {row}, column {column}: cannot parse {field:?} as a number")]
    Parse {
        row: usize,
        column: usize,
        field: String,
    },
    #[error("row {row}, column {column}: {field:?} is not a finite number")]
    NonFinite {
        row: usize,
        column: usize,
        field: String,
    },
    #[error("row {row} has {found} columns, expected {expected}")]
    RaggedRows {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row} has no data columns")]
    NoColumns { row: usize },
    #[error("no data rows")]
    Empty,
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error(transparent)]
    Invalid(#[from] CoreError),
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Data { path: PathBuf, source: DataError },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("regime outputs differ: {0}")]
    Mismatch(String),
}

impl CliError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Data { .. } | CliError::Io { .. } => exit::DATA,
            CliError::Mismatch(_) => exit::MISMATCH,
            CliError::Core(e) => match e {
                CoreError::InvalidConfig(_) => exit::USAGE,
                CoreError::RegimeNotAllowed { .. } => exit::REGIME_NOT_ALLOWED,
                CoreError::DeviceUnavailable(_)
                | CoreError::DeviceLost(_)
                | CoreError::CapacityExceeded { .. } => exit::DEVICE_UNAVAILABLE,
                CoreError::DimensionMismatch { .. }
                | CoreError::InconsistentSizes(_)
                | CoreError::InvalidDataset(_)
                | CoreError::EmptyCluster
                | CoreError::InsufficientData { .. }
                | CoreError::DegenerateData { .. } => exit::DATA,
                _ => exit::FAILURE,
            },
        }
    }
}
