use std::io;
use std::path::PathBuf;

/// Errors surfaced by the experiment runner. Each maps to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("resource cap exceeded: {0}")]
    Resource(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("malformed instance file {path}, line {line}: {message}")]
    InstanceFormat { path: PathBuf, line: usize, message: String },

    #[error(transparent)]
    Core(cgqmc_core::Error),

    #[error("{0} cell(s) failed; see the error column of the outputs")]
    PartialFailure(usize),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 2,
            LabError::Resource(_) => 3,
            LabError::PartialFailure(_) => 4,
            LabError::Core(cgqmc_core::Error::InvalidArgument(_)) => 2,
            LabError::Core(cgqmc_core::Error::ResourceLimit { .. }) => 3,
            _ => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<cgqmc_core::Error> for LabError {
    fn from(e: cgqmc_core::Error) -> Self {
        match e {
            cgqmc_core::Error::ResourceLimit { .. } => LabError::Resource(e.to_string()),
            other => LabError::Core(other),
        }
    }
}

pub type LabResult<T> = Result<T, LabError>;
