use std::path::PathBuf;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] hilberg::Error),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("{}: row {row}: {message}", path.display())]
    Parse { path: PathBuf, row: u64, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        CliError::Parameter(msg.into())
    }

    /// Process exit status: 2 for bad parameters or input, 3 when a
    /// computation exceeds its resource limit, 1 for I/O failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(hilberg::Error::Resource { .. }) => 3,
            CliError::Io { .. } => 1,
            _ => 2,
        }
    }
}
