use chaoslab_core::ChaosError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("{path}:{line}:{column}: {message}")]
    Config {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Input { path: String, source: ChaosError },

    #[error(transparent)]
    Core(#[from] ChaosError),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    /// 0 pass, 1 check failure, 2 usage or parse error, 3 resource cap.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } | CliError::Input { .. } => 2,
            CliError::Core(e) if e.is_resource_cap() => 3,
            CliError::Core(ChaosError::Parse { .. } | ChaosError::InvalidArgument(_)) => 2,
            CliError::Core(_) | CliError::Io { .. } => 1,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
