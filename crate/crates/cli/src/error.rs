use thiserror::Error;

use seqresp::Error as CoreError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A computation finished but missed its stated tolerance.
    #[error("tolerance failure: {0}")]
    Tolerance(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    /// 0 ok, 1 config error, 2 invalid system, 3 non-convergence, 4 tolerance failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Tolerance(_) => 4,
            CliError::Core(e) => match e {
                CoreError::NotConverged { .. } | CoreError::NoConvergence { .. } => 3,
                CoreError::TailNotSmall { .. }
                | CoreError::MNotFound { .. }
                | CoreError::DeltaStarNotFound(_) => 4,
                CoreError::Io(_) | CoreError::Format(_) => 1,
                _ => 2,
            },
        }
    }
}

impl From<toml::de::Error> for CliError {
    fn from(e: toml::de::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.into())
    }
}
