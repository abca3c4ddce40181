use collective_engine::EngineError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl CliError {
    /// Process exit code: 1 for failed checks or numerical failures, 2 for bad input.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Parse { .. } | CliError::Io { .. } => 2,
            CliError::Engine(e) => match e {
                EngineError::InvalidIrrep { .. }
                | EngineError::InvalidParams(_)
                | EngineError::DegenerateRates(_)
                | EngineError::TooManyParticles { .. } => 2,
                _ => 1,
            },
            CliError::Validation(_) | CliError::Pool(_) => 1,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
