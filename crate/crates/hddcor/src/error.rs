use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors of the file, config and experiment layers.
#[derive(Debug, Error)]
pub enum Error {
    /// Library error from the numerical core.
    #[error(transparent)]
    Core(#[from] hddcor_core::Error),
    /// File could not be read or written.
    #[error("{}: {source}", path.display())]
    Io {
        /// Offending path.
        path: PathBuf,
        /// Underlying error.
        source: io::Error,
    },
    /// Malformed or inconsistent input data.
    #[error("{0}")]
    Input(String),
    /// Experiment config failed validation.
    #[error("invalid config: {0}")]
    Config(String),
    /// CSV writer failure.
    #[error(transparent)]
    Csv(#[from] csv::Error),
    /// Error annotated with where it happened.
    #[error("{context}: {source}")]
    Context {
        /// Location, such as a date or a grid point.
        context: String,
        /// Underlying error.
        source: Box<Error>,
    },
    /// JSON serialization failure.
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Result alias for this crate.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code: 2 for usage or input errors, 3 for numerical
    /// failures.
    pub fn exit_code(&self) -> u8 {
        use hddcor_core::Error as C;
        match self {
            Error::Core(C::StudentizationUndefined | C::DegenerateVariance | C::ZeroDenominator) => 3,
            Error::Context { source, .. } => source.exit_code(),
            _ => 2,
        }
    }

    pub(crate) fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
