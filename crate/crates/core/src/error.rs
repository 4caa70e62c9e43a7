//! Shared error type for the toolkit.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value violates an invariant.
    #[error("config error: {0}")]
    Config(String),

    /// A simulation step produced an invalid state.
    #[error("simulation error: {0}")]
    Simulation(String),

    /// A prospect-set constraint was violated (probabilities must stay in [0, 1]).
    #[error("constraint violation: {0}")]
    Constraint(String),

    /// Stored data does not match its recorded digest.
    #[error("integrity error: {0}")]
    Integrity(String),

    /// Persisted schema version is not supported by this build.
    #[error("version error: file has schema version {found}, this build supports {supported}")]
    Version { found: u32, supported: u32 },

    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
