//! Error type shared by all modules.

/// Library-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A numerical routine hit an unrecoverable degeneracy (singular matrix,
    /// empty sample, non-finite intermediate value, ...).
    #[error("numerical degeneracy: {0}")]
    Degeneracy(String),

    /// A simulation produced a non-finite value.
    #[error("simulation diverged on path {path}: {message}")]
    Simulation { path: usize, message: String },

    /// Configuration file / CLI input could not be interpreted.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand for [`Error::InvalidArgument`].
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Shorthand for [`Error::Degeneracy`].
    pub fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degeneracy(msg.into())
    }
}
