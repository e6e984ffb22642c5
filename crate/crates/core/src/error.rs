use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-range user input (vertex labels, edge counts, flags).
    #[error("invalid input: {0}")]
    Input(String),

    /// The request exceeds a hard size cap of a brute-force routine.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A solver model that does not respect the encoding's own invariants.
    #[error("model decode failed: {0}")]
    Decode(String),

    /// An internal invariant broke; always a bug.
    #[error("internal error: {0}")]
    Internal(String),

    #[error("solver configuration: {0}")]
    Config(String),

    /// The external solver produced output we could not interpret.
    #[error("solver integration: {message}\n--- raw solver output ---\n{raw}")]
    Integration { message: String, raw: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }
}
