use thiserror::Error;

/// Errors raised by graph, matrix, solver and decision routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: bad generator parameters, inconsistent dimensions,
    /// malformed partitions, negative CP factors.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Input exceeds a configured size cap.
    #[error("capability exceeded: {0}")]
    Capability(String),

    #[error("numerical failure after {iterations} iterations: {message}")]
    Numerical { message: String, iterations: usize },

    /// An operation was handed an object that does not satisfy its contract,
    /// e.g. an invalid witness or a solution with non-constant diagonal.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Two independent routes disagreed or neither was decisive.
    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}

pub(crate) fn capability<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Capability(msg.into()))
}

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}
