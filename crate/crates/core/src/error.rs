use thiserror::Error;

/// Coarse classification used for exit codes and FFI status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    InvalidArgument,
    InvalidState,
    ResourceLimit,
    Convergence,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("{a} is not coprime to {modulus}; gcd = {gcd} is a factor")]
    NotCoprime { a: u64, modulus: u64, gcd: u64 },

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("instance generation gave up after {restarts} restarts (n = {n}, k = {k})")]
    GenerationCap { n: usize, k: usize, restarts: usize },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidArgument(_) | Error::NotCoprime { .. } | Error::Json(_) => {
                ErrorKind::InvalidArgument
            }
            Error::InvalidState(_) => ErrorKind::InvalidState,
            Error::ResourceLimit(_) | Error::GenerationCap { .. } => ErrorKind::ResourceLimit,
            Error::Convergence { .. } => ErrorKind::Convergence,
            Error::Io(_) => ErrorKind::Io,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
