use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument `{arg}`: {reason}")]
    InvalidArgument { arg: &'static str, reason: String },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("inconsistent scattering data: {0}")]
    Inconsistent(String),

    #[error("bisection did not converge for bracket [{lo}, {hi}] after {iterations} iterations")]
    Bisection { lo: f64, hi: f64, iterations: usize },

    #[error("kernel of {rows}x{cols} entries exceeds the memory guard of {limit} entries")]
    MemoryGuard { rows: usize, cols: usize, limit: usize },

    #[error("unsupported decomposition: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn arg(arg: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            arg,
            reason: reason.into(),
        }
    }
}
