use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate triangle {index}: signed area {area:e}")]
    Geometry { index: usize, area: f64 },

    #[error("periodicity: {0}")]
    Periodicity(String),

    #[error("constraint: {0}")]
    Constraint(String),

    #[error("conjugate gradient did not converge after {iterations} iterations (relative residual {residual:e})")]
    Solver { iterations: usize, residual: f64 },

    #[error("non-finite value in field `{field}` at step {step} (t = {t})")]
    Divergence { step: usize, t: f64, field: &'static str },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Process exit status for command-line use: 2 for configuration and
    /// argument problems, 3 for divergence, 4 for solver failure, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Divergence { .. } => 3,
            Error::Solver { .. } => 4,
            Error::Io(_) => 1,
            _ => 2,
        }
    }

    pub(crate) fn config(line: usize, msg: impl Into<String>) -> Self {
        Error::Config {
            line,
            message: msg.into(),
        }
    }
}
