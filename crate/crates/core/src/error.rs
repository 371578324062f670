use thiserror::Error;

/// Errors raised anywhere in the toolkit.
///
/// Variants are grouped by the exit-code contract of the command-line tool:
/// configuration and usage problems map to 2, computational failures to 1.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("unbounded: {0}")]
    Unbounded(String),

    #[error("branch-and-bound stopped after {0} nodes; optimality is not certified")]
    ExactnessLost(usize),

    #[error("simplex iteration limit {0} reached")]
    IterationLimit(usize),

    #[error("quadrature error estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("embedded Markov chain is singular (reducible or malformed kernel)")]
    SingularChain,

    #[error("scenario rejected {0} times without meeting the system-wide budget")]
    RejectionLimit(usize),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn parse(path: impl AsRef<std::path::Path>, message: impl ToString) -> Self {
        Error::Parse {
            path: path.as_ref().display().to_string(),
            message: message.to_string(),
        }
    }

    /// Process exit code: 1 for computational failures, 2 for usage or configuration errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Validation(_) | Error::Io { .. } | Error::Model(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
