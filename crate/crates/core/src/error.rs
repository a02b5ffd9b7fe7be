use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no connected graph after {attempts} draws (m = {m}, p_edge = {p_edge})")]
    GraphGeneration { m: usize, p_edge: f64, attempts: usize },

    #[error("graph is not connected")]
    Disconnected,

    #[error("Jacobi eigen-solver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    EigenNonConvergence { sweeps: usize, off_norm: f64 },

    #[error("point outside the mirror-map domain: coordinate {index} = {value:e}")]
    OutsideDomain { index: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("step-size rule violated: {0}")]
    ParameterRule(String),

    #[error("local subproblem solver failed at vertex {vertex}: {reason}")]
    InnerSolver { vertex: usize, reason: String },

    #[error("saddle certificate residual {residual:e} exceeds tolerance {tolerance:e}")]
    Certificate { residual: f64, tolerance: f64 },

    #[error("a saddle certificate is required for this bound")]
    MissingCertificate,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures raised while iterating, as opposed to bad input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::EigenNonConvergence { .. }
                | Error::InnerSolver { .. }
                | Error::Certificate { .. }
                | Error::OutsideDomain { .. }
        )
    }
}
