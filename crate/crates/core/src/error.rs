use std::io;

use thiserror::Error;

/// Errors raised by the simulator and solver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("quadrature with {nodes} nodes cannot resolve {modes} modes")]
    InsufficientQuadrature { nodes: usize, modes: usize },

    #[error("non-finite state at step {step}{}", path.map(|p| format!(" (path {p})")).unwrap_or_default())]
    BlowUp { step: usize, path: Option<usize> },

    #[error("successive approximations did not converge in {iterations} iterations (last distance {last_distance:.3e})")]
    NonConvergence { iterations: usize, last_distance: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by numerics rather than by the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::BlowUp { .. } | Error::NonConvergence { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
