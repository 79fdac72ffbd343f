use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the simulation and bound pipeline.
#[derive(Debug, Error)]
pub enum QslError {
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NonHermitianInput { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("time {t} outside protocol range [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },

    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid scenario: {0}")]
    Validation(String),

    #[error("cannot read or write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("positivity lost at t={t}: minimum eigenvalue {min_eigenvalue:.3e} (reduce dt)")]
    PositivityLost { t: f64, min_eigenvalue: f64 },

    #[error(
        "divergent entropy production: forward traffic {forward:.3e} on channel omega={omega} \
         has no reverse traffic"
    )]
    DivergentEntropyProduction { omega: f64, forward: f64 },

    #[error("trajectory has fewer than two states")]
    EmptyTrajectory,

    #[error("scenario is not dissipationless (lambda * gamma0 = {0})")]
    NotDissipationless(f64),

    #[error("energy gap {gap:.3e} below gap tolerance; counter-diabatic field undefined")]
    DegenerateSpectrum { gap: f64 },

    #[error("scenario violates classical conditions: {0}")]
    NotClassical(String),

    #[error("unknown sweep parameter `{0}` (expected lambda, beta, gamma0 or dt)")]
    UnknownParam(String),

    #[error("trajectory CSV schema error: {0}")]
    Schema(String),
}

impl QslError {
    /// True for failures of the numerics (as opposed to bad input or I/O).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            QslError::PositivityLost { .. }
                | QslError::DivergentEntropyProduction { .. }
                | QslError::NonFinite
                | QslError::DegenerateSpectrum { .. }
        )
    }
}

pub type Result<T, E = QslError> = std::result::Result<T, E>;
