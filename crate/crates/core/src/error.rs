use thiserror::Error;

/// Failures reported by the library. Numerical non-convergence is kept
/// separate from bad input so drivers can map them to different exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("potential is not finite at x = {x} (value {value})")]
    NonFinitePotential { x: f64, value: f64 },

    #[error(
        "inverse iteration did not converge for eigenvalue #{index} (lambda = {lambda:e}, residual = {residual:e})"
    )]
    Convergence { index: usize, lambda: f64, residual: f64 },

    #[error("l = {l} is below the monotonicity threshold for the eigenvalue bracket")]
    BelowThreshold { l: usize },

    #[error("fit rejected: {0}")]
    Fit(String),

    #[error("Dirichlet trace violated: max |u(t, x0)| = {trace:e}")]
    DirichletTrace { trace: f64 },

    #[error("domain too short: x_max = {x_max} but the horizon needs x_max >= {required}")]
    DomainTooShort { x_max: f64, required: f64 },

    #[error("wall contamination: energy fraction {leakage:e} near x_max exceeds {tolerance:e}")]
    WallContaminated { leakage: f64, tolerance: f64 },

    #[error("empty history")]
    EmptyHistory,

    #[error("mode l = {l} has a non-positive discrete eigenvalue {lambda:e}; exponential form unavailable")]
    NonPositiveSpectrum { l: usize, lambda: f64 },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    /// True for failures of an iterative numerical method (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Convergence { .. } | Error::NonPositiveSpectrum { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
