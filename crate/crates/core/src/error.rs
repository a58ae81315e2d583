use thiserror::Error;

/// Errors raised by the numerical core.
///
/// Numeric payloads are stored as `f64` regardless of the working scalar so
/// that the error type stays independent of it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("singular matrix: |det| = {det:e} <= tolerance {tol:e}")]
    SingularMatrix { det: f64, tol: f64 },

    #[error("swelling stretch lambda({z}) = {lambda} is not positive")]
    NonPositiveStretch { z: f64, lambda: f64 },

    #[error("degenerate state: det F = {det_f:e} <= 0")]
    DegenerateState { det_f: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("every axis is periodic, the domain has no boundary")]
    AllPeriodic,

    /// `det F` fell to the floor or `ρ` stopped being positive.
    #[error(
        "loss of positivity: min det F = {min_det_f:e} (floor {floor:e}), min rho = {min_rho:e}"
    )]
    LossOfPositivity {
        min_det_f: f64,
        min_rho: f64,
        floor: f64,
    },

    #[error(
        "nonlinear solve failed in {stage} after {iterations} iterations, residual {residual:e}"
    )]
    NonlinearSolveFailure {
        stage: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("time step {dt:e} fell below the minimum {min_dt:e}: {cause}")]
    StepTooSmall {
        dt: f64,
        min_dt: f64,
        cause: Box<Error>,
    },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Innermost cause, looking through dt-control wrappers.
    pub fn root_cause(&self) -> &Error {
        match self {
            Error::StepTooSmall { cause, .. } => cause.root_cause(),
            other => other,
        }
    }
}
