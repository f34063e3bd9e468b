use thiserror::Error;

/// Failure reported by a right-hand side evaluation.
///
/// Inside the stepper this is treated like a Newton failure: the step is
/// retried with a smaller size.
#[derive(Debug, Clone, Error)]
#[error("{message}")]
pub struct RhsError {
    pub message: String,
}

impl RhsError {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Error)]
pub enum IntegratorError {
    #[error("invalid integrator configuration: {0}")]
    Config(String),
    #[error("right-hand side failed at t = {t}: {source}")]
    Rhs { t: f64, source: RhsError },
    #[error("non-finite derivative for state {name} at t = {t}")]
    NonFinite { t: f64, index: usize, name: String },
    #[error("non-finite Jacobian column for state {name}")]
    NonFiniteJacobian { index: usize, name: String },
    #[error("step size {h:e} fell below the minimum at t = {t} (last failure: {reason})")]
    StepSizeTooSmall {
        t: f64,
        h: f64,
        reason: String,
        state: Vec<f64>,
    },
    #[error("maximum number of steps ({0}) exceeded")]
    MaxSteps(usize),
    #[error("solution diverged at t = {t} (|y|_inf = {norm:e})")]
    Diverged { t: f64, norm: f64 },
}

impl IntegratorError {
    /// Simulation time at which the failure happened, when known.
    pub fn time(&self) -> Option<f64> {
        match self {
            Self::Rhs { t, .. }
            | Self::NonFinite { t, .. }
            | Self::StepSizeTooSmall { t, .. }
            | Self::Diverged { t, .. } => Some(*t),
            _ => None,
        }
    }
}
