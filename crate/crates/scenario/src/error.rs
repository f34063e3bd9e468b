use thiserror::Error;

use pemfc_core::ModelError;
use pemfc_integrator::IntegratorError;

#[derive(Debug, Clone, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("integration failed: {0}")]
    Integrator(#[from] IntegratorError),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("no overlap between simulated and experimental current ranges")]
    NoOverlap,
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for ScenarioError {
    fn from(e: std::io::Error) -> Self {
        ScenarioError::Io(e.to_string())
    }
}

impl From<csv::Error> for ScenarioError {
    fn from(e: csv::Error) -> Self {
        ScenarioError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, ScenarioError>;
