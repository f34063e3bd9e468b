use thiserror::Error;

use pemfc_integrator::IntegratorError;

#[derive(Debug, Clone, Error)]
pub enum ModelError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("discretization yields n_gdl = {n_gdl} < 2 (H_gdl = {h_gdl:e} m, H_cl = {h_cl:e} m)")]
    Discretization { n_gdl: usize, h_gdl: f64, h_cl: f64 },
    #[error("infeasible humidity: mean vapor pressure {vapor:.1} Pa >= mean pressure {pressure:.1} Pa")]
    InfeasibleHumidity { vapor: f64, pressure: f64 },
    #[error("state vector has length {got}, layout expects {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("{what} out of domain: {detail}")]
    Domain { what: &'static str, detail: String },
    #[error("reactant depletion at i_fc = {i_fc} A/m2: {species} concentration {value:e} mol/m3")]
    Starvation {
        species: &'static str,
        value: f64,
        i_fc: f64,
    },
    #[error("flooding: {node} saturation {s:.4} exceeds 0.99")]
    Flooding { node: String, s: f64 },
    #[error("non-finite value in {term} at {node}")]
    NonFinite { node: String, term: &'static str },
    #[error("reverse exhaust flow: downstream {p_ext:.1} Pa exceeds upstream {p_up:.1} Pa")]
    ReverseExhaust { p_up: f64, p_ext: f64 },
    #[error("no overlap between simulated and experimental current ranges")]
    NoOverlap,
    #[error("integration failed: {0}")]
    Integrator(#[from] IntegratorError),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for ModelError {
    fn from(e: std::io::Error) -> Self {
        ModelError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, ModelError>;
