//! Experiments on the PEM fuel cell model: transients, polarization sweeps,
//! curve comparison and parameter calibration.

pub mod calibrate;
pub mod curves;
pub mod error;
pub mod output;
pub mod polarization;
pub mod setup;
pub mod transient;

pub use calibrate::{
    calibrate, default_bounds, Bound, CalibrationProblem, CalibrationReport, ExperimentalCurve, FreeParameter,
    Objective, SearchConfig, Strategy,
};
pub use curves::{delta_u_max, read_curve_file, write_curve_file, CurveSample};
pub use error::{Result, ScenarioError};
pub use polarization::{current_grid, polarization_curve, PolarizationCurve, PolarizationPoint};
pub use setup::{default_steady, Simulation, STEADY_RTOL};
pub use transient::{run_transient, run_transient_from, Failure, SimulationResult};
