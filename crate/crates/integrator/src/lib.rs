//! Implicit integration of stiff ODE systems.
//!
//! The core is a variable-order (1 to 5) backward differentiation method in
//! quasi-constant step-size form, optionally with the NDF modification of the
//! error constants. A finite-difference Jacobian, a steady-state driver and
//! dense output between accepted steps are built on top of it.

mod bdf;
mod config;
mod driver;
mod error;
mod jacobian;
mod system;

pub use bdf::{Bdf, StepStats};
pub use config::{AbsTol, Formula, IntegratorConfig, JacobianPolicy, SteadyConfig};
pub use driver::{integrate, integrate_with, steady_state, Control, SteadyOutcome, Trajectory};
pub use error::{IntegratorError, RhsError};
pub use jacobian::jacobian_fd;
pub use system::OdeSystem;

/// Weighted RMS norm used for error control: `sqrt(mean((v_i / w_i)^2))`.
pub fn rms_norm(v: &[f64], weights: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let sum: f64 = v
        .iter()
        .zip(weights)
        .map(|(x, w)| {
            let r = x / w;
            r * r
        })
        .sum();
    (sum / v.len() as f64).sqrt()
}
