//! Current-profile transients.

use pemfc_core::derived::derive;
use pemfc_core::{CurrentProfile, DerivedQuantities, FuelCellModel};
use pemfc_integrator::{Bdf, StepStats};

use crate::error::{Result, ScenarioError};
use crate::setup::Simulation;

/// Where and why a run stopped early.
#[derive(Debug, Clone)]
pub struct Failure {
    pub t: f64,
    pub message: String,
    /// Last accepted state.
    pub state: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub state_names: Vec<String>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub derived: Vec<DerivedQuantities>,
    pub stats: StepStats,
    pub failure: Option<Failure>,
}

impl SimulationResult {
    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }

    /// Time series of one state, by name.
    pub fn series(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.state_names.iter().position(|n| n == name)?;
        Some(self.states.iter().map(|y| y[k]).collect())
    }
}

/// Output times `0, dt, 2 dt, ...` up to and including `duration`.
pub fn output_grid(duration: f64, output_dt: f64) -> Vec<f64> {
    let n = (duration / output_dt + 1e-9).floor() as usize;
    let mut t: Vec<f64> = (0..=n).map(|k| k as f64 * output_dt).collect();
    if duration - t[n] > 1e-9 * duration {
        t.push(duration);
    }
    t
}

/// Run `profile` for `duration` seconds from the zero-current initial state.
pub fn run_transient(
    sim: &Simulation,
    profile: CurrentProfile,
    duration: f64,
    output_dt: f64,
) -> Result<SimulationResult> {
    let y0 = sim.initial_state()?;
    run_transient_from(sim, profile, &y0, duration, output_dt)
}

/// Run `profile` from an arbitrary state. The integrator is restarted at
/// every profile breakpoint. Solver failures, and output times where the
/// cell voltage cannot be evaluated (reactant depletion), are reported in
/// [`SimulationResult::failure`] together with the outputs reached so far.
pub fn run_transient_from(
    sim: &Simulation,
    profile: CurrentProfile,
    y0: &[f64],
    duration: f64,
    output_dt: f64,
) -> Result<SimulationResult> {
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(ScenarioError::Invalid(format!(
            "duration must be positive, got {duration}"
        )));
    }
    if !(output_dt > 0.0) || !output_dt.is_finite() {
        return Err(ScenarioError::Invalid(format!(
            "output step must be positive, got {output_dt}"
        )));
    }
    let model = sim.model(profile)?;
    let cfg = sim.integrator_config(&model);
    let outputs = output_grid(duration, output_dt);

    let mut res = SimulationResult {
        state_names: model.layout().state_names(),
        times: Vec::with_capacity(outputs.len()),
        states: Vec::with_capacity(outputs.len()),
        derived: Vec::with_capacity(outputs.len()),
        stats: StepStats::default(),
        failure: None,
    };

    let mut knots: Vec<f64> = model
        .profile()
        .breakpoints()
        .into_iter()
        .filter(|b| *b > 0.0 && *b < duration)
        .collect();
    knots.push(duration);

    let mut next_out = 0;
    let mut t0 = 0.0;
    let mut y = y0.to_vec();
    if outputs[0] == 0.0 {
        if let Err(e) = record(&model, &mut res, 0.0, &y) {
            res.failure = Some(Failure {
                t: 0.0,
                message: e.to_string(),
                state: y,
            });
            return Ok(res);
        }
        next_out = 1;
    }
    for &t1 in &knots {
        let mut stepper = match Bdf::new(&model, t0, &y, t1, cfg.clone()) {
            Ok(s) => s,
            Err(e) => {
                res.failure = Some(Failure {
                    t: t0,
                    message: e.to_string(),
                    state: y,
                });
                return Ok(res);
            }
        };
        while !stepper.finished() {
            if let Err(e) = stepper.step() {
                res.stats.merge(stepper.stats());
                res.failure = Some(Failure {
                    t: e.time().unwrap_or(stepper.t()),
                    message: e.to_string(),
                    state: stepper.y().to_vec(),
                });
                return Ok(res);
            }
            while next_out < outputs.len() && outputs[next_out] <= stepper.t() {
                let t = outputs[next_out];
                let yt = if t == stepper.t() {
                    stepper.y().to_vec()
                } else {
                    stepper.dense(t)
                };
                if let Err(e) = record(&model, &mut res, t, &yt) {
                    res.stats.merge(stepper.stats());
                    res.failure = Some(Failure {
                        t,
                        message: e.to_string(),
                        state: yt,
                    });
                    return Ok(res);
                }
                next_out += 1;
            }
        }
        res.stats.merge(stepper.stats());
        y = stepper.y().to_vec();
        t0 = t1;
    }
    Ok(res)
}

fn record(model: &FuelCellModel, res: &mut SimulationResult, t: f64, y: &[f64]) -> Result<()> {
    let d = derive(model, t, y)?;
    if let Some(e) = &d.voltage_error {
        return Err(ScenarioError::Invalid(format!("cell voltage at t = {t}: {e}")));
    }
    res.times.push(t);
    res.states.push(y.to_vec());
    res.derived.push(d);
    Ok(())
}
