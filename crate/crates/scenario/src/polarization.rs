//! Settled polarization sweeps.

use pemfc_core::profile::A_PER_M2_PER_A_PER_CM2;
use pemfc_core::voltage::{cell_voltage, VoltageBreakdown, VoltageInputs};
use pemfc_core::{CurrentProfile, StateBlocks};
use pemfc_integrator::{steady_state, StepStats};

use crate::curves::CurveSample;
use crate::error::{Result, ScenarioError};
use crate::setup::Simulation;

#[derive(Debug, Clone)]
pub struct PolarizationPoint {
    /// Current density in A/m2.
    pub i_fc: f64,
    /// NaN when the voltage could not be evaluated.
    pub u_cell: f64,
    pub converged: bool,
    /// Simulated time spent settling.
    pub settle_time: f64,
    pub residual: f64,
    pub breakdown: Option<VoltageBreakdown>,
    pub s_ccl: f64,
    pub state: Vec<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct PolarizationCurve {
    /// Desired cathode pressure in Pa.
    pub p_des: f64,
    pub points: Vec<PolarizationPoint>,
    pub stats: StepStats,
}

impl PolarizationCurve {
    /// Converged points with a valid voltage, in A/cm2.
    pub fn samples(&self) -> Vec<CurveSample> {
        self.points
            .iter()
            .filter(|p| p.converged && p.u_cell.is_finite())
            .map(|p| CurveSample {
                i_fc: p.i_fc / A_PER_M2_PER_A_PER_CM2,
                u_cell: p.u_cell,
            })
            .collect()
    }

    pub fn all_converged(&self) -> bool {
        self.points.iter().all(|p| p.converged && p.u_cell.is_finite())
    }

    /// Current density (A/m2) at which the cathode CL saturation first
    /// reaches the voltage-drop switch value, linearly interpolated between
    /// converged points. `None` if it is not reached on the sweep.
    pub fn concentration_drop_onset(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .points
            .iter()
            .filter(|p| p.converged)
            .filter_map(|p| p.breakdown.as_ref().map(|b| (p.i_fc, p.s_ccl - b.s_switch)))
            .collect();
        if let Some(&(i, g)) = pts.first() {
            if g >= 0.0 {
                return Some(i);
            }
        }
        pts.windows(2).find_map(|w| {
            let ((i0, g0), (i1, g1)) = (w[0], w[1]);
            (g0 < 0.0 && g1 >= 0.0).then(|| i0 + (i1 - i0) * (-g0) / (g1 - g0))
        })
    }
}

/// `points` evenly spaced current densities on `[i_min, i_max]` A/cm2,
/// returned in A/m2. A single point sits at `i_max`.
pub fn current_grid(i_min: f64, i_max: f64, points: usize) -> Result<Vec<f64>> {
    if points == 0 || !(i_max > 0.0) || !(i_min >= 0.0) || i_min > i_max {
        return Err(ScenarioError::Invalid(format!(
            "bad current grid: {points} points on [{i_min}, {i_max}] A/cm2"
        )));
    }
    if points == 1 {
        return Ok(vec![i_max * A_PER_M2_PER_A_PER_CM2]);
    }
    if i_min == i_max {
        return Err(ScenarioError::Invalid(
            "grid with several points needs i_min < i_max".into(),
        ));
    }
    let h = (i_max - i_min) / (points - 1) as f64;
    Ok((0..points)
        .map(|k| (i_min + k as f64 * h) * A_PER_M2_PER_A_PER_CM2)
        .collect())
}

/// Settle the cell at each current of `i_grid` (A/m2, strictly increasing)
/// and evaluate its voltage. With `warm_start`, each point starts from the
/// previous settled state; otherwise every point starts from the
/// zero-current initial state. Failed or unsettled points are flagged.
pub fn polarization_curve(sim: &Simulation, i_grid: &[f64], warm_start: bool) -> Result<PolarizationCurve> {
    if i_grid.is_empty() {
        return Err(ScenarioError::Invalid("empty current grid".into()));
    }
    if i_grid.iter().any(|i| !(*i >= 0.0) || !i.is_finite()) {
        return Err(ScenarioError::Invalid(
            "currents must be finite and non-negative".into(),
        ));
    }
    if i_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ScenarioError::Invalid("currents must be strictly increasing".into()));
    }
    let y_init = sim.initial_state()?;
    let mut y_prev = y_init.clone();
    let mut curve = PolarizationCurve {
        p_des: sim.oc.p_c_des,
        points: Vec::with_capacity(i_grid.len()),
        stats: StepStats::default(),
    };
    for &i_fc in i_grid {
        let model = sim.model(CurrentProfile::constant(i_fc))?;
        let cfg = sim.integrator_config(&model);
        let start = if warm_start { &y_prev } else { &y_init };
        let point = match steady_state(&model, start, 0.0, &cfg, &sim.steady) {
            Ok(out) => {
                curve.stats.merge(&out.stats);
                let st = StateBlocks::unpack(&out.state, model.layout())?;
                let inputs = VoltageInputs {
                    i_fc,
                    lambda_mem: st.lambda_mem,
                    lambda_ccl: st.lambda_ccl,
                    s_ccl: st.s_ccl,
                    c_h2_acl: st.c_h2_acl,
                    c_o2_ccl: st.c_o2_ccl,
                };
                let (breakdown, error) = match cell_voltage(&inputs, &sim.params, &sim.oc) {
                    Ok(b) => (Some(b), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                y_prev = out.state.clone();
                PolarizationPoint {
                    i_fc,
                    u_cell: breakdown.as_ref().map_or(f64::NAN, |b| b.u_cell),
                    converged: out.converged,
                    settle_time: out.t,
                    residual: out.residual,
                    breakdown,
                    s_ccl: st.s_ccl,
                    state: out.state,
                    error,
                }
            }
            Err(e) => PolarizationPoint {
                i_fc,
                u_cell: f64::NAN,
                converged: false,
                settle_time: e.time().unwrap_or(f64::NAN),
                residual: f64::INFINITY,
                breakdown: None,
                s_ccl: f64::NAN,
                state: Vec::new(),
                error: Some(e.to_string()),
            },
        };
        curve.points.push(point);
    }
    Ok(curve)
}
