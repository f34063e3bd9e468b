use nalgebra::DVector;

use crate::jacobian::jacobian_fd;
use crate::{Bdf, IntegratorConfig, IntegratorError, OdeSystem, SteadyConfig, StepStats};

/// Returned by output callbacks to stop the integration early.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub stats: StepStats,
}

/// Integrate from `t0` to `t_end`, calling `on_output` at each requested time.
///
/// `output_times` must be sorted and lie in `[t0, t_end]`; values outside are
/// ignored. Returns the final state and the step statistics. On failure the
/// callback has already seen every output time reached before the error.
pub fn integrate_with<S, F>(
    sys: &S,
    y0: &[f64],
    t0: f64,
    t_end: f64,
    cfg: &IntegratorConfig,
    output_times: &[f64],
    mut on_output: F,
) -> Result<(Vec<f64>, StepStats), IntegratorError>
where
    S: OdeSystem + ?Sized,
    F: FnMut(f64, &[f64]) -> Control,
{
    let mut outputs = output_times
        .iter()
        .copied()
        .filter(|t| *t >= t0 && *t <= t_end)
        .peekable();
    while let Some(&t) = outputs.peek() {
        if t > t0 {
            break;
        }
        outputs.next();
        if on_output(t, y0) == Control::Stop {
            return Ok((y0.to_vec(), StepStats::default()));
        }
    }
    if t_end <= t0 {
        return Ok((y0.to_vec(), StepStats::default()));
    }
    let mut stepper = Bdf::new(sys, t0, y0, t_end, cfg.clone())?;
    while !stepper.finished() {
        stepper.step()?;
        while let Some(&t) = outputs.peek() {
            if t > stepper.t() {
                break;
            }
            outputs.next();
            let y = if t == stepper.t() {
                stepper.y().to_vec()
            } else {
                stepper.dense(t)
            };
            if on_output(t, &y) == Control::Stop {
                return Ok((y, stepper.stats().clone()));
            }
        }
    }
    Ok((stepper.y().to_vec(), stepper.stats().clone()))
}

/// Integrate and collect the state at each output time.
pub fn integrate<S: OdeSystem + ?Sized>(
    sys: &S,
    y0: &[f64],
    t0: f64,
    t_end: f64,
    cfg: &IntegratorConfig,
    output_times: &[f64],
) -> Result<Trajectory, IntegratorError> {
    let mut traj = Trajectory::default();
    let (_, stats) = integrate_with(sys, y0, t0, t_end, cfg, output_times, |t, y| {
        traj.times.push(t);
        traj.states.push(y.to_vec());
        Control::Continue
    })?;
    traj.stats = stats;
    Ok(traj)
}

#[derive(Debug, Clone)]
pub struct SteadyOutcome {
    pub state: Vec<f64>,
    pub t: f64,
    pub converged: bool,
    /// Final value of the weighted derivative norm.
    pub residual: f64,
    /// Whether the Newton refinement replaced the integrated state.
    pub polished: bool,
    pub stats: StepStats,
}

/// Integrate until the weighted derivative norm stays below `steady.tol` for
/// `steady.dwell` seconds of simulated time, or until `steady.t_max`. With
/// `steady.polish` the settled state is then refined by Newton iterations on
/// `f(t, y) = 0`; the refinement is dropped unless it converges to an
/// admissible, linearly stable root.
pub fn steady_state<S: OdeSystem + ?Sized>(
    sys: &S,
    y0: &[f64],
    t0: f64,
    cfg: &IntegratorConfig,
    steady: &SteadyConfig,
) -> Result<SteadyOutcome, IntegratorError> {
    let t_end = t0 + steady.t_max;
    let mut stepper = Bdf::new(sys, t0, y0, t_end, cfg.clone())?;
    let n = y0.len();
    let y0_norm = y0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let bound = steady.divergence_factor * (1.0 + y0_norm);
    let mut f = vec![0.0; n];
    let mut below_since: Option<f64> = None;
    let mut residual = f64::INFINITY;
    let rtol = steady.rtol.unwrap_or(cfg.rtol);
    while !stepper.finished() {
        stepper.step()?;
        let t = stepper.t();
        let y = stepper.y();
        let norm = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !norm.is_finite() || norm > bound {
            return Err(IntegratorError::Diverged { t, norm });
        }
        sys.rhs(t, y, &mut f)
            .map_err(|source| IntegratorError::Rhs { t, source })?;
        residual = weighted_rate(&f, y, stepper.atol(), rtol);
        if residual < steady.tol {
            let since = *below_since.get_or_insert(stepper.t_old());
            if t - since >= steady.dwell {
                let mut stats = stepper.stats().clone();
                stats.rhs_evals += 1;
                let mut out = SteadyOutcome {
                    state: y.to_vec(),
                    t,
                    converged: true,
                    residual,
                    polished: false,
                    stats,
                };
                if steady.polish {
                    let (refined, evals) = polish(sys, t, y, stepper.atol(), cfg);
                    out.stats.rhs_evals += evals;
                    if let Some(y) = refined {
                        sys.rhs(t, &y, &mut f)
                            .map_err(|source| IntegratorError::Rhs { t, source })?;
                        out.residual = weighted_rate(&f, &y, stepper.atol(), rtol);
                        out.state = y;
                        out.polished = true;
                    }
                }
                return Ok(out);
            }
        } else {
            below_since = None;
        }
    }
    Ok(SteadyOutcome {
        state: stepper.y().to_vec(),
        t: stepper.t(),
        converged: false,
        residual,
        polished: false,
        stats: stepper.stats().clone(),
    })
}

const POLISH_ITERS: usize = 12;

/// Newton iterations on `f(t, y) = 0` from `y0`, with a fresh
/// finite-difference Jacobian each iteration. Converged when the update is
/// within the integration tolerances. The root is accepted if projection
/// leaves it unchanged, no component of `y0` above its absolute tolerance
/// changes sign, and the Jacobian there has all eigenvalues in the open left
/// half-plane. Returns the accepted root and the right-hand side evaluations
/// spent.
fn polish<S: OdeSystem + ?Sized>(
    sys: &S,
    t: f64,
    y0: &[f64],
    atol: &[f64],
    cfg: &IntegratorConfig,
) -> (Option<Vec<f64>>, usize) {
    let n = y0.len();
    let floor: Vec<f64> = atol.iter().map(|a| a / cfg.rtol).collect();
    let mut y = y0.to_vec();
    let mut f = vec![0.0; n];
    let mut evals = 0;
    let mut converged = false;
    for _ in 0..POLISH_ITERS {
        evals += 1;
        if sys.rhs(t, &y, &mut f).is_err() {
            return (None, evals);
        }
        let Ok((jac, e)) = jacobian_fd(sys, t, &y, &f, &floor, cfg.jac_perturbation) else {
            return (None, evals);
        };
        evals += e;
        let rhs = DVector::from_iterator(n, f.iter().map(|v| -v));
        let Some(dy) = jac.lu().solve(&rhs) else {
            return (None, evals);
        };
        let mut step = 0.0f64;
        for i in 0..n {
            step = step.max(dy[i].abs() / (atol[i] + cfg.rtol * y[i].abs()));
            y[i] += dy[i];
        }
        if !step.is_finite() {
            return (None, evals);
        }
        if step <= 1.0 {
            converged = true;
            break;
        }
    }
    if !converged || sys.project(&mut y.clone()) {
        return (None, evals);
    }
    let flipped = y
        .iter()
        .zip(y0)
        .zip(atol)
        .any(|((a, b), tol)| b.abs() > *tol && a * b < 0.0);
    if flipped {
        return (None, evals);
    }
    evals += 1;
    if sys.rhs(t, &y, &mut f).is_err() {
        return (None, evals);
    }
    let Ok((jac, e)) = jacobian_fd(sys, t, &y, &f, &floor, cfg.jac_perturbation) else {
        return (None, evals);
    };
    evals += e;
    let stable = jac.complex_eigenvalues().iter().all(|l| l.re < 0.0);
    (stable.then_some(y), evals)
}

/// `max_i |f_i| / (atol_i + rtol |y_i|)`.
pub(crate) fn weighted_rate(f: &[f64], y: &[f64], atol: &[f64], rtol: f64) -> f64 {
    f.iter()
        .zip(y)
        .zip(atol)
        .map(|((f, y), a)| f.abs() / (a + rtol * y.abs()))
        .fold(0.0, f64::max)
}
