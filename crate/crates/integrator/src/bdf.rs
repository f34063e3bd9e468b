use nalgebra::{DMatrix, DVector, Dyn, LU};

use crate::{jacobian_fd, rms_norm, Formula, IntegratorConfig, IntegratorError, JacobianPolicy, OdeSystem};

const MAX_ORDER: usize = 5;
const NEWTON_MAXITER: usize = 4;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const NDF_KAPPA: [f64; MAX_ORDER + 1] = [0.0, -0.1850, -1.0 / 9.0, -0.0823, -0.0415, 0.0];

/// Counters accumulated over the life of a stepper.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StepStats {
    pub steps: usize,
    pub rejected: usize,
    pub newton_failures: usize,
    pub rhs_evals: usize,
    pub jac_evals: usize,
    pub lu_decomps: usize,
}

impl StepStats {
    pub fn merge(&mut self, other: &StepStats) {
        self.steps += other.steps;
        self.rejected += other.rejected;
        self.newton_failures += other.newton_failures;
        self.rhs_evals += other.rhs_evals;
        self.jac_evals += other.jac_evals;
        self.lu_decomps += other.lu_decomps;
    }
}

/// Matrix used to rescale the difference array when the step changes by `factor`.
fn compute_r(order: usize, factor: f64) -> DMatrix<f64> {
    let m = order + 1;
    let mut r = DMatrix::zeros(m, m);
    for j in 0..m {
        r[(0, j)] = 1.0;
    }
    for i in 1..m {
        for j in 1..m {
            r[(i, j)] = (i as f64 - 1.0 - factor * j as f64) / i as f64;
        }
    }
    for i in 1..m {
        for j in 0..m {
            r[(i, j)] *= r[(i - 1, j)];
        }
    }
    r
}

fn change_d(d: &mut [Vec<f64>], order: usize, factor: f64) {
    let r = compute_r(order, factor);
    let u = compute_r(order, 1.0);
    let ru = r * u;
    let n = d[0].len();
    let mut out = vec![vec![0.0; n]; order + 1];
    for (i, row) in out.iter_mut().enumerate() {
        for k in 0..=order {
            let c = ru[(k, i)];
            if c != 0.0 {
                for (o, dk) in row.iter_mut().zip(&d[k]) {
                    *o += c * dk;
                }
            }
        }
    }
    for (i, row) in out.into_iter().enumerate() {
        d[i] = row;
    }
}

struct NewtonResult {
    converged: bool,
    iterations: usize,
    y: Vec<f64>,
    d: Vec<f64>,
}

/// Variable-order, quasi-constant step BDF/NDF stepper.
pub struct Bdf<S: OdeSystem> {
    sys: S,
    cfg: IntegratorConfig,
    atol: Vec<f64>,
    jac_floor: Vec<f64>,
    t: f64,
    t_old: f64,
    t_bound: f64,
    y: Vec<f64>,
    h_abs: f64,
    order: usize,
    n_equal_steps: usize,
    d: Vec<Vec<f64>>,
    gamma: [f64; MAX_ORDER + 1],
    alpha: [f64; MAX_ORDER + 1],
    error_const: [f64; MAX_ORDER + 1],
    jac: DMatrix<f64>,
    lu: Option<LU<f64, Dyn, Dyn>>,
    newton_tol: f64,
    stats: StepStats,
    last_failure: String,
}

impl<S: OdeSystem> Bdf<S> {
    pub fn new(sys: S, t0: f64, y0: &[f64], t_bound: f64, cfg: IntegratorConfig) -> Result<Self, IntegratorError> {
        cfg.validate()?;
        let n = sys.dim();
        if y0.len() != n {
            return Err(IntegratorError::Config(format!(
                "initial state has {} entries, system has {n}",
                y0.len()
            )));
        }
        if !(t_bound > t0) {
            return Err(IntegratorError::Config(format!(
                "t_bound ({t_bound}) must exceed t0 ({t0})"
            )));
        }
        let atol = cfg.atol.expand(n)?;
        let jac_floor: Vec<f64> = atol.iter().map(|a| a / cfg.rtol).collect();
        let mut stats = StepStats::default();

        let mut f0 = vec![0.0; n];
        sys.rhs(t0, y0, &mut f0)
            .map_err(|source| IntegratorError::Rhs { t: t0, source })?;
        stats.rhs_evals += 1;
        if let Some(i) = f0.iter().position(|v| !v.is_finite()) {
            return Err(IntegratorError::NonFinite {
                t: t0,
                index: i,
                name: sys.state_name(i),
            });
        }

        let kappa = match cfg.formula {
            Formula::Ndf => NDF_KAPPA,
            Formula::Bdf => [0.0; MAX_ORDER + 1],
        };
        let mut gamma = [0.0; MAX_ORDER + 1];
        for k in 1..=MAX_ORDER {
            gamma[k] = gamma[k - 1] + 1.0 / k as f64;
        }
        let mut alpha = [0.0; MAX_ORDER + 1];
        let mut error_const = [0.0; MAX_ORDER + 1];
        for k in 0..=MAX_ORDER {
            alpha[k] = (1.0 - kappa[k]) * gamma[k];
            error_const[k] = kappa[k] * gamma[k] + 1.0 / (k as f64 + 1.0);
        }

        let mut h_abs = match (cfg.fixed_step, cfg.first_step) {
            (Some(h), _) => h,
            (None, Some(h)) => h,
            (None, None) => select_initial_step(&sys, t0, y0, t_bound, &f0, &atol, cfg.rtol, &mut stats),
        };
        h_abs = h_abs.min(cfg.max_step);

        let mut d = vec![vec![0.0; n]; MAX_ORDER + 3];
        d[0].copy_from_slice(y0);
        for (di, fi) in d[1].iter_mut().zip(&f0) {
            *di = fi * h_abs;
        }

        let (jac, evals) = jacobian_fd(&sys, t0, y0, &f0, &jac_floor, cfg.jac_perturbation)?;
        stats.rhs_evals += evals;
        stats.jac_evals += 1;

        let eps = f64::EPSILON;
        let newton_tol = (10.0 * eps / cfg.rtol).max(0.03f64.min(cfg.rtol.sqrt()));

        Ok(Self {
            sys,
            cfg,
            atol,
            jac_floor,
            t: t0,
            t_old: t0,
            t_bound,
            y: y0.to_vec(),
            h_abs,
            order: 1,
            n_equal_steps: 0,
            d,
            gamma,
            alpha,
            error_const,
            jac,
            lu: None,
            newton_tol,
            stats,
            last_failure: String::new(),
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn t_old(&self) -> f64 {
        self.t_old
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn step_size(&self) -> f64 {
        self.h_abs
    }

    pub fn stats(&self) -> &StepStats {
        &self.stats
    }

    pub fn system(&self) -> &S {
        &self.sys
    }

    pub fn atol(&self) -> &[f64] {
        &self.atol
    }

    pub fn rtol(&self) -> f64 {
        self.cfg.rtol
    }

    pub fn finished(&self) -> bool {
        self.t >= self.t_bound
    }

    fn scale(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .zip(&self.atol)
            .map(|(v, a)| a + self.cfg.rtol * v.abs())
            .collect()
    }

    fn factorize(&mut self, c: f64) {
        let n = self.y.len();
        let m = DMatrix::identity(n, n) - &self.jac * c;
        self.lu = Some(m.lu());
        self.stats.lu_decomps += 1;
    }

    fn refresh_jacobian(&mut self, t: f64, y: &[f64]) -> Result<(), String> {
        let n = y.len();
        let mut f0 = vec![0.0; n];
        self.sys
            .rhs(t, y, &mut f0)
            .map_err(|e| format!("rhs failed during Jacobian update: {e}"))?;
        self.stats.rhs_evals += 1;
        let (jac, evals) =
            jacobian_fd(&self.sys, t, y, &f0, &self.jac_floor, self.cfg.jac_perturbation).map_err(|e| e.to_string())?;
        self.stats.rhs_evals += evals;
        self.stats.jac_evals += 1;
        self.jac = jac;
        Ok(())
    }

    fn solve_system(&mut self, t_new: f64, y_predict: &[f64], c: f64, psi: &[f64], scale: &[f64]) -> NewtonResult {
        let n = y_predict.len();
        let mut d = vec![0.0; n];
        let mut y = y_predict.to_vec();
        let mut f = vec![0.0; n];
        let mut dy_norm_old: Option<f64> = None;
        let mut converged = false;
        let mut k = 0;
        while k < NEWTON_MAXITER {
            self.stats.rhs_evals += 1;
            if let Err(e) = self.sys.rhs(t_new, &y, &mut f) {
                self.last_failure = e.message;
                break;
            }
            if let Some(i) = f.iter().position(|v| !v.is_finite()) {
                self.last_failure = format!("non-finite derivative for {}", self.sys.state_name(i));
                break;
            }
            let mut b = DVector::from_iterator(n, (0..n).map(|i| c * f[i] - psi[i] - d[i]));
            let lu = self.lu.as_ref().expect("factorization present");
            if !lu.solve_mut(&mut b) {
                self.last_failure = "singular iteration matrix".into();
                break;
            }
            let dy = b.as_slice();
            let dy_norm = rms_norm(dy, scale);
            if !dy_norm.is_finite() {
                self.last_failure = "non-finite Newton update".into();
                break;
            }
            let rate = dy_norm_old.map(|old| dy_norm / old);
            if let Some(r) = rate {
                if r >= 1.0 || r.powi((NEWTON_MAXITER - k) as i32) / (1.0 - r) * dy_norm > self.newton_tol {
                    self.last_failure = "Newton iteration diverging".into();
                    break;
                }
            }
            for i in 0..n {
                y[i] += dy[i];
                d[i] += dy[i];
            }
            if dy_norm == 0.0 || matches!(rate, Some(r) if r / (1.0 - r) * dy_norm < self.newton_tol) {
                converged = true;
                break;
            }
            dy_norm_old = Some(dy_norm);
            k += 1;
        }
        if !converged && self.last_failure.is_empty() {
            self.last_failure = "Newton iteration did not converge".into();
        }
        NewtonResult {
            converged,
            iterations: (k + 1).min(NEWTON_MAXITER),
            y,
            d,
        }
    }

    fn too_small(&self, h: f64) -> IntegratorError {
        IntegratorError::StepSizeTooSmall {
            t: self.t,
            h,
            reason: if self.last_failure.is_empty() {
                "error test".into()
            } else {
                self.last_failure.clone()
            },
            state: self.y.clone(),
        }
    }

    /// Advance by one accepted step.
    pub fn step(&mut self) -> Result<(), IntegratorError> {
        if self.finished() {
            return Ok(());
        }
        if self.stats.steps >= self.cfg.max_steps {
            return Err(IntegratorError::MaxSteps(self.cfg.max_steps));
        }
        let fixed = self.cfg.fixed_step.is_some();
        let t = self.t;
        let n = self.y.len();
        let min_step = 10.0 * (t.abs() * f64::EPSILON).max(f64::MIN_POSITIVE);
        let max_step = self.cfg.max_step;

        if self.h_abs > max_step {
            let factor = max_step / self.h_abs;
            change_d(&mut self.d, self.order, factor);
            self.h_abs = max_step;
            self.n_equal_steps = 0;
            self.lu = None;
        } else if self.h_abs < min_step {
            let factor = min_step / self.h_abs;
            change_d(&mut self.d, self.order, factor);
            self.h_abs = min_step;
            self.n_equal_steps = 0;
            self.lu = None;
        }

        self.last_failure.clear();
        let mut current_jac = false;
        let order = self.order;
        let (t_new, y_new, d_new, error_norm_acc, safety_acc, scale_acc) = loop {
            let mut h_abs = self.h_abs;
            if h_abs < min_step {
                return Err(self.too_small(h_abs));
            }
            let mut t_new = t + h_abs;
            if t_new >= self.t_bound || (self.t_bound - t_new) < min_step.max(1e-9 * h_abs) {
                t_new = self.t_bound;
                change_d(&mut self.d, order, (t_new - t) / h_abs);
                self.n_equal_steps = 0;
                self.lu = None;
            }
            let h = t_new - t;
            h_abs = h;
            self.h_abs = h_abs;

            let mut y_predict = vec![0.0; n];
            for row in &self.d[..=order] {
                for (p, v) in y_predict.iter_mut().zip(row) {
                    *p += v;
                }
            }
            let scale = self.scale(&y_predict);
            let mut psi = vec![0.0; n];
            for k in 1..=order {
                let g = self.gamma[k];
                for (p, v) in psi.iter_mut().zip(&self.d[k]) {
                    *p += v * g;
                }
            }
            let a = self.alpha[order];
            for p in psi.iter_mut() {
                *p /= a;
            }
            let c = h / a;

            if self.cfg.jacobian == JacobianPolicy::EveryStep && !current_jac {
                match self.refresh_jacobian(t_new, &y_predict) {
                    Ok(()) => {
                        current_jac = true;
                        self.lu = None;
                    }
                    Err(msg) => self.last_failure = msg,
                }
            }

            let result = loop {
                if self.lu.is_none() {
                    self.factorize(c);
                }
                let res = self.solve_system(t_new, &y_predict, c, &psi, &scale);
                if res.converged || current_jac {
                    break res;
                }
                current_jac = true;
                self.lu = None;
                if let Err(msg) = self.refresh_jacobian(t_new, &y_predict) {
                    self.last_failure = msg;
                    break res;
                }
            };

            if !result.converged {
                self.stats.newton_failures += 1;
                self.stats.rejected += 1;
                if fixed {
                    return Err(self.too_small(h_abs));
                }
                let factor = 0.5;
                self.h_abs *= factor;
                change_d(&mut self.d, order, factor);
                self.n_equal_steps = 0;
                self.lu = None;
                continue;
            }

            let safety = 0.9 * (2 * NEWTON_MAXITER + 1) as f64 / (2 * NEWTON_MAXITER + result.iterations) as f64;
            let scale = self.scale(&result.y);
            let ec = self.error_const[order];
            let err: Vec<f64> = result.d.iter().map(|v| ec * v).collect();
            let error_norm = rms_norm(&err, &scale);

            if error_norm > 1.0 && !fixed {
                self.stats.rejected += 1;
                self.last_failure = format!("error test failed (norm {error_norm:.3e})");
                let factor = MIN_FACTOR.max(safety * error_norm.powf(-1.0 / (order as f64 + 1.0)));
                self.h_abs *= factor;
                change_d(&mut self.d, order, factor);
                self.n_equal_steps = 0;
                self.lu = None;
                continue;
            }
            break (t_new, result.y, result.d, error_norm, safety, scale);
        };

        self.stats.steps += 1;
        self.n_equal_steps += 1;
        self.t_old = t;
        self.t = t_new;
        self.y = y_new;

        let d = &mut self.d;
        for i in 0..n {
            d[order + 2][i] = d_new[i] - d[order + 1][i];
            d[order + 1][i] = d_new[i];
        }
        for k in (0..=order).rev() {
            for i in 0..n {
                let next = d[k + 1][i];
                d[k][i] += next;
            }
        }

        if self.sys.project(&mut self.y) {
            self.d[0].copy_from_slice(&self.y);
        }

        if self.n_equal_steps < order + 1 {
            return Ok(());
        }

        if fixed {
            if order < self.cfg.max_order {
                self.order += 1;
                self.n_equal_steps = 0;
            }
            return Ok(());
        }

        let error_m_norm = if order > 1 {
            let ec = self.error_const[order - 1];
            let e: Vec<f64> = self.d[order].iter().map(|v| ec * v).collect();
            rms_norm(&e, &scale_acc)
        } else {
            f64::INFINITY
        };
        let error_p_norm = if order < self.cfg.max_order {
            let ec = self.error_const[order + 1];
            let e: Vec<f64> = self.d[order + 2].iter().map(|v| ec * v).collect();
            rms_norm(&e, &scale_acc)
        } else {
            f64::INFINITY
        };
        let norms = [error_m_norm, error_norm_acc, error_p_norm];
        let mut best = 1;
        let mut best_factor = f64::NEG_INFINITY;
        for (i, nrm) in norms.iter().enumerate() {
            let p = order as f64 + i as f64;
            let factor = if *nrm == 0.0 { f64::INFINITY } else { nrm.powf(-1.0 / p) };
            // Orders outside the allowed range have infinite norm and factor 0.
            if factor > best_factor {
                best_factor = factor;
                best = i;
            }
        }
        self.order = order + best - 1;
        let factor = MAX_FACTOR.min(safety_acc * best_factor);
        self.h_abs *= factor;
        change_d(&mut self.d, self.order, factor);
        self.n_equal_steps = 0;
        self.lu = None;
        Ok(())
    }

    /// Interpolate the solution on `[t_old, t]` of the last accepted step.
    pub fn dense(&self, t_eval: f64) -> Vec<f64> {
        let n = self.y.len();
        let order = self.order;
        let h = self.h_abs;
        let mut out = self.d[0].clone();
        let mut p = 1.0;
        for k in 0..order {
            let t_shift = self.t - h * k as f64;
            let denom = h * (1 + k) as f64;
            p *= (t_eval - t_shift) / denom;
            for i in 0..n {
                out[i] += self.d[k + 1][i] * p;
            }
        }
        out
    }
}

#[allow(clippy::too_many_arguments)]
fn select_initial_step<S: OdeSystem>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    t_bound: f64,
    f0: &[f64],
    atol: &[f64],
    rtol: f64,
    stats: &mut StepStats,
) -> f64 {
    let interval = t_bound - t0;
    let scale: Vec<f64> = y0.iter().zip(atol).map(|(y, a)| a + y.abs() * rtol).collect();
    let d0 = rms_norm(y0, &scale);
    let d1 = rms_norm(f0, &scale);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(interval);
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + h0 * f).collect();
    let mut f1 = vec![0.0; y0.len()];
    stats.rhs_evals += 1;
    if sys.rhs(t0 + h0, &y1, &mut f1).is_err() {
        return h0 * 1e-3;
    }
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms_norm(&diff, &scale) / h0;
    if !d2.is_finite() {
        return h0 * 1e-3;
    }
    let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
        1e-6f64.max(h0 * 1e-3)
    } else {
        (0.01 / d1.max(d2)).powf(0.5)
    };
    (100.0 * h0).min(h1).min(interval)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_factor_rescaling_is_identity() {
        for order in 1..=5 {
            let u = compute_r(order, 1.0);
            let uu = &u * &u;
            for i in 0..=order {
                for j in 0..=order {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((uu[(i, j)] - expect).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn rescaling_matches_polynomial_resampling() {
        // y(t) = t^2 sampled backwards from t = 1 with spacing h is exactly
        // represented by three backward differences.
        let h = 0.1;
        let y = |t: f64| t * t;
        let bd = |h: f64| {
            let y0 = y(1.0);
            let y1 = y(1.0 - h);
            let y2 = y(1.0 - 2.0 * h);
            vec![vec![y0], vec![y0 - y1], vec![y0 - 2.0 * y1 + y2]]
        };
        let mut d = bd(h);
        change_d(&mut d, 2, 0.5);
        let expect = bd(0.05);
        for k in 0..3 {
            assert!((d[k][0] - expect[k][0]).abs() < 1e-14, "{k}");
        }
    }
}
