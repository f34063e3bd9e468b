use crate::IntegratorError;

/// Absolute tolerance, either shared by all components or given per component.
#[derive(Debug, Clone, PartialEq)]
pub enum AbsTol {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl AbsTol {
    pub fn expand(&self, n: usize) -> Result<Vec<f64>, IntegratorError> {
        let v = match self {
            AbsTol::Scalar(a) => vec![*a; n],
            AbsTol::Vector(v) => {
                if v.len() != n {
                    return Err(IntegratorError::Config(format!(
                        "atol has {} entries, system has {n} states",
                        v.len()
                    )));
                }
                v.clone()
            }
        };
        if v.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(IntegratorError::Config(
                "absolute tolerances must be positive and finite".into(),
            ));
        }
        Ok(v)
    }
}

/// Multistep family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formula {
    /// Numerical differentiation formulas (Klopfenstein-Shampine constants).
    Ndf,
    /// Plain backward differentiation formulas.
    Bdf,
}

/// When the finite-difference Jacobian is recomputed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobianPolicy {
    /// Reuse the Jacobian until the Newton iteration fails to converge.
    OnNewtonFailure,
    /// Recompute at the start of every step attempt.
    EveryStep,
}

#[derive(Debug, Clone)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: AbsTol,
    pub max_order: usize,
    pub formula: Formula,
    pub first_step: Option<f64>,
    pub max_step: f64,
    /// Fixed step size without error control. The order ramps up to
    /// `max_order` and stays there. Intended for convergence studies.
    pub fixed_step: Option<f64>,
    pub jacobian: JacobianPolicy,
    /// Relative perturbation used for finite-difference Jacobian columns.
    pub jac_perturbation: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-6,
            atol: AbsTol::Scalar(1e-9),
            max_order: 5,
            formula: Formula::Ndf,
            first_step: None,
            max_step: f64::INFINITY,
            fixed_step: None,
            jacobian: JacobianPolicy::OnNewtonFailure,
            jac_perturbation: f64::EPSILON.sqrt(),
            max_steps: 5_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), IntegratorError> {
        let bad = |m: &str| Err(IntegratorError::Config(m.to_string()));
        if !(self.rtol > 0.0) || !self.rtol.is_finite() {
            return bad("rtol must be positive and finite");
        }
        if !(1..=5).contains(&self.max_order) {
            return bad("max_order must be between 1 and 5");
        }
        if !(self.max_step > 0.0) {
            return bad("max_step must be positive");
        }
        if let Some(h) = self.first_step {
            if !(h > 0.0) || !h.is_finite() {
                return bad("first_step must be positive and finite");
            }
        }
        if let Some(h) = self.fixed_step {
            if !(h > 0.0) || !h.is_finite() {
                return bad("fixed_step must be positive and finite");
            }
        }
        if !(self.jac_perturbation > 0.0) {
            return bad("jac_perturbation must be positive");
        }
        if let AbsTol::Scalar(a) = self.atol {
            if !(a > 0.0) || !a.is_finite() {
                return bad("atol must be positive and finite");
            }
        }
        Ok(())
    }
}

/// Settings for [`crate::steady_state`].
#[derive(Debug, Clone)]
pub struct SteadyConfig {
    /// Threshold on `max_i |f_i| / (atol_i + rtol |y_i|)`, in units of 1/s.
    pub tol: f64,
    /// Relative weight used by the threshold. `None` reuses the stepper's
    /// `rtol`.
    pub rtol: Option<f64>,
    /// Simulated time the threshold must hold continuously.
    pub dwell: f64,
    pub t_max: f64,
    /// Divergence guard: `|y|_inf` may not exceed this multiple of
    /// `1 + |y0|_inf`.
    pub divergence_factor: f64,
    /// Refine a settled state with Newton iterations on `f(t, y) = 0`. Slow
    /// modes can pass the rate threshold while still far from equilibrium.
    pub polish: bool,
}

impl Default for SteadyConfig {
    fn default() -> Self {
        Self {
            tol: 1.0,
            rtol: None,
            dwell: 5.0,
            t_max: 500.0,
            divergence_factor: 1e8,
            polish: true,
        }
    }
}
