//! Fitting the undetermined parameters to measured polarization curves with
//! a seeded differential evolution search.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use pemfc_core::profile::A_PER_M2_PER_A_PER_CM2;
use pemfc_core::{OperatingConditions, ParameterSet};

use crate::curves::{relative_deviations, CurveSample};
use crate::error::{Result, ScenarioError};
use crate::polarization::polarization_curve;
use crate::setup::Simulation;

/// Parameters the search may adjust.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FreeParameter {
    I0CRef,
    KappaCo,
    KappaC,
    Tau,
    EpsMc,
    RE,
    E,
    EpsC,
    EpsGdl,
    ASlim,
    BSlim,
    ASwitch,
}

impl FreeParameter {
    pub const ALL: [FreeParameter; 12] = [
        Self::I0CRef,
        Self::KappaCo,
        Self::KappaC,
        Self::Tau,
        Self::EpsMc,
        Self::RE,
        Self::E,
        Self::EpsC,
        Self::EpsGdl,
        Self::ASlim,
        Self::BSlim,
        Self::ASwitch,
    ];

    /// Name used in configuration files.
    pub fn name(self) -> &'static str {
        match self {
            Self::I0CRef => "i0_c_ref",
            Self::KappaCo => "kappa_co",
            Self::KappaC => "kappa_c",
            Self::Tau => "tau",
            Self::EpsMc => "eps_mc",
            Self::RE => "R_e",
            Self::E => "e",
            Self::EpsC => "eps_c",
            Self::EpsGdl => "eps_gdl",
            Self::ASlim => "a_slim",
            Self::BSlim => "b_slim",
            Self::ASwitch => "a_switch",
        }
    }

    /// Configuration section holding the parameter.
    pub fn section(self) -> &'static str {
        match self {
            Self::I0CRef | Self::KappaCo | Self::KappaC => "kinetics",
            Self::Tau | Self::EpsMc => "membrane",
            Self::RE | Self::ASlim | Self::BSlim | Self::ASwitch => "voltage",
            Self::E | Self::EpsC | Self::EpsGdl => "porous",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    pub fn get(self, p: &ParameterSet) -> f64 {
        match self {
            Self::I0CRef => p.kinetics.i0_c_ref,
            Self::KappaCo => p.kinetics.kappa_co,
            Self::KappaC => p.kinetics.kappa_c,
            Self::Tau => p.membrane.tau,
            Self::EpsMc => p.membrane.eps_mc,
            Self::RE => p.voltage.r_e,
            Self::E => p.porous.e,
            Self::EpsC => p.porous.eps_c,
            Self::EpsGdl => p.porous.eps_gdl,
            Self::ASlim => p.voltage.a_slim,
            Self::BSlim => p.voltage.b_slim,
            Self::ASwitch => p.voltage.a_switch,
        }
    }

    pub fn set(self, p: &mut ParameterSet, v: f64) {
        match self {
            Self::I0CRef => p.kinetics.i0_c_ref = v,
            Self::KappaCo => p.kinetics.kappa_co = v,
            Self::KappaC => p.kinetics.kappa_c = v,
            Self::Tau => p.membrane.tau = v,
            Self::EpsMc => p.membrane.eps_mc = v,
            Self::RE => p.voltage.r_e = v,
            Self::E => p.porous.e = v,
            Self::EpsC => p.porous.eps_c = v,
            Self::EpsGdl => p.porous.eps_gdl = v,
            Self::ASlim => p.voltage.a_slim = v,
            Self::BSlim => p.voltage.b_slim = v,
            Self::ASwitch => p.voltage.a_switch = v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub param: FreeParameter,
    pub lo: f64,
    pub hi: f64,
}

/// Default search box for every free parameter around the EH-31 values.
pub fn default_bounds() -> Vec<Bound> {
    use FreeParameter::*;
    [
        (I0CRef, 0.5, 10.0),
        (KappaCo, 1.0, 40.0),
        (KappaC, 0.5, 2.5),
        (Tau, 1.0, 4.0),
        (EpsMc, 0.15, 0.4),
        (RE, 1e-7, 1e-6),
        (E, 3.0, 5.0),
        (EpsC, 0.15, 0.3),
        (EpsGdl, 0.55, 0.8),
        (ASlim, 0.0, 0.2),
        (BSlim, 0.05, 0.4),
        (ASwitch, 0.4, 0.95),
    ]
    .into_iter()
    .map(|(param, lo, hi)| Bound { param, lo, hi })
    .collect()
}

/// Measured curve at one operating point.
#[derive(Debug, Clone)]
pub struct ExperimentalCurve {
    pub oc: OperatingConditions,
    pub samples: Vec<CurveSample>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Objective {
    /// Largest ΔU_max over the curves, in percent.
    MaxDeviation,
    /// Mean squared relative deviation over every point, in percent squared.
    MeanSquared,
}

#[derive(Debug, Clone)]
pub struct CalibrationProblem {
    /// Parameters, discretization and settling criteria of every evaluation.
    /// Its operating conditions are replaced by each curve's.
    pub base: Simulation,
    pub bounds: Vec<Bound>,
    pub curves: Vec<ExperimentalCurve>,
    pub objective: Objective,
}

/// Differential evolution mutation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    /// `x_a + F (x_b - x_c)`.
    Rand1Bin,
    /// `x_i + F (x_best - x_i) + F (x_a - x_b)`.
    CurrentToBest1Bin,
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub strategy: Strategy,
    pub population: usize,
    /// Maximum number of objective evaluations.
    pub budget: usize,
    pub seed: u64,
    /// Differential weight. Each generation draws it uniformly from
    /// `[f/2, f]` (dither).
    pub f: f64,
    /// Crossover probability.
    pub cr: f64,
    /// Stop once the best objective falls below this value.
    pub target: Option<f64>,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::CurrentToBest1Bin,
            population: 24,
            budget: 2400,
            seed: 0,
            f: 0.8,
            cr: 0.9,
            target: None,
            workers: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    /// Best values, in bound order, as `(name, value)`.
    pub best: Vec<(String, f64)>,
    pub objective: f64,
    pub objective_kind: Objective,
    /// Best objective after the initial population and after each generation.
    pub trace: Vec<f64>,
    pub evaluations: usize,
    pub budget_exhausted: bool,
    pub seed: u64,
}

impl CalibrationProblem {
    pub fn validate(&self) -> Result<()> {
        if self.curves.len() < 2 {
            return Err(ScenarioError::Invalid(format!(
                "calibration needs at least two curves, got {}",
                self.curves.len()
            )));
        }
        if self.bounds.is_empty() {
            return Err(ScenarioError::Invalid("no free parameters".into()));
        }
        for (k, b) in self.bounds.iter().enumerate() {
            if !b.lo.is_finite() || !b.hi.is_finite() || !(b.lo < b.hi) {
                return Err(ScenarioError::Invalid(format!(
                    "bound for {} must be finite with lo < hi, got [{}, {}]",
                    b.param.name(),
                    b.lo,
                    b.hi
                )));
            }
            if self.bounds[..k].iter().any(|o| o.param == b.param) {
                return Err(ScenarioError::Invalid(format!("{} bounded twice", b.param.name())));
            }
        }
        for c in &self.curves {
            if c.samples.is_empty() {
                return Err(ScenarioError::Invalid("empty experimental curve".into()));
            }
        }
        Ok(())
    }

    /// Base parameters with `x` substituted in bound order.
    pub fn parameters(&self, x: &[f64]) -> ParameterSet {
        let mut p = self.base.params.clone();
        for (b, v) in self.bounds.iter().zip(x) {
            b.param.set(&mut p, *v);
        }
        p
    }

    /// Objective at a full parameter set. Infinite when a curve cannot be
    /// simulated or shares no converged points with its measurement.
    pub fn evaluate_params(&self, params: &ParameterSet) -> f64 {
        let mut worst: f64 = 0.0;
        let mut sq = 0.0;
        let mut count = 0usize;
        for c in &self.curves {
            let mut sim = self.base.clone();
            sim.params = params.clone();
            sim.oc = c.oc.clone();
            let grid: Vec<f64> = c.samples.iter().map(|s| s.i_fc * A_PER_M2_PER_A_PER_CM2).collect();
            let Ok(curve) = polarization_curve(&sim, &grid, true) else {
                return f64::INFINITY;
            };
            let Ok(dev) = relative_deviations(&curve.samples(), &c.samples) else {
                return f64::INFINITY;
            };
            if dev.len() < c.samples.len() {
                return f64::INFINITY;
            }
            worst = dev.iter().copied().fold(worst, f64::max);
            sq += dev.iter().map(|d| d * d).sum::<f64>();
            count += dev.len();
        }
        match self.objective {
            Objective::MaxDeviation => worst,
            Objective::MeanSquared => sq / count as f64,
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.evaluate_params(&self.parameters(x))
    }
}

/// Minimize the problem objective inside its bounds with differential
/// evolution. The trace is a function of the seed only: trial vectors are drawn sequentially and evaluated in
/// parallel.
pub fn calibrate(problem: &CalibrationProblem, cfg: &SearchConfig) -> Result<CalibrationReport> {
    problem.validate()?;
    if cfg.population < 4 {
        return Err(ScenarioError::Invalid("population must be at least 4".into()));
    }
    if cfg.budget < cfg.population {
        return Err(ScenarioError::Invalid(
            "budget must cover the initial population".into(),
        ));
    }
    if !(cfg.f > 0.0 && cfg.f <= 2.0) || !(0.0..=1.0).contains(&cfg.cr) {
        return Err(ScenarioError::Invalid("DE weights out of range".into()));
    }
    match cfg.workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
            pool.install(|| search(problem, cfg))
        }
        None => search(problem, cfg),
    }
}

fn search(problem: &CalibrationProblem, cfg: &SearchConfig) -> Result<CalibrationReport> {
    let dim = problem.bounds.len();
    let np = cfg.population;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let lo: Vec<f64> = problem.bounds.iter().map(|b| b.lo).collect();
    let hi: Vec<f64> = problem.bounds.iter().map(|b| b.hi).collect();

    let mut pop: Vec<Vec<f64>> = (0..np)
        .map(|_| (0..dim).map(|j| rng.gen_range(lo[j]..hi[j])).collect())
        .collect();
    let mut fit: Vec<f64> = pop.par_iter().map(|x| problem.evaluate(x)).collect();
    let mut evaluations = np;
    let mut trace = vec![best_of(&fit).1];

    let reached = |v: f64| cfg.target.is_some_and(|t| v < t);
    while evaluations + np <= cfg.budget && !reached(*trace.last().unwrap()) {
        let f = rng.gen_range(0.5 * cfg.f..=cfg.f);
        let best = best_of(&fit).0;
        let trials: Vec<Vec<f64>> = (0..np)
            .map(|i| {
                let (a, b, c) = distinct_three(&mut rng, np, i);
                let j_rand = rng.gen_range(0..dim);
                (0..dim)
                    .map(|j| {
                        if j == j_rand || rng.gen::<f64>() < cfg.cr {
                            let v = match cfg.strategy {
                                Strategy::Rand1Bin => pop[a][j] + f * (pop[b][j] - pop[c][j]),
                                Strategy::CurrentToBest1Bin => {
                                    pop[i][j] + f * (pop[best][j] - pop[i][j]) + f * (pop[a][j] - pop[b][j])
                                }
                            };
                            reflect(v, lo[j], hi[j])
                        } else {
                            pop[i][j]
                        }
                    })
                    .collect()
            })
            .collect();
        let trial_fit: Vec<f64> = trials.par_iter().map(|x| problem.evaluate(x)).collect();
        evaluations += np;
        for (i, (x, f)) in trials.into_iter().zip(trial_fit).enumerate() {
            if f <= fit[i] {
                pop[i] = x;
                fit[i] = f;
            }
        }
        trace.push(best_of(&fit).1);
    }
    let (k, best) = best_of(&fit);
    Ok(CalibrationReport {
        best: problem
            .bounds
            .iter()
            .zip(&pop[k])
            .map(|(b, v)| (b.param.name().to_string(), *v))
            .collect(),
        objective: best,
        objective_kind: problem.objective,
        trace,
        evaluations,
        budget_exhausted: !reached(best),
        seed: cfg.seed,
    })
}

fn best_of(fit: &[f64]) -> (usize, f64) {
    fit.iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &f)| if f < acc.1 { (i, f) } else { acc })
}

fn distinct_three(rng: &mut ChaCha8Rng, np: usize, exclude: usize) -> (usize, usize, usize) {
    let mut pick = |taken: &[usize]| loop {
        let r = rng.gen_range(0..np);
        if !taken.contains(&r) {
            return r;
        }
    };
    let a = pick(&[exclude]);
    let b = pick(&[exclude, a]);
    let c = pick(&[exclude, a, b]);
    (a, b, c)
}

/// Fold a value that left `[lo, hi]` back inside by reflection.
fn reflect(v: f64, lo: f64, hi: f64) -> f64 {
    let w = hi - lo;
    let mut u = (v - lo) % (2.0 * w);
    if u < 0.0 {
        u += 2.0 * w;
    }
    if u > w {
        u = 2.0 * w - u;
    }
    lo + u
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for p in FreeParameter::ALL {
            assert_eq!(FreeParameter::from_name(p.name()), Some(p));
        }
    }

    #[test]
    fn set_then_get() {
        let mut p = ParameterSet::eh31();
        for (k, f) in FreeParameter::ALL.into_iter().enumerate() {
            f.set(&mut p, k as f64 + 0.5);
            assert_eq!(f.get(&p), k as f64 + 0.5);
        }
    }

    #[test]
    fn default_bounds_contain_eh31() {
        let p = ParameterSet::eh31();
        for b in default_bounds() {
            let v = b.param.get(&p);
            assert!(b.lo <= v && v <= b.hi, "{} = {v}", b.param.name());
        }
    }

    #[test]
    fn reflection_stays_inside() {
        assert_eq!(reflect(1.5, 0.0, 1.0), 0.5);
        assert_eq!(reflect(-0.25, 0.0, 1.0), 0.25);
        assert_eq!(reflect(0.3, 0.0, 1.0), 0.3);
        assert!((reflect(3.2, 0.0, 1.0) - 0.8).abs() < 1e-12);
    }

    #[test]
    fn distinct_indices() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for i in 0..50 {
            let (a, b, c) = distinct_three(&mut rng, 5, i % 5);
            let all = [a, b, c, i % 5];
            for x in 0..4 {
                for y in x + 1..4 {
                    assert_ne!(all[x], all[y]);
                }
            }
        }
    }

    fn toy_problem() -> CalibrationProblem {
        let c = ExperimentalCurve {
            oc: OperatingConditions::eh31(2e5),
            samples: vec![CurveSample { i_fc: 0.5, u_cell: 0.8 }],
        };
        CalibrationProblem {
            base: Simulation::eh31(2e5).with_n_gdl(Some(2)),
            bounds: default_bounds(),
            curves: vec![c],
            objective: Objective::MaxDeviation,
        }
    }

    #[test]
    fn needs_two_curves() {
        let p = toy_problem();
        assert!(calibrate(&p, &SearchConfig::default()).is_err());
    }

    #[test]
    fn rejects_inverted_bounds() {
        let mut p = toy_problem();
        p.curves.push(p.curves[0].clone());
        p.bounds[0].hi = p.bounds[0].lo;
        assert!(p.validate().is_err());
    }
}
