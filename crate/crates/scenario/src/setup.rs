//! Model, tolerances and settling criteria shared by every scenario.

use pemfc_core::{
    initialize_state, CurrentProfile, DiscretizationLayout, FuelCellModel, ModelConfig, ModelOptions,
    OperatingConditions, ParameterSet,
};
use pemfc_integrator::{AbsTol, IntegratorConfig, SteadyConfig};

use crate::error::Result;

/// Relative weight of the settling check. The anode loop has no purge, so its
/// manifold humidities relax over several hundred seconds and a check at the
/// integration `rtol` would not settle within the waiting time.
pub const STEADY_RTOL: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct Simulation {
    pub params: ParameterSet,
    pub oc: OperatingConditions,
    pub n_gdl: Option<usize>,
    pub rtol: f64,
    pub steady: SteadyConfig,
    pub options: ModelOptions,
}

pub fn default_steady() -> SteadyConfig {
    SteadyConfig {
        rtol: Some(STEADY_RTOL),
        ..SteadyConfig::default()
    }
}

impl Simulation {
    pub fn new(params: ParameterSet, oc: OperatingConditions) -> Self {
        Self {
            params,
            oc,
            n_gdl: None,
            rtol: 1e-6,
            steady: default_steady(),
            options: ModelOptions::default(),
        }
    }

    pub fn eh31(p_des: f64) -> Self {
        Self::new(ParameterSet::eh31(), OperatingConditions::eh31(p_des))
    }

    pub fn from_config(cfg: &ModelConfig) -> Self {
        let mut s = Self::new(cfg.params(), cfg.operating.clone());
        s.n_gdl = cfg.numerics.n_gdl;
        s
    }

    pub fn with_n_gdl(mut self, n: Option<usize>) -> Self {
        self.n_gdl = n;
        self
    }

    /// Same settings at another desired pressure, applied to both sides.
    pub fn at_pressure(&self, p_des: f64) -> Self {
        let mut s = self.clone();
        s.oc.p_a_des = p_des;
        s.oc.p_c_des = p_des;
        s
    }

    /// Settings under which the zero-current initial state is an exact
    /// equilibrium: no crossover, both desired pressures at ambient and equal
    /// desired humidities.
    pub fn at_rest(&self) -> Self {
        let mut s = self.clone();
        s.params.kinetics.kappa_co = 0.0;
        s.oc.p_a_des = s.params.ambient.p_ext;
        s.oc.p_c_des = s.params.ambient.p_ext;
        let phi = 0.5 * (s.oc.phi_a_des + s.oc.phi_c_des);
        s.oc.phi_a_des = phi;
        s.oc.phi_c_des = phi;
        s
    }

    pub fn layout(&self) -> Result<DiscretizationLayout> {
        Ok(DiscretizationLayout::build(&self.params, self.n_gdl)?)
    }

    pub fn model(&self, profile: CurrentProfile) -> Result<FuelCellModel> {
        Ok(FuelCellModel::new(
            self.params.clone(),
            self.oc.clone(),
            self.layout()?,
            profile,
            self.options,
        )?)
    }

    pub fn initial_state(&self) -> Result<Vec<f64>> {
        Ok(initialize_state(&self.params, &self.oc, &self.layout()?)?)
    }

    pub fn integrator_config(&self, model: &FuelCellModel) -> IntegratorConfig {
        IntegratorConfig {
            rtol: self.rtol,
            atol: AbsTol::Vector(model.absolute_tolerances()),
            ..IntegratorConfig::default()
        }
    }
}
