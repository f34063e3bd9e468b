//! The assembled cell and auxiliaries as one ODE system.

use pemfc_integrator::{OdeSystem, RhsError};

use crate::bop::{assemble_bop_rhs, channel_flows, compute_bop_flows, BopContext, BopFlows, ChannelState};
use crate::error::{ModelError, Result};
use crate::layout::{BopSlot, DiscretizationLayout, Quantity, StateBlocks};
use crate::mea::{assemble_mea_rhs, ChannelFlows, Electrodes, MeaGeometry, MeaTerms};
use crate::params::{OperatingConditions, ParameterSet};
use crate::profile::CurrentProfile;
use crate::transport::{
    binary_diffusivity_unchecked, effective_factor, intrinsic_permeability, membrane_permeation,
    saturation_concentration, sherwood_number, surface_tension, Gas, Side,
};
use crate::voltage::{crossover_from_permeability, CrossoverCurrents};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ModelOptions {
    /// Close the gas channels: no inlet or outlet flow and frozen
    /// auxiliaries. Used for conservation checks.
    pub sealed: bool,
}

/// Everything computed during one right-hand-side evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub i_fc: f64,
    pub crossover: CrossoverCurrents,
    pub gc: ChannelState,
    pub bop: BopFlows,
    pub mea: MeaTerms,
    pub dp_cgc_dt: f64,
    pub dydt: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct FuelCellModel {
    params: ParameterSet,
    oc: OperatingConditions,
    layout: DiscretizationLayout,
    options: ModelOptions,
    profile: CurrentProfile,
    geometry: MeaGeometry,
    ctx: BopContext,
}

impl FuelCellModel {
    pub fn new(
        params: ParameterSet,
        oc: OperatingConditions,
        layout: DiscretizationLayout,
        profile: CurrentProfile,
        options: ModelOptions,
    ) -> Result<Self> {
        params.validate()?;
        oc.validate(&params)?;
        let geometry = mea_geometry(&params, &oc, &layout)?;
        let ctx = BopContext::new(&params, &oc)?;
        Ok(Self {
            params,
            oc,
            layout,
            options,
            profile,
            geometry,
            ctx,
        })
    }

    pub fn params(&self) -> &ParameterSet {
        &self.params
    }
    pub fn operating(&self) -> &OperatingConditions {
        &self.oc
    }
    pub fn layout(&self) -> &DiscretizationLayout {
        &self.layout
    }
    pub fn profile(&self) -> &CurrentProfile {
        &self.profile
    }
    pub fn options(&self) -> ModelOptions {
        self.options
    }
    pub fn bop_context(&self) -> &BopContext {
        &self.ctx
    }
    pub fn saturation_concentration(&self) -> f64 {
        self.geometry.c_v_sat
    }

    pub fn with_profile(&self, profile: CurrentProfile) -> Self {
        Self {
            profile,
            ..self.clone()
        }
    }

    /// Evaluate all fluxes, sources and derivatives at one state.
    pub fn evaluate(&self, y: &[f64], i_fc: f64) -> Result<Evaluation> {
        let l = &self.layout;
        let n = l.n_gdl;
        let st = StateBlocks::unpack(y, l)?;
        let rt = self.ctx.rt;
        let t_fc = self.oc.t_fc;
        let p = &self.params;

        let kappa_co = p.kinetics.kappa_co;
        let k_h2 = membrane_permeation(Gas::H2, st.lambda_mem, t_fc, kappa_co, p);
        let k_o2 = membrane_permeation(Gas::O2, st.lambda_mem, t_fc, kappa_co, p);
        let crossover = crossover_from_permeability(k_h2, k_o2, t_fc, st.c_h2_acl, st.c_o2_ccl, p);

        let gc = ChannelState::from_concentrations(st.c_v_agc, st.c_h2_agc, st.c_v_cgc, st.c_o2_cgc, st.c_n2, rt);
        let (bop, inflow) = if self.options.sealed {
            (BopFlows::default(), ChannelFlows::default())
        } else {
            let flows = compute_bop_flows(&st.bop, &gc, i_fc, crossover.i_n, &self.ctx, p, &self.oc)?;
            let ch = channel_flows(&st.bop, &gc, &flows, &self.ctx, p);
            (flows, ch)
        };

        let mut s_a = st.s_agdl.clone();
        s_a.push(st.s_acl);
        let mut c_v_a = st.c_v_agdl.clone();
        c_v_a.push(st.c_v_acl);
        let mut c_h2_a = st.c_h2_agdl.clone();
        c_h2_a.push(st.c_h2_acl);
        let mut s_c = vec![st.s_ccl];
        s_c.extend_from_slice(&st.s_cgdl);
        let mut c_v_c = vec![st.c_v_ccl];
        c_v_c.extend_from_slice(&st.c_v_cgdl);
        let mut c_o2_c = vec![st.c_o2_ccl];
        c_o2_c.extend_from_slice(&st.c_o2_cgdl);
        let electrodes = Electrodes {
            s_a,
            c_v_a,
            c_h2_a,
            s_c,
            c_v_c,
            c_o2_c,
            c_n2: st.c_n2,
            lambda: [st.lambda_acl, st.lambda_mem, st.lambda_ccl],
            c_v_agc: st.c_v_agc,
            c_h2_agc: st.c_h2_agc,
            c_v_cgc: st.c_v_cgc,
            c_o2_cgc: st.c_o2_cgc,
        };
        let mut mea = MeaTerms::default();
        let d = assemble_mea_rhs(&electrodes, i_fc, &self.geometry, p, inflow, k_h2, k_o2, &mut mea)?;
        let cd = mea.channel_derivatives;
        let dp_cgc_dt = rt * (cd.c_v_cgc + cd.c_o2_cgc + cd.c_n2);

        let mut dydt = vec![0.0; l.total_len];
        dydt[l.lambda_acl()] = d.lambda[0];
        dydt[l.lambda_mem()] = d.lambda[1];
        dydt[l.lambda_ccl()] = d.lambda[2];
        for i in 2..=n {
            dydt[l.s_agdl(i)] = d.s_a[i - 1];
        }
        dydt[l.s_acl()] = d.s_a[n];
        dydt[l.s_ccl()] = d.s_c[0];
        for i in 1..n {
            dydt[l.s_cgdl(i)] = d.s_c[i];
        }
        for i in 1..=n {
            dydt[l.cv_agdl(i)] = d.c_v_a[i - 1];
            dydt[l.ch2_agdl(i)] = d.c_h2_a[i - 1];
            dydt[l.cv_cgdl(i)] = d.c_v_c[i];
            dydt[l.co2_cgdl(i)] = d.c_o2_c[i];
        }
        dydt[l.cv_acl()] = d.c_v_a[n];
        dydt[l.ch2_acl()] = d.c_h2_a[n];
        dydt[l.cv_ccl()] = d.c_v_c[0];
        dydt[l.co2_ccl()] = d.c_o2_c[0];
        dydt[l.cv_agc()] = cd.c_v_agc;
        dydt[l.ch2_agc()] = cd.c_h2_agc;
        dydt[l.cv_cgc()] = cd.c_v_cgc;
        dydt[l.co2_cgc()] = cd.c_o2_cgc;
        dydt[l.cn2()] = cd.c_n2;
        if !self.options.sealed {
            let db = assemble_bop_rhs(&st.bop, &gc, &bop, &mea.channel, dp_cgc_dt, &self.ctx, p, &self.oc);
            let off = l.bop(BopSlot::PAsm);
            dydt[off..off + db.len()].copy_from_slice(&db);
        }
        Ok(Evaluation {
            i_fc,
            crossover,
            gc,
            bop,
            mea,
            dp_cgc_dt,
            dydt,
        })
    }

    /// Absolute tolerance per state, chosen by quantity.
    pub fn absolute_tolerances(&self) -> Vec<f64> {
        let c_scale = 0.5 * (self.oc.p_a_des + self.oc.p_c_des) / self.ctx.rt;
        (0..self.layout.total_len)
            .map(|i| match self.layout.quantity(i) {
                Quantity::WaterContent => 1e-8,
                Quantity::Saturation => 1e-9,
                Quantity::Concentration => 1e-8 * c_scale,
                Quantity::Pressure => 1e-2,
                Quantity::Humidity => 1e-8,
                Quantity::MassFlow => 1e-12,
                Quantity::Area => 1e-12,
            })
            .collect()
    }

    /// Clamp saturations at zero and the valve area to `[0, A_T]`.
    pub fn project_state(&self, y: &mut [f64]) -> bool {
        let mut changed = false;
        for i in 0..y.len() {
            if self.layout.quantity(i) == Quantity::Saturation && y[i] < 0.0 {
                y[i] = 0.0;
                changed = true;
            }
        }
        let a = self.layout.bop(BopSlot::ABpC);
        let a_t = self.params.bop.a_t;
        if y[a] < 0.0 {
            y[a] = 0.0;
            changed = true;
        } else if y[a] > a_t {
            y[a] = a_t;
            changed = true;
        }
        changed
    }
}

impl OdeSystem for FuelCellModel {
    fn dim(&self) -> usize {
        self.layout.total_len
    }

    fn rhs(&self, t: f64, y: &[f64], dydt: &mut [f64]) -> std::result::Result<(), RhsError> {
        let i_fc = self.profile.at(t);
        let e = self.evaluate(y, i_fc).map_err(|e| RhsError::new(e.to_string()))?;
        dydt.copy_from_slice(&e.dydt);
        Ok(())
    }

    fn project(&self, y: &mut [f64]) -> bool {
        self.project_state(y)
    }

    fn state_name(&self, index: usize) -> String {
        self.layout.state_name(index)
    }
}

fn mea_geometry(params: &ParameterSet, oc: &OperatingConditions, layout: &DiscretizationLayout) -> Result<MeaGeometry> {
    let t_fc = oc.t_fc;
    let por = &params.porous;
    let eps_if = 0.5 * (por.eps_gdl + por.eps_cl);
    let theta_if = 0.5 * (por.theta_c_gdl + por.theta_c_cl);
    let sigma = surface_tension(t_fc)?;
    let nu = params.water.nu_l;
    let cap = |eps: f64, theta: f64| -> Result<f64> {
        let k0 = intrinsic_permeability(eps, params)?;
        Ok(sigma * k0 / nu * theta.cos() * (eps / k0).sqrt())
    };
    if !(layout.n_gdl >= 2) {
        return Err(ModelError::Discretization {
            n_gdl: layout.n_gdl,
            h_gdl: params.geometry.h_gdl,
            h_cl: params.geometry.h_cl,
        });
    }
    let g = &params.geometry;
    Ok(MeaGeometry {
        n: layout.n_gdl,
        dx: layout.dx_gdl,
        t_fc,
        rt: params.constants.r * t_fc,
        c_v_sat: saturation_concentration(t_fc, params.constants.r)?,
        cap_gdl: cap(por.eps_gdl, por.theta_c_gdl)?,
        cap_interface: cap(eps_if, theta_if)?,
        deff_gdl: effective_factor(0.0, por.eps_gdl, params),
        deff_interface: effective_factor(0.0, eps_if, params),
        d_a_times_p: binary_diffusivity_unchecked(Side::Anode, 1.0, t_fc),
        d_c_times_p: binary_diffusivity_unchecked(Side::Cathode, 1.0, t_fc),
        sherwood_over_hgc: sherwood_number(g.w_gc, g.h_gc) / g.h_gc,
    })
}
