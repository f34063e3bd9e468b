//! Balance of plant: manifolds, compressor, humidifier, recirculation and
//! the cathode back-pressure valve.

use crate::error::{ModelError, Result};
use crate::layout::{BopState, N_BOP};
use crate::mea::ChannelFlows;
use crate::params::{OperatingConditions, ParameterSet};
use crate::transport::saturation_pressure;

/// Gas volume whose composition sets a molar mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Asm,
    Aem,
    Agc,
    Csm,
    Cem,
    Cgc,
    Ext,
}

impl Region {
    pub fn is_anode(self) -> bool {
        matches!(self, Region::Asm | Region::Aem | Region::Agc)
    }
}

/// Molar mass of a humid gas, kg/mol. `p_sat` is the saturation pressure at
/// the temperature that defines the humidity of this region.
pub fn mixture_molar_mass(
    region: Region,
    phi: f64,
    p: f64,
    p_sat: f64,
    y_o2: f64,
    params: &ParameterSet,
) -> Result<f64> {
    if !(p > 0.0) {
        return Err(ModelError::Domain {
            what: "pressure",
            detail: format!("{region:?}: P = {p} Pa must be positive"),
        });
    }
    let x_v = phi * p_sat / p;
    if x_v > 1.0 || x_v < 0.0 {
        return Err(ModelError::InfeasibleHumidity {
            vapor: phi * p_sat,
            pressure: p,
        });
    }
    Ok(molar_mass_from_fraction(region, x_v, y_o2, params))
}

/// Molar mass from the vapor mole fraction directly.
pub fn molar_mass_from_fraction(region: Region, x_v: f64, y_o2: f64, params: &ParameterSet) -> f64 {
    let c = &params.constants;
    let dry = if region.is_anode() {
        c.m_h2
    } else {
        y_o2 * c.m_o2 + (1.0 - y_o2) * c.m_n2
    };
    x_v * c.m_h2o + (1.0 - x_v) * dry
}

pub fn linear_nozzle_flow(k: f64, p_up: f64, p_down: f64) -> f64 {
    k * (p_up - p_down)
}

/// Subcritical isentropic outflow through an orifice to the ambient, kg/s.
#[allow(clippy::too_many_arguments)]
pub fn compressible_orifice_flow(
    c_d: f64,
    area: f64,
    p_up: f64,
    p_ext: f64,
    t: f64,
    m: f64,
    gamma: f64,
    r: f64,
) -> Result<f64> {
    if !(p_ext > 0.0) {
        return Err(ModelError::Domain {
            what: "ambient pressure",
            detail: format!("P_ext = {p_ext} Pa must be positive"),
        });
    }
    if p_ext > p_up {
        return Err(ModelError::ReverseExhaust { p_up, p_ext });
    }
    Ok(orifice_unchecked(c_d, area, p_up, p_ext, t, m, gamma, r))
}

#[allow(clippy::too_many_arguments)]
fn orifice_unchecked(c_d: f64, area: f64, p_up: f64, p_ext: f64, t: f64, m: f64, gamma: f64, r: f64) -> f64 {
    if area == 0.0 || p_up == p_ext {
        return 0.0;
    }
    let ratio = p_ext / p_up;
    let bracket = 1.0 - ratio.powf((gamma - 1.0) / gamma);
    c_d * area * p_up / (r * t).sqrt() * ratio.powf(1.0 / gamma) * (m * 2.0 * gamma / (gamma - 1.0) * bracket).sqrt()
}

/// Relative band below ambient within which an exhaust pressure is treated
/// as equal to ambient (zero outflow) rather than as reverse flow.
pub const REVERSE_EXHAUST_BAND: f64 = 1e-4;

/// Orifice flow for use inside the right-hand side: zero for upstream
/// pressures within [`REVERSE_EXHAUST_BAND`] below ambient, an error
/// beyond it.
#[allow(clippy::too_many_arguments)]
pub fn exhaust_flow(c_d: f64, area: f64, p_up: f64, p_ext: f64, t: f64, m: f64, gamma: f64, r: f64) -> Result<f64> {
    if p_up < p_ext {
        if p_up >= p_ext * (1.0 - REVERSE_EXHAUST_BAND) {
            return Ok(0.0);
        }
        return Err(ModelError::ReverseExhaust { p_up, p_ext });
    }
    Ok(orifice_unchecked(c_d, area, p_up, p_ext, t, m, gamma, r))
}

/// Anode recirculation flow, kg/s.
#[allow(clippy::too_many_arguments)]
pub fn recirculation_flow(
    i_fc: f64,
    i_n: f64,
    s_a: f64,
    m_aem: f64,
    p_aem: f64,
    vapor_aem: f64,
    params: &ParameterSet,
) -> Result<f64> {
    let dry = p_aem - vapor_aem;
    if !(dry > 0.0) {
        return Err(ModelError::Domain {
            what: "anode exhaust manifold",
            detail: format!("dry gas pressure {dry} Pa must be positive"),
        });
    }
    let g = &params.geometry;
    Ok(g.n_cell as f64 * m_aem * p_aem / dry * (s_a - 1.0) * (i_fc + i_n) * g.a_act / (2.0 * params.constants.f))
}

/// Temperature-dependent quantities of the auxiliaries that stay fixed
/// during a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BopContext {
    pub rt: f64,
    pub p_sat_fc: f64,
    pub p_sat_ext: f64,
    /// Ambient air molar mass, humidity taken at the ambient temperature.
    pub m_ext: f64,
}

impl BopContext {
    pub fn new(params: &ParameterSet, oc: &OperatingConditions) -> Result<Self> {
        let a = &params.ambient;
        let p_sat_ext = saturation_pressure(a.t_ext)?;
        let m_ext = mixture_molar_mass(Region::Ext, a.phi_ext, a.p_ext, p_sat_ext, a.y_o2_ext, params)?;
        Ok(Self {
            rt: params.constants.r * oc.t_fc,
            p_sat_fc: saturation_pressure(oc.t_fc)?,
            p_sat_ext,
            m_ext,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DesiredFlows {
    pub w_cp_des: f64,
    pub w_c_v_des: f64,
    pub w_v_hum_in: f64,
    pub w_c_inj_des: f64,
}

/// Compressor and humidifier set-points. `p_cp` is the compressor outlet
/// pressure.
pub fn desired_flows(
    i_fc: f64,
    i_n: f64,
    w_cp: f64,
    p_cp: f64,
    ctx: &BopContext,
    params: &ParameterSet,
    oc: &OperatingConditions,
) -> DesiredFlows {
    let a = &params.ambient;
    let g = &params.geometry;
    let m_h2o = params.constants.m_h2o;
    let w_cp_des = g.n_cell as f64 * ctx.m_ext * a.p_ext / (a.p_ext - a.phi_ext * ctx.p_sat_ext) / a.y_o2_ext
        * oc.s_c
        * (i_fc + i_n)
        * g.a_act
        / (4.0 * params.constants.f);
    let w_c_v_des = m_h2o * oc.phi_c_des * ctx.p_sat_fc / p_cp * w_cp / ctx.m_ext;
    let w_v_hum_in = m_h2o * a.phi_ext * ctx.p_sat_ext / a.p_ext * w_cp / ctx.m_ext;
    DesiredFlows {
        w_cp_des,
        w_c_v_des,
        w_v_hum_in,
        w_c_inj_des: (w_c_v_des - w_v_hum_in).max(0.0),
    }
}

/// First-order relaxation toward a set-point.
pub fn actuator_dynamics(w: f64, w_des: f64, tau: f64) -> f64 {
    (w_des - w) / tau
}

/// Rate of change of the back-pressure valve throttle area.
#[allow(clippy::too_many_arguments)]
pub fn back_pressure_valve(a_bp: f64, p_cgc: f64, dp_cgc_dt: f64, p_c_des: f64, k_p: f64, k_d: f64, a_t: f64) -> f64 {
    let rate = -k_p * (p_c_des - p_cgc) + k_d * dp_cgc_dt;
    if (a_bp >= a_t && rate > 0.0) || (a_bp <= 0.0 && rate < 0.0) {
        0.0
    } else {
        rate
    }
}

/// Valve rate as seen by the integrator: the unsaturated controller law. The
/// bounds of [`back_pressure_valve`] are enforced by projecting the state
/// onto `[0, A_T]` after each accepted step, which keeps the right-hand side
/// smooth in the valve area.
pub fn valve_rate(p_cgc: f64, dp_cgc_dt: f64, p_c_des: f64, k_p: f64, k_d: f64) -> f64 {
    -k_p * (p_c_des - p_cgc) + k_d * dp_cgc_dt
}

/// Composition of the gas channels as seen by the auxiliaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelState {
    pub p_agc: f64,
    pub x_v_agc: f64,
    pub p_cgc: f64,
    pub x_v_cgc: f64,
    /// Dry-gas oxygen fraction in the cathode channel.
    pub y_o2_cgc: f64,
}

impl ChannelState {
    pub fn from_concentrations(c_v_agc: f64, c_h2_agc: f64, c_v_cgc: f64, c_o2_cgc: f64, c_n2: f64, rt: f64) -> Self {
        let tot_a = c_v_agc + c_h2_agc;
        let tot_c = c_v_cgc + c_o2_cgc + c_n2;
        let dry_c = c_o2_cgc + c_n2;
        Self {
            p_agc: tot_a * rt,
            x_v_agc: if tot_a > 0.0 { c_v_agc / tot_a } else { 0.0 },
            p_cgc: tot_c * rt,
            x_v_cgc: if tot_c > 0.0 { c_v_cgc / tot_c } else { 0.0 },
            y_o2_cgc: if dry_c > 0.0 { c_o2_cgc / dry_c } else { 0.0 },
        }
    }
}

/// All auxiliary mass flows, kg/s (manifold-level vapor flows in mol/s).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BopFlows {
    pub w_asm_in: f64,
    pub w_asm_out: f64,
    pub w_aem_in: f64,
    pub w_aem_out: f64,
    pub w_are: f64,
    pub w_v_asm_in: f64,
    pub w_v_aem_out: f64,
    pub w_csm_in: f64,
    pub w_csm_out: f64,
    pub w_cem_in: f64,
    pub w_cem_out: f64,
    pub w_v_csm_in: f64,
    pub w_v_cem_out: f64,
    pub w_cp: f64,
    pub w_cp_des: f64,
    pub w_c_inj: f64,
    pub w_c_inj_des: f64,
    pub w_c_v_des: f64,
    pub w_v_hum_in: f64,
    pub m_asm: f64,
    pub m_aem: f64,
    pub m_agc: f64,
    pub m_csm: f64,
    pub m_cem: f64,
    pub m_cgc: f64,
}

fn region_mass(region: Region, phi: f64, p: f64, y_o2: f64, ctx: &BopContext, params: &ParameterSet) -> Result<f64> {
    mixture_molar_mass(region, phi, p, ctx.p_sat_fc, y_o2, params)
}

/// Evaluate every auxiliary flow from the current state.
pub fn compute_bop_flows(
    bop: &BopState,
    gc: &ChannelState,
    i_fc: f64,
    i_n: f64,
    ctx: &BopContext,
    params: &ParameterSet,
    oc: &OperatingConditions,
) -> Result<BopFlows> {
    let b = &params.bop;
    let c = &params.constants;
    let a = &params.ambient;
    let p_sat = ctx.p_sat_fc;
    let y_ext = a.y_o2_ext;

    let m_asm = region_mass(Region::Asm, bop.phi_asm, bop.p_asm, 0.0, ctx, params)?;
    let m_aem = region_mass(Region::Aem, bop.phi_aem, bop.p_aem, 0.0, ctx, params)?;
    let m_csm = region_mass(Region::Csm, bop.phi_csm, bop.p_csm, y_ext, ctx, params)?;
    let m_cem = region_mass(Region::Cem, bop.phi_cem, bop.p_cem, gc.y_o2_cgc, ctx, params)?;
    let m_agc = molar_mass_from_fraction(Region::Agc, gc.x_v_agc, 0.0, params);
    let m_cgc = molar_mass_from_fraction(Region::Cgc, gc.x_v_cgc, gc.y_o2_cgc, params);

    let w_asm_in = linear_nozzle_flow(b.k_sm_in, oc.p_a_des, bop.p_asm);
    let w_asm_out = linear_nozzle_flow(b.k_sm_out, bop.p_asm, gc.p_agc);
    let w_aem_in = linear_nozzle_flow(b.k_em_in, gc.p_agc, bop.p_aem);
    let w_are = recirculation_flow(i_fc, i_n, oc.s_a, m_aem, bop.p_aem, bop.phi_aem * p_sat, params)?;
    let w_aem_out = if b.k_purge == 0.0 {
        0.0
    } else {
        b.k_purge * exhaust_flow(b.c_d, b.a_t, bop.p_aem, a.p_ext, oc.t_fc, m_agc, c.gamma_h2, c.r)?
    };
    let w_v_asm_in = bop.phi_aem * p_sat / (m_aem * bop.p_aem) * w_are;
    let w_v_aem_out = bop.phi_aem * p_sat / (m_aem * bop.p_aem) * w_aem_out;

    let desired = desired_flows(i_fc, i_n, bop.w_cp, bop.p_csm, ctx, params, oc);
    let w_csm_in = bop.w_cp + bop.w_c_inj;
    let w_csm_out = linear_nozzle_flow(b.k_sm_out, bop.p_csm, gc.p_cgc);
    let w_cem_in = linear_nozzle_flow(b.k_em_in, gc.p_cgc, bop.p_cem);
    let area = bop.a_bp_c.clamp(0.0, b.a_t);
    let w_cem_out = exhaust_flow(b.c_d, area, bop.p_cem, a.p_ext, oc.t_fc, m_cgc, c.gamma_a, c.r)?;
    let w_v_csm_in = a.phi_ext * ctx.p_sat_ext / (ctx.m_ext * a.p_ext) * bop.w_cp + bop.w_c_inj / c.m_h2o;
    let w_v_cem_out = bop.phi_cem * p_sat / (m_cem * bop.p_cem) * w_cem_out;

    Ok(BopFlows {
        w_asm_in,
        w_asm_out,
        w_aem_in,
        w_aem_out,
        w_are,
        w_v_asm_in,
        w_v_aem_out,
        w_csm_in,
        w_csm_out,
        w_cem_in,
        w_cem_out,
        w_v_csm_in,
        w_v_cem_out,
        w_cp: bop.w_cp,
        w_cp_des: desired.w_cp_des,
        w_c_inj: bop.w_c_inj,
        w_c_inj_des: desired.w_c_inj_des,
        w_c_v_des: desired.w_c_v_des,
        w_v_hum_in: desired.w_v_hum_in,
        m_asm,
        m_aem,
        m_agc,
        m_csm,
        m_cem,
        m_cgc,
    })
}

/// Channel inlet and outlet molar fluxes per unit channel cross-section.
/// Wall fluxes are left at zero.
pub fn channel_flows(
    bop: &BopState,
    gc: &ChannelState,
    flows: &BopFlows,
    ctx: &BopContext,
    params: &ParameterSet,
) -> ChannelFlows {
    let g = &params.geometry;
    let area = g.h_gc * g.w_gc;
    let y_ext = params.ambient.y_o2_ext;
    let x_asm = bop.phi_asm * ctx.p_sat_fc / bop.p_asm;
    let x_csm = bop.phi_csm * ctx.p_sat_fc / bop.p_csm;
    let n_a_in = flows.w_asm_out / (area * flows.m_asm);
    let n_a_out = flows.w_aem_in / (area * flows.m_agc);
    let n_c_in = flows.w_csm_out / (area * flows.m_csm);
    let n_c_out = flows.w_cem_in / (area * flows.m_cgc);
    ChannelFlows {
        j_v_a_in: x_asm * n_a_in,
        j_v_a_out: gc.x_v_agc * n_a_out,
        j_h2_in: (1.0 - x_asm) * n_a_in,
        j_h2_out: (1.0 - gc.x_v_agc) * n_a_out,
        j_v_c_in: x_csm * n_c_in,
        j_v_c_out: gc.x_v_cgc * n_c_out,
        j_o2_in: y_ext * (1.0 - x_csm) * n_c_in,
        j_o2_out: gc.y_o2_cgc * (1.0 - gc.x_v_cgc) * n_c_out,
        j_n2_in: (1.0 - y_ext) * (1.0 - x_csm) * n_c_in,
        j_n2_out: (1.0 - gc.y_o2_cgc) * (1.0 - gc.x_v_cgc) * n_c_out,
        ..Default::default()
    }
}

/// Time derivatives of the eleven auxiliary states, in slot order.
pub fn assemble_bop_rhs(
    bop: &BopState,
    gc: &ChannelState,
    flows: &BopFlows,
    channel: &ChannelFlows,
    dp_cgc_dt: f64,
    ctx: &BopContext,
    params: &ParameterSet,
    oc: &OperatingConditions,
) -> [f64; N_BOP] {
    let b = &params.bop;
    let g = &params.geometry;
    let n = g.n_cell as f64;
    let rt = ctx.rt;
    let hw_n = g.h_gc * g.w_gc * n;
    let sm_phi = rt / (b.v_sm * ctx.p_sat_fc);
    let em_phi = rt / (b.v_em * ctx.p_sat_fc);
    let f = flows;
    [
        rt / (b.v_sm * f.m_asm) * (f.w_asm_in + f.w_are - n * f.w_asm_out),
        rt / (b.v_em * f.m_aem) * (n * f.w_aem_in - f.w_are - f.w_aem_out),
        sm_phi * (f.w_v_asm_in - channel.j_v_a_in * hw_n),
        em_phi * (channel.j_v_a_out * hw_n - f.w_v_asm_in - f.w_v_aem_out),
        rt / (b.v_sm * f.m_csm) * (f.w_csm_in - n * f.w_csm_out),
        rt / (b.v_em * f.m_cem) * (n * f.w_cem_in - f.w_cem_out),
        sm_phi * (f.w_v_csm_in - channel.j_v_c_in * hw_n),
        em_phi * (channel.j_v_c_out * hw_n - f.w_v_cem_out),
        actuator_dynamics(bop.w_cp, f.w_cp_des, b.tau_cp),
        actuator_dynamics(bop.w_c_inj, f.w_c_inj_des, b.tau_hum),
        valve_rate(gc.p_cgc, dp_cgc_dt, oc.p_c_des, b.k_p, b.k_d),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> ParameterSet {
        ParameterSet::eh31()
    }

    #[test]
    fn molar_mass_examples() {
        let p = p();
        assert_eq!(mixture_molar_mass(Region::Asm, 0.0, 2e5, 3e4, 0.0, &p).unwrap(), 2e-3);
        let m = mixture_molar_mass(Region::Csm, 0.0, 2e5, 3e4, 0.2095, &p).unwrap();
        assert!((m - (0.2095 * 0.032 + 0.7905 * 0.028)).abs() < 1e-15);
        assert!((m - 0.028838).abs() < 1e-9);
        for r in [Region::Asm, Region::Cem, Region::Ext] {
            let m = mixture_molar_mass(r, 1.0, 3e4, 3e4, 0.2, &p).unwrap();
            assert!((m - p.constants.m_h2o).abs() < 1e-15);
        }
        assert!(matches!(
            mixture_molar_mass(Region::Agc, 1.1, 3e4, 3e4, 0.0, &p),
            Err(ModelError::InfeasibleHumidity { .. })
        ));
    }

    #[test]
    fn nozzle_examples() {
        assert_eq!(linear_nozzle_flow(1e-5, 2e5, 2e5), 0.0);
        assert!((linear_nozzle_flow(1e-5, 100.0, 0.0) - 1e-3).abs() < 1e-15);
        assert_eq!(
            linear_nozzle_flow(1e-5, 0.0, 100.0),
            -linear_nozzle_flow(1e-5, 100.0, 0.0)
        );
    }

    #[test]
    fn orifice_examples() {
        let r = 8.314;
        let f = |a, p_up| compressible_orifice_flow(0.05, a, p_up, 101325.0, 347.15, 0.028, 1.401, r);
        assert_eq!(f(1.18e-3, 101325.0).unwrap(), 0.0);
        assert_eq!(f(0.0, 2e5).unwrap(), 0.0);
        let w = f(1.18e-3, 2e5).unwrap();
        // Independent evaluation of the printed expression.
        let (g, pr) = (1.401f64, 101325.0f64 / 2e5);
        let oracle = 0.05 * 1.18e-3 * 2e5 / (r * 347.15f64).sqrt()
            * pr.powf(1.0 / g)
            * (0.028 * 2.0 * g / (g - 1.0) * (1.0 - pr.powf((g - 1.0) / g))).sqrt();
        assert!((w - oracle).abs() < 1e-15);
        assert!((w - 2.51e-2).abs() < 5e-4, "{w}");
        assert!(matches!(f(1.18e-3, 1e5), Err(ModelError::ReverseExhaust { .. })));
    }

    #[test]
    fn exhaust_band() {
        let e = |p_up| exhaust_flow(0.05, 1e-3, p_up, 1e5, 347.15, 0.028, 1.401, 8.314);
        assert_eq!(e(1e5 * (1.0 - 0.5 * REVERSE_EXHAUST_BAND)).unwrap(), 0.0);
        assert!(e(1e5 * (1.0 - 2.0 * REVERSE_EXHAUST_BAND)).is_err());
        assert!(e(1.1e5).unwrap() > 0.0);
    }

    #[test]
    fn recirculation_examples() {
        let p = p();
        assert_eq!(recirculation_flow(1.5e4, 0.0, 1.0, 2e-3, 2e5, 0.0, &p).unwrap(), 0.0);
        assert_eq!(recirculation_flow(0.0, 0.0, 1.2, 2e-3, 2e5, 0.0, &p).unwrap(), 0.0);
        let w = recirculation_flow(1.5e4, 0.0, 1.2, 2e-3, 2e5, 0.0, &p).unwrap();
        let oracle = 5.0 * 2e-3 * 0.2 * 1.5e4 * 8.5e-3 / (2.0 * 96485.0);
        assert!((w - oracle).abs() < 1e-15);
        assert!((w - 1.321e-6).abs() < 1e-9);
        assert!(recirculation_flow(1.5e4, 0.0, 1.2, 2e-3, 2e5, 2e5, &p).is_err());
    }

    fn ctx_dry(p: &ParameterSet) -> BopContext {
        BopContext {
            rt: p.constants.r * 347.15,
            p_sat_fc: saturation_pressure(347.15).unwrap(),
            p_sat_ext: saturation_pressure(p.ambient.t_ext).unwrap(),
            m_ext: 0.2095 * 0.032 + 0.7905 * 0.028,
        }
    }

    #[test]
    fn desired_flow_examples() {
        let p = p().with(|p| p.ambient.phi_ext = 0.0);
        let oc = OperatingConditions::eh31(2e5);
        let ctx = ctx_dry(&p);
        let d0 = desired_flows(0.0, 0.0, 0.0, 2e5, &ctx, &p, &oc);
        assert_eq!(d0.w_cp_des, 0.0);
        let d = desired_flows(1.5e4, 0.0, 1e-4, 2e5, &ctx, &p, &oc);
        let oracle = 5.0 * 0.028838 / 0.2095 * 2.0 * 1.5e4 * 8.5e-3 / (4.0 * 96485.0);
        assert!((d.w_cp_des - oracle).abs() < 1e-9 * oracle);
        assert!((d.w_cp_des - 4.55e-4).abs() < 1e-6);
        assert_eq!(d.w_v_hum_in, 0.0);
        assert!(d.w_c_inj_des > 0.0);
        // Ambient wetter than the set-point: the humidifier does nothing.
        let wet = p.with(|p| p.ambient.phi_ext = 1.0);
        let oc_dry = OperatingConditions { phi_c_des: 0.0, ..oc };
        let d = desired_flows(1.5e4, 0.0, 1e-4, 2e5, &ctx, &wet, &oc_dry);
        assert!(d.w_v_hum_in > 0.0);
        assert_eq!(d.w_c_inj_des, 0.0);
    }

    #[test]
    fn actuator_examples() {
        assert_eq!(actuator_dynamics(0.3, 0.3, 1.0), 0.0);
        assert_eq!(actuator_dynamics(0.0, 1.0, 1.0), 1.0);
    }

    #[test]
    fn valve_examples() {
        let v = |a, p, dp| back_pressure_valve(a, p, dp, 2e5, 5e-8, 1e-8, 1.18e-3);
        assert_eq!(v(5e-4, 2e5, 0.0), 0.0);
        assert_eq!(v(1.18e-3, 2.5e5, 0.0), 0.0);
        assert_eq!(v(0.0, 1.5e5, 0.0), 0.0);
        let r = v(5e-4, 1.5e5, 0.0);
        assert!((r + 5e-8 * 5e4).abs() < 1e-15);
        assert!(v(1.18e-3, 1.5e5, 0.0) < 0.0);
        assert_eq!(valve_rate(1.5e5, 0.0, 2e5, 5e-8, 1e-8), r);
        assert!(valve_rate(2e5, 1.0, 2e5, 5e-8, 1e-8) > 0.0);
    }

    #[test]
    fn zero_flows_give_zero_derivatives() {
        let p = p();
        let oc = OperatingConditions::eh31(2e5);
        let ctx = ctx_dry(&p);
        let bop = BopState {
            p_asm: 2e5,
            p_aem: 2e5,
            p_csm: 2e5,
            p_cem: 2e5,
            a_bp_c: 5e-4,
            ..Default::default()
        };
        let gc =
            ChannelState::from_concentrations(0.0, 2e5 / ctx.rt, 0.0, 0.2 * 2e5 / ctx.rt, 0.8 * 2e5 / ctx.rt, ctx.rt);
        let flows = BopFlows {
            m_asm: 2e-3,
            m_aem: 2e-3,
            m_csm: 0.029,
            m_cem: 0.029,
            m_agc: 2e-3,
            m_cgc: 0.029,
            ..Default::default()
        };
        let d = assemble_bop_rhs(&bop, &gc, &flows, &ChannelFlows::default(), 0.0, &ctx, &p, &oc);
        assert!(d.iter().all(|v| *v == 0.0), "{d:?}");
    }

    #[test]
    fn purge_disabled_leaves_anode_exhaust_closed() {
        let p = p();
        let oc = OperatingConditions::eh31(2e5);
        let ctx = BopContext::new(&p, &oc).unwrap();
        let bop = BopState {
            p_asm: 2e5,
            p_aem: 2e5,
            phi_asm: 0.4,
            phi_aem: 0.4,
            p_csm: 2e5,
            p_cem: 2e5,
            phi_csm: 0.6,
            phi_cem: 0.6,
            a_bp_c: 5e-4,
            ..Default::default()
        };
        let gc = ChannelState::from_concentrations(10.0, 59.0, 10.0, 12.0, 47.0, ctx.rt);
        let f = compute_bop_flows(&bop, &gc, 1e4, 0.0, &ctx, &p, &oc).unwrap();
        assert_eq!(f.w_aem_out, 0.0);
        assert_eq!(f.w_v_aem_out, 0.0);
        let purge = p.with(|p| p.bop.k_purge = 1.0);
        let f = compute_bop_flows(&bop, &gc, 1e4, 0.0, &ctx, &purge, &oc).unwrap();
        assert!(f.w_aem_out > 0.0);
    }

    #[test]
    fn channel_fluxes_partition_the_inflow() {
        let p = p();
        let oc = OperatingConditions::eh31(2e5);
        let ctx = BopContext::new(&p, &oc).unwrap();
        let bop = BopState {
            p_asm: 2.01e5,
            p_aem: 1.99e5,
            phi_asm: 0.4,
            phi_aem: 0.4,
            p_csm: 2.01e5,
            p_cem: 1.99e5,
            phi_csm: 0.6,
            phi_cem: 0.6,
            w_cp: 1e-4,
            a_bp_c: 5e-4,
            ..Default::default()
        };
        let gc = ChannelState::from_concentrations(10.0, 59.0, 10.0, 12.0, 47.0, ctx.rt);
        let f = compute_bop_flows(&bop, &gc, 1e4, 0.0, &ctx, &p, &oc).unwrap();
        let ch = channel_flows(&bop, &gc, &f, &ctx, &p);
        let area = p.geometry.h_gc * p.geometry.w_gc;
        // Mass carried by the molar fluxes equals the nozzle mass flow.
        let c = &p.constants;
        let mass_in = (ch.j_v_c_in * c.m_h2o + ch.j_o2_in * c.m_o2 + ch.j_n2_in * c.m_n2) * area;
        assert!((mass_in - f.w_csm_out).abs() < 1e-12 * f.w_csm_out.abs());
        let mass_a = (ch.j_v_a_in * c.m_h2o + ch.j_h2_in * c.m_h2) * area;
        assert!((mass_a - f.w_asm_out).abs() < 1e-12 * f.w_asm_out.abs());
    }
}
