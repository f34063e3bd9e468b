//! Membrane-electrode assembly balances: dissolved water, liquid water,
//! vapor, hydrogen and oxygen.
//!
//! The flux helpers are the building blocks; [`assemble_mea_rhs`] composes
//! them over the node layout.

use crate::error::{ModelError, Result};
use crate::params::ParameterSet;
use crate::transport::{
    diffusivity_unchecked, equilibrium_water_content, membrane_permeation, sorption_rate, Gas, SorptionDirection,
};

/// Dissolved water flux between two ionomer nodes, positive toward the
/// cathode. Electro-osmotic drag plus back-diffusion, both evaluated at the
/// interface mean of lambda.
pub fn dissolved_water_flux(lambda_left: f64, lambda_right: f64, i_fc: f64, params: &ParameterSet) -> f64 {
    let m = &params.membrane;
    let g = &params.geometry;
    let lambda_bar = 0.5 * (lambda_left + lambda_right);
    let d = diffusivity_unchecked(lambda_bar.max(0.0));
    2.5 / 22.0 * i_fc / params.constants.f * lambda_bar
        - 2.0 * m.rho_mem / m.m_eq * d * (lambda_right - lambda_left) / (g.h_mem + g.h_cl)
}

/// Exchange between vapor and the ionomer of a catalyst layer, mol/(m3 s).
/// Positive when the ionomer absorbs.
pub fn sorption_source(c_v: f64, s: f64, lambda: f64, t_fc: f64, c_v_sat: f64, params: &ParameterSet) -> f64 {
    let a_w = c_v / c_v_sat + 2.0 * s;
    let lambda_eq = equilibrium_water_content(a_w, params.water.k_shape);
    let direction = if lambda_eq > lambda {
        SorptionDirection::Absorption
    } else {
        SorptionDirection::Desorption
    };
    let w = &params.water;
    let gamma = sorption_rate(lambda, t_fc, direction, params.geometry.h_cl, w.v_w, w.v_mem);
    gamma * params.membrane.rho_mem / params.membrane.m_eq * (lambda_eq - lambda)
}

/// Water production and reactant consumption in the catalyst layers,
/// including the crossover reactions.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ReactionSources {
    pub s_p_acl: f64,
    pub s_p_ccl: f64,
    pub s_h2_acl: f64,
    pub s_o2_ccl: f64,
}

pub fn reaction_and_crossover_sources(
    i_fc: f64,
    c_h2_acl: f64,
    c_o2_ccl: f64,
    lambda_mem: f64,
    t_fc: f64,
    params: &ParameterSet,
) -> ReactionSources {
    let kappa_co = params.kinetics.kappa_co;
    let k_h2 = membrane_permeation(Gas::H2, lambda_mem, t_fc, kappa_co, params);
    let k_o2 = membrane_permeation(Gas::O2, lambda_mem, t_fc, kappa_co, params);
    reaction_sources_with(i_fc, c_h2_acl, c_o2_ccl, k_h2, k_o2, t_fc, params)
}

pub(crate) fn reaction_sources_with(
    i_fc: f64,
    c_h2_acl: f64,
    c_o2_ccl: f64,
    k_h2: f64,
    k_o2: f64,
    t_fc: f64,
    params: &ParameterSet,
) -> ReactionSources {
    let f = params.constants.f;
    let h_cl = params.geometry.h_cl;
    let x = params.constants.r * t_fc / (h_cl * params.geometry.h_mem);
    ReactionSources {
        s_p_acl: 2.0 * k_o2 * x * c_o2_ccl,
        s_p_ccl: i_fc / (2.0 * f * h_cl) + k_h2 * x * c_h2_acl,
        s_h2_acl: -i_fc / (2.0 * f * h_cl) - x * (k_h2 * c_h2_acl + 2.0 * k_o2 * c_o2_ccl),
        s_o2_ccl: -i_fc / (4.0 * f * h_cl) - x * (k_o2 * c_o2_ccl + 0.5 * k_h2 * c_h2_acl),
    }
}

/// Interface properties entering the capillary flux.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapillaryProps {
    pub eps: f64,
    pub cos_theta: f64,
    pub k0: f64,
    pub sigma: f64,
    pub nu_l: f64,
    pub e: f64,
}

impl CapillaryProps {
    /// Everything in the flux that does not depend on saturation.
    pub fn prefactor(&self) -> f64 {
        self.sigma * self.k0 / self.nu_l * self.cos_theta * (self.eps / self.k0).sqrt()
    }
}

/// Liquid mass flux between two nodes, kg/(m2 s), positive from left to
/// right. `spacing` is the distance the gradient is taken over.
pub fn capillary_flow(s_left: f64, s_right: f64, props: &CapillaryProps, spacing: f64) -> f64 {
    capillary_flow_with(s_left, s_right, props.prefactor(), props.e, spacing)
}

pub(crate) fn capillary_flow_with(s_left: f64, s_right: f64, prefactor: f64, e: f64, spacing: f64) -> f64 {
    let s_bar = 0.5 * (s_left + s_right);
    if s_bar <= 0.0 || s_left == s_right {
        return 0.0;
    }
    let s_pow = (e * s_bar.ln()).exp();
    prefactor * s_pow * (1.417 - 4.24 * s_bar + 3.789 * s_bar * s_bar) * (s_right - s_left) / spacing
}

/// Condensation (positive) or evaporation (negative) rate, mol/(m3 s).
pub fn phase_change_rate(c_v: f64, s: f64, eps: f64, t_fc: f64, c_v_sat: f64, x_v: f64, params: &ParameterSet) -> f64 {
    let w = &params.water;
    if c_v > c_v_sat {
        w.gamma_cond * eps * (1.0 - s) * x_v * (c_v - c_v_sat)
    } else {
        -w.gamma_evap * eps * s * w.rho_h2o / params.constants.m_h2o * params.constants.r * t_fc * (c_v_sat - c_v)
    }
}

pub fn gas_diffusion_flux(c_left: f64, c_right: f64, d_eff: f64, spacing: f64) -> f64 {
    -d_eff * (c_right - c_left) / spacing
}

pub fn convective_boundary_flux(c_up: f64, c_down: f64, h: f64) -> f64 {
    h * (c_up - c_down)
}

/// Molar flows entering and leaving the gas channels, expressed per unit
/// channel cross-section (mol m-2 s-1), plus the wall fluxes to the GDLs.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ChannelFlows {
    pub j_v_a_in: f64,
    pub j_v_a_out: f64,
    pub j_h2_in: f64,
    pub j_h2_out: f64,
    pub j_v_c_in: f64,
    pub j_v_c_out: f64,
    pub j_o2_in: f64,
    pub j_o2_out: f64,
    pub j_n2_in: f64,
    pub j_n2_out: f64,
    /// Vapor flux from the anode channel into the GDL.
    pub j_v_agc_agdl: f64,
    pub j_h2_agc_agdl: f64,
    /// Vapor flux from the cathode GDL into the channel.
    pub j_v_cgdl_cgc: f64,
    pub j_o2_cgdl_cgc: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ChannelDerivatives {
    pub c_v_agc: f64,
    pub c_v_cgc: f64,
    pub c_h2_agc: f64,
    pub c_o2_cgc: f64,
    pub c_n2: f64,
}

pub fn gc_species_balances(flows: &ChannelFlows, params: &ParameterSet) -> ChannelDerivatives {
    let l = params.geometry.l_gc;
    let h = params.geometry.h_gc;
    ChannelDerivatives {
        c_v_agc: (flows.j_v_a_in - flows.j_v_a_out) / l - flows.j_v_agc_agdl / h,
        c_h2_agc: (flows.j_h2_in - flows.j_h2_out) / l - flows.j_h2_agc_agdl / h,
        c_v_cgc: (flows.j_v_c_in - flows.j_v_c_out) / l + flows.j_v_cgdl_cgc / h,
        c_o2_cgc: (flows.j_o2_in - flows.j_o2_out) / l + flows.j_o2_cgdl_cgc / h,
        c_n2: (flows.j_n2_in - flows.j_n2_out) / l,
    }
}

/// Per-node and per-face quantities of one electrode, ordered from the
/// anode channel toward the cathode channel.
///
/// Anode column: nodes `agdl_1..agdl_n, acl`; face `f` lies on the left of
/// node `f`, face 0 being the channel wall. Cathode column: nodes
/// `ccl, cgdl_1..cgdl_n`; face `f` lies on the right of node `f`, face `n`
/// being the channel wall.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ElectrodeTerms {
    pub pressure: Vec<f64>,
    pub x_v: Vec<f64>,
    pub s_vl: Vec<f64>,
    pub j_v: Vec<f64>,
    pub j_gas: Vec<f64>,
    pub j_l: Vec<f64>,
}

/// Everything the MEA balances produce at one instant.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MeaTerms {
    pub anode: ElectrodeTerms,
    pub cathode: ElectrodeTerms,
    pub j_lambda_mem_acl: f64,
    pub j_lambda_mem_ccl: f64,
    pub s_sorp_acl: f64,
    pub s_sorp_ccl: f64,
    pub reactions: ReactionSources,
    pub channel: ChannelFlows,
    pub channel_derivatives: ChannelDerivatives,
}

/// Node-level view of the in-cell state used by [`assemble_mea_rhs`].
#[derive(Debug, Clone, PartialEq)]
pub struct Electrodes {
    /// `agdl_1..agdl_n, acl`
    pub s_a: Vec<f64>,
    pub c_v_a: Vec<f64>,
    pub c_h2_a: Vec<f64>,
    /// `ccl, cgdl_1..cgdl_n`
    pub s_c: Vec<f64>,
    pub c_v_c: Vec<f64>,
    pub c_o2_c: Vec<f64>,
    pub c_n2: f64,
    pub lambda: [f64; 3],
    pub c_v_agc: f64,
    pub c_h2_agc: f64,
    pub c_v_cgc: f64,
    pub c_o2_cgc: f64,
}

/// Time derivatives of the in-cell states, node ordered like [`Electrodes`].
#[derive(Debug, Clone, PartialEq)]
pub struct MeaDerivatives {
    pub lambda: [f64; 3],
    pub s_a: Vec<f64>,
    pub c_v_a: Vec<f64>,
    pub c_h2_a: Vec<f64>,
    pub s_c: Vec<f64>,
    pub c_v_c: Vec<f64>,
    pub c_o2_c: Vec<f64>,
}

/// Flooding threshold on the liquid saturation.
pub const FLOODING_LIMIT: f64 = 0.99;
/// Floor on the relative gas volume, as a fraction of porosity.
pub const GAS_CAPACITY_FLOOR: f64 = 1e-3;

/// Assemble the derivatives of all in-cell states.
///
/// `inflow` supplies the channel inlet/outlet terms computed from the
/// balance-of-plant; its wall-flux fields are filled in here.
#[allow(clippy::too_many_arguments)]
pub fn assemble_mea_rhs(
    st: &Electrodes,
    i_fc: f64,
    coef: &MeaGeometry,
    params: &ParameterSet,
    inflow: ChannelFlows,
    k_h2: f64,
    k_o2: f64,
    terms: &mut MeaTerms,
) -> Result<MeaDerivatives> {
    let n = coef.n;
    let dx = coef.dx;
    let h_cl = params.geometry.h_cl;
    let rt = coef.rt;
    let c_sat = coef.c_v_sat;
    let t_fc = coef.t_fc;
    let eps_gdl = params.porous.eps_gdl;
    let eps_cl = params.porous.eps_cl;
    let e = params.porous.e;
    let spacing_if = 0.5 * (dx + h_cl);

    for (name, s) in st.s_a.iter().chain(st.s_c.iter()).enumerate() {
        if *s > FLOODING_LIMIT {
            let node = if name <= n {
                node_name(true, name, n)
            } else {
                node_name(false, name - n - 1, n)
            };
            return Err(ModelError::Flooding { node, s: *s });
        }
    }

    // Node properties.
    let eps_a = |k: usize| if k == n { eps_cl } else { eps_gdl };
    let eps_c = |k: usize| if k == 0 { eps_cl } else { eps_gdl };
    let thick_a = |k: usize| if k == n { h_cl } else { dx };
    let thick_c = |k: usize| if k == 0 { h_cl } else { dx };

    let an = &mut terms.anode;
    let ca = &mut terms.cathode;
    an.pressure.clear();
    an.x_v.clear();
    ca.pressure.clear();
    ca.x_v.clear();
    for k in 0..=n {
        let tot = st.c_v_a[k] + st.c_h2_a[k];
        an.pressure.push(tot * rt);
        an.x_v.push(if tot > 0.0 { st.c_v_a[k] / tot } else { 0.0 });
        let tot = st.c_v_c[k] + st.c_o2_c[k] + st.c_n2;
        ca.pressure.push(tot * rt);
        ca.x_v.push(if tot > 0.0 { st.c_v_c[k] / tot } else { 0.0 });
    }
    an.s_vl.clear();
    ca.s_vl.clear();
    for k in 0..=n {
        an.s_vl.push(phase_change_rate(
            st.c_v_a[k],
            st.s_a[k],
            eps_a(k),
            t_fc,
            c_sat,
            an.x_v[k],
            params,
        ));
        ca.s_vl.push(phase_change_rate(
            st.c_v_c[k],
            st.s_c[k],
            eps_c(k),
            t_fc,
            c_sat,
            ca.x_v[k],
            params,
        ));
    }

    let p_agc = (st.c_v_agc + st.c_h2_agc) * rt;
    let p_cgc = (st.c_v_cgc + st.c_o2_cgc + st.c_n2) * rt;
    let diff = |coef_p: f64, p_bar: f64| if p_bar > 0.0 { coef_p / p_bar } else { 0.0 };

    // Anode faces: 0 is the channel wall, 1..n-1 inside the GDL, n is GDL|CL.
    an.j_v.clear();
    an.j_gas.clear();
    an.j_l.clear();
    {
        let p_bar = 0.5 * (p_agc + an.pressure[0]);
        let h = coef.sherwood_over_hgc * diff(coef.d_a_times_p, p_bar);
        an.j_v.push(convective_boundary_flux(st.c_v_agc, st.c_v_a[0], h));
        an.j_gas.push(convective_boundary_flux(st.c_h2_agc, st.c_h2_a[0], h));
        an.j_l.push(0.0);
    }
    for f in 1..=n {
        let (l, r) = (f - 1, f);
        let s_bar = 0.5 * (st.s_a[l] + st.s_a[r]);
        let p_bar = 0.5 * (an.pressure[l] + an.pressure[r]);
        let (deff, cap, spacing) = if f == n {
            (coef.deff_interface, coef.cap_interface, spacing_if)
        } else {
            (coef.deff_gdl, coef.cap_gdl, dx)
        };
        let d = deff * (1.0 - s_bar) * (1.0 - s_bar) * diff(coef.d_a_times_p, p_bar);
        an.j_v.push(gas_diffusion_flux(st.c_v_a[l], st.c_v_a[r], d, spacing));
        an.j_gas
            .push(gas_diffusion_flux(st.c_h2_a[l], st.c_h2_a[r], d, spacing));
        an.j_l.push(capillary_flow_with(st.s_a[l], st.s_a[r], cap, e, spacing));
    }

    // Cathode faces: 0 is CL|GDL, 1..n-1 inside the GDL, n is the channel wall.
    ca.j_v.clear();
    ca.j_gas.clear();
    ca.j_l.clear();
    for f in 0..n {
        let (l, r) = (f, f + 1);
        let s_bar = 0.5 * (st.s_c[l] + st.s_c[r]);
        let p_bar = 0.5 * (ca.pressure[l] + ca.pressure[r]);
        let (deff, cap, spacing) = if f == 0 {
            (coef.deff_interface, coef.cap_interface, spacing_if)
        } else {
            (coef.deff_gdl, coef.cap_gdl, dx)
        };
        let d = deff * (1.0 - s_bar) * (1.0 - s_bar) * diff(coef.d_c_times_p, p_bar);
        ca.j_v.push(gas_diffusion_flux(st.c_v_c[l], st.c_v_c[r], d, spacing));
        ca.j_gas
            .push(gas_diffusion_flux(st.c_o2_c[l], st.c_o2_c[r], d, spacing));
        ca.j_l.push(capillary_flow_with(st.s_c[l], st.s_c[r], cap, e, spacing));
    }
    {
        let p_bar = 0.5 * (ca.pressure[n] + p_cgc);
        let h = coef.sherwood_over_hgc * diff(coef.d_c_times_p, p_bar);
        ca.j_v.push(convective_boundary_flux(st.c_v_c[n], st.c_v_cgc, h));
        ca.j_gas.push(convective_boundary_flux(st.c_o2_c[n], st.c_o2_cgc, h));
        ca.j_l.push(0.0);
    }

    // Ionomer.
    let [l_acl, l_mem, l_ccl] = st.lambda;
    let j_acl = dissolved_water_flux(l_acl, l_mem, i_fc, params);
    let j_ccl = dissolved_water_flux(l_mem, l_ccl, i_fc, params);
    let s_sorp_acl = sorption_source(st.c_v_a[n], st.s_a[n], l_acl, t_fc, c_sat, params);
    let s_sorp_ccl = sorption_source(st.c_v_c[0], st.s_c[0], l_ccl, t_fc, c_sat, params);
    let rx = reaction_sources_with(i_fc, st.c_h2_a[n], st.c_o2_c[0], k_h2, k_o2, t_fc, params);
    let m = &params.membrane;
    let cap_cl = m.rho_mem * m.eps_mc / m.m_eq;
    let cap_mem = m.rho_mem / m.m_eq;
    let h_mem = params.geometry.h_mem;
    let dlambda = [
        (-j_acl / h_cl + s_sorp_acl + rx.s_p_acl) / cap_cl,
        (j_acl - j_ccl) / h_mem / cap_mem,
        (j_ccl / h_cl + s_sorp_ccl + rx.s_p_ccl) / cap_cl,
    ];

    let rho = params.water.rho_h2o;
    let m_h2o = params.constants.m_h2o;
    let gas_cap = |eps: f64, s: f64| (eps * (1.0 - s)).max(eps * GAS_CAPACITY_FLOOR);

    let mut d = MeaDerivatives {
        lambda: dlambda,
        s_a: vec![0.0; n + 1],
        c_v_a: vec![0.0; n + 1],
        c_h2_a: vec![0.0; n + 1],
        s_c: vec![0.0; n + 1],
        c_v_c: vec![0.0; n + 1],
        c_o2_c: vec![0.0; n + 1],
    };

    for k in 0..=n {
        let j_in_v = an.j_v[k];
        let j_out_v = if k == n { 0.0 } else { an.j_v[k + 1] };
        let j_in_g = an.j_gas[k];
        let j_out_g = if k == n { 0.0 } else { an.j_gas[k + 1] };
        let j_in_l = an.j_l[k];
        let j_out_l = if k == n { 0.0 } else { an.j_l[k + 1] };
        let th = thick_a(k);
        let eps = eps_a(k);
        let cap = gas_cap(eps, st.s_a[k]);
        let mut dv = (j_in_v - j_out_v) / th - an.s_vl[k];
        let mut dg = (j_in_g - j_out_g) / th;
        if k == n {
            dv -= s_sorp_acl;
            dg += rx.s_h2_acl;
        }
        d.c_v_a[k] = dv / cap;
        d.c_h2_a[k] = dg / cap;
        // The first anode GDL node is the liquid boundary.
        d.s_a[k] = if k == 0 {
            0.0
        } else {
            ((j_in_l - j_out_l) / th + m_h2o * an.s_vl[k]) / (rho * eps)
        };
    }
    for k in 0..=n {
        let j_in_v = if k == 0 { 0.0 } else { ca.j_v[k - 1] };
        let j_out_v = ca.j_v[k];
        let j_in_g = if k == 0 { 0.0 } else { ca.j_gas[k - 1] };
        let j_out_g = ca.j_gas[k];
        let j_in_l = if k == 0 { 0.0 } else { ca.j_l[k - 1] };
        let j_out_l = ca.j_l[k];
        let th = thick_c(k);
        let eps = eps_c(k);
        let cap = gas_cap(eps, st.s_c[k]);
        let mut dv = (j_in_v - j_out_v) / th - ca.s_vl[k];
        let mut dg = (j_in_g - j_out_g) / th;
        if k == 0 {
            dv -= s_sorp_ccl;
            dg += rx.s_o2_ccl;
        }
        d.c_v_c[k] = dv / cap;
        d.c_o2_c[k] = dg / cap;
        d.s_c[k] = if k == n {
            0.0
        } else {
            ((j_in_l - j_out_l) / th + m_h2o * ca.s_vl[k]) / (rho * eps)
        };
    }

    let mut channel = inflow;
    channel.j_v_agc_agdl = an.j_v[0];
    channel.j_h2_agc_agdl = an.j_gas[0];
    channel.j_v_cgdl_cgc = ca.j_v[n];
    channel.j_o2_cgdl_cgc = ca.j_gas[n];
    terms.channel = channel;
    terms.channel_derivatives = gc_species_balances(&channel, params);
    terms.j_lambda_mem_acl = j_acl;
    terms.j_lambda_mem_ccl = j_ccl;
    terms.s_sorp_acl = s_sorp_acl;
    terms.s_sorp_ccl = s_sorp_ccl;
    terms.reactions = rx;
    Ok(d)
}

/// Precomputed coefficients of the discretized MEA.
#[derive(Debug, Clone, PartialEq)]
pub struct MeaGeometry {
    pub n: usize,
    pub dx: f64,
    pub t_fc: f64,
    pub rt: f64,
    pub c_v_sat: f64,
    pub cap_gdl: f64,
    pub cap_interface: f64,
    pub deff_gdl: f64,
    pub deff_interface: f64,
    pub d_a_times_p: f64,
    pub d_c_times_p: f64,
    pub sherwood_over_hgc: f64,
}

fn node_name(anode: bool, k: usize, n: usize) -> String {
    match (anode, k) {
        (true, k) if k == n => "acl".into(),
        (true, k) => format!("agdl_{}", k + 1),
        (false, 0) => "ccl".into(),
        (false, k) => format!("cgdl_{k}"),
    }
}
