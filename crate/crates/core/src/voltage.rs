//! Cell voltage from the internal state.

use crate::error::{ModelError, Result};
use crate::params::{OperatingConditions, ParameterSet};
use crate::transport::{membrane_permeation, Gas};

/// Pa per bar, for the saturation limit law whose coefficients are in bar.
const PA_PER_BAR: f64 = 1e5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturationLimits {
    pub s_lim: f64,
    pub s_switch: f64,
}

/// Liquid saturation limit and switch point for a desired pressure in Pa.
pub fn limit_saturations(p_des: f64, a_slim: f64, b_slim: f64, a_switch: f64) -> Result<SaturationLimits> {
    let s_lim = a_slim * p_des / PA_PER_BAR + b_slim;
    let s_switch = a_switch * s_lim;
    if !(s_lim > 0.0 && s_lim < 1.0) {
        return Err(ModelError::InvalidParameter {
            name: "s_lim",
            value: s_lim,
            reason: "limit saturation must lie in (0, 1)",
        });
    }
    if !(s_switch > 0.0 && s_switch < s_lim) {
        return Err(ModelError::InvalidParameter {
            name: "a_switch",
            value: a_switch,
            reason: "switch saturation must lie in (0, s_lim)",
        });
    }
    Ok(SaturationLimits { s_lim, s_switch })
}

/// Liquid-water induced voltage drop factor in (0, 1].
pub fn voltage_drop_function(s_ccl: f64, s_lim: f64, s_switch: f64) -> Result<f64> {
    if !(s_switch < s_lim) {
        return Err(ModelError::InvalidParameter {
            name: "s_switch",
            value: s_switch,
            reason: "must be below s_lim",
        });
    }
    let x = (4.0 * s_ccl - 2.0 * s_lim - 2.0 * s_switch) / (s_lim - s_switch);
    // Same as (1 - tanh x) / 2 without cancellation for large x.
    Ok(1.0 / (1.0 + (2.0 * x).exp()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossoverCurrents {
    pub i_co_h2: f64,
    pub i_co_o2: f64,
    pub i_n: f64,
}

/// Internal current densities from gas crossover, A/m2.
pub fn crossover_currents(
    lambda_mem: f64,
    t_fc: f64,
    c_h2_acl: f64,
    c_o2_ccl: f64,
    kappa_co: f64,
    params: &ParameterSet,
) -> CrossoverCurrents {
    let k_h2 = membrane_permeation(Gas::H2, lambda_mem, t_fc, kappa_co, params);
    let k_o2 = membrane_permeation(Gas::O2, lambda_mem, t_fc, kappa_co, params);
    crossover_from_permeability(k_h2, k_o2, t_fc, c_h2_acl, c_o2_ccl, params)
}

pub fn crossover_from_permeability(
    k_h2: f64,
    k_o2: f64,
    t_fc: f64,
    c_h2_acl: f64,
    c_o2_ccl: f64,
    params: &ParameterSet,
) -> CrossoverCurrents {
    let f = params.constants.f;
    let rt = params.constants.r * t_fc;
    let i_co_h2 = 2.0 * f * k_h2 * rt * c_h2_acl;
    let i_co_o2 = 4.0 * f * k_o2 * rt * c_o2_ccl;
    CrossoverCurrents {
        i_co_h2,
        i_co_o2,
        i_n: i_co_h2 + i_co_o2,
    }
}

fn require_positive(species: &'static str, c: f64, i_fc: f64) -> Result<()> {
    if c > 0.0 {
        Ok(())
    } else {
        Err(ModelError::Starvation {
            species,
            value: c,
            i_fc,
        })
    }
}

/// Reversible potential, V.
pub fn equilibrium_potential(t_fc: f64, c_h2_acl: f64, c_o2_ccl: f64, i_fc: f64, params: &ParameterSet) -> Result<f64> {
    require_positive("H2", c_h2_acl, i_fc)?;
    require_positive("O2", c_o2_ccl, i_fc)?;
    let k = &params.kinetics;
    let rt = params.constants.r * t_fc;
    Ok(k.e0 - 8.5e-4 * (t_fc - 298.15)
        + rt / (2.0 * params.constants.f) * ((rt * c_h2_acl / k.p_ref).ln() + 0.5 * (rt * c_o2_ccl / k.p_ref).ln()))
}

/// Cathode activation overpotential including the liquid-water drop, V.
pub fn overpotential(i_fc: f64, i_n: f64, c_o2_ccl: f64, f_drop: f64, t_fc: f64, params: &ParameterSet) -> Result<f64> {
    let i = i_fc + i_n;
    if !(i > 0.0) {
        return Err(ModelError::Domain {
            what: "current density",
            detail: format!("i_fc + i_n = {i} A/m2 must be positive"),
        });
    }
    require_positive("O2", c_o2_ccl, i_fc)?;
    let k = &params.kinetics;
    let eta = 1.0 / f_drop * params.constants.r * t_fc / (k.alpha_c * params.constants.f)
        * (i / k.i0_c_ref * (k.c_o2_ref / c_o2_ccl).powf(k.kappa_c)).ln();
    if !eta.is_finite() {
        return Err(ModelError::Domain {
            what: "overpotential",
            detail: format!("non-finite value with f_drop = {f_drop}"),
        });
    }
    Ok(eta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtonResistance {
    pub r_mem: f64,
    pub r_ccl: f64,
    pub r_p: f64,
}

fn conductivity(lambda: f64, t_fc: f64) -> f64 {
    let base = if lambda >= 1.0 { 0.5139 * lambda - 0.326 } else { 0.1879 };
    base * (1268.0 * (1.0 / 303.15 - 1.0 / t_fc)).exp()
}

/// Ionic resistances of the membrane and cathode catalyst layer, ohm m2.
pub fn proton_resistance(
    lambda_mem: f64,
    lambda_ccl: f64,
    t_fc: f64,
    h_mem: f64,
    h_cl: f64,
    eps_mc: f64,
    tau: f64,
) -> ProtonResistance {
    let r_mem = h_mem / conductivity(lambda_mem, t_fc);
    let r_ccl = h_cl / (eps_mc.powf(tau) * conductivity(lambda_ccl, t_fc));
    ProtonResistance {
        r_mem,
        r_ccl,
        r_p: r_mem + r_ccl,
    }
}

/// State values the voltage depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoltageInputs {
    pub i_fc: f64,
    pub lambda_mem: f64,
    pub lambda_ccl: f64,
    pub s_ccl: f64,
    pub c_h2_acl: f64,
    pub c_o2_ccl: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoltageBreakdown {
    pub u_eq: f64,
    pub eta_c: f64,
    pub r_mem: f64,
    pub r_ccl: f64,
    pub r_p: f64,
    pub i_n: f64,
    pub i_co_h2: f64,
    pub i_co_o2: f64,
    pub f_drop: f64,
    pub s_lim: f64,
    pub s_switch: f64,
    pub u_cell: f64,
    /// Set when the total current is exactly zero and the overpotential
    /// was taken as zero.
    pub open_circuit: bool,
}

impl VoltageBreakdown {
    pub const FIELDS: [&'static str; 12] = [
        "U_eq", "eta_c", "R_mem", "R_ccl", "R_p", "i_n", "i_co_H2", "i_co_O2", "f_drop", "s_lim", "s_switch", "U_cell",
    ];

    pub fn values(&self) -> [f64; 12] {
        [
            self.u_eq,
            self.eta_c,
            self.r_mem,
            self.r_ccl,
            self.r_p,
            self.i_n,
            self.i_co_h2,
            self.i_co_o2,
            self.f_drop,
            self.s_lim,
            self.s_switch,
            self.u_cell,
        ]
    }
}

/// Cell voltage and all intermediate terms.
pub fn cell_voltage(inp: &VoltageInputs, params: &ParameterSet, oc: &OperatingConditions) -> Result<VoltageBreakdown> {
    let t = oc.t_fc;
    let v = &params.voltage;
    let lim = limit_saturations(oc.p_c_des, v.a_slim, v.b_slim, v.a_switch)?;
    let f_drop = voltage_drop_function(inp.s_ccl, lim.s_lim, lim.s_switch)?;
    let co = crossover_currents(
        inp.lambda_mem,
        t,
        inp.c_h2_acl,
        inp.c_o2_ccl,
        params.kinetics.kappa_co,
        params,
    );
    let u_eq = equilibrium_potential(t, inp.c_h2_acl, inp.c_o2_ccl, inp.i_fc, params)?;
    let open_circuit = inp.i_fc + co.i_n == 0.0;
    let eta_c = if open_circuit {
        0.0
    } else {
        overpotential(inp.i_fc, co.i_n, inp.c_o2_ccl, f_drop, t, params)?
    };
    let g = &params.geometry;
    let m = &params.membrane;
    let r = proton_resistance(inp.lambda_mem, inp.lambda_ccl, t, g.h_mem, g.h_cl, m.eps_mc, m.tau);
    let u_cell = u_eq - eta_c - inp.i_fc * (r.r_p + v.r_e);
    Ok(VoltageBreakdown {
        u_eq,
        eta_c,
        r_mem: r.r_mem,
        r_ccl: r.r_ccl,
        r_p: r.r_p,
        i_n: co.i_n,
        i_co_h2: co.i_co_h2,
        i_co_o2: co.i_co_o2,
        f_drop,
        s_lim: lim.s_lim,
        s_switch: lim.s_switch,
        u_cell,
        open_circuit,
    })
}
