//! Transport and material coefficients.
//!
//! Pure functions of the local state. All inputs are SI.

use crate::error::{ModelError, Result};
use crate::params::ParameterSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Anode,
    Cathode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SorptionDirection {
    Absorption,
    Desorption,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gas {
    H2,
    O2,
}

pub fn water_activity(c_v: f64, c_v_sat: f64, s: f64) -> Result<f64> {
    if !(c_v_sat > 0.0) {
        return Err(ModelError::Domain {
            what: "saturation concentration",
            detail: format!("{c_v_sat} must be positive"),
        });
    }
    Ok(c_v / c_v_sat + 2.0 * s)
}

/// Sorption isotherm with the smooth extension above `a_w = 1`.
pub fn equilibrium_water_content(a_w: f64, k_shape: f64) -> f64 {
    let sw = (100.0 * (a_w - 1.0)).tanh();
    let vapor = 0.300 + 10.8 * a_w - 16.0 * a_w * a_w + 14.1 * a_w * a_w * a_w;
    let liquid = 9.2 + 8.6 * (1.0 - (-k_shape * (a_w - 1.0)).exp());
    0.5 * vapor * (1.0 - sw) + 0.5 * liquid * (1.0 + sw)
}

pub fn membrane_water_diffusivity(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(ModelError::Domain {
            what: "water content",
            detail: format!("lambda = {lambda} must be positive"),
        });
    }
    Ok(diffusivity_unchecked(lambda))
}

pub(crate) fn diffusivity_unchecked(lambda: f64) -> f64 {
    4.1e-10 * (lambda / 25.0).powf(0.15) * (1.0 + ((lambda - 2.5) / 1.4).tanh())
}

pub fn ionomer_volume_fraction(lambda: f64, v_w: f64, v_mem: f64) -> f64 {
    lambda * v_w / (v_mem + lambda * v_w)
}

pub fn sorption_rate(lambda: f64, t_fc: f64, direction: SorptionDirection, h_cl: f64, v_w: f64, v_mem: f64) -> f64 {
    let k = match direction {
        SorptionDirection::Absorption => 1.14e-5,
        SorptionDirection::Desorption => 4.59e-5,
    };
    let f_v = ionomer_volume_fraction(lambda, v_w, v_mem);
    k * f_v / h_cl * (2416.0 * (1.0 / 303.0 - 1.0 / t_fc)).exp()
}

/// Intrinsic permeability of a fibrous layer of porosity `eps`.
pub fn intrinsic_permeability(eps: f64, params: &ParameterSet) -> Result<f64> {
    let p = &params.porous;
    if !(eps > p.eps_p) || !(eps < 1.0) {
        return Err(ModelError::Domain {
            what: "porosity",
            detail: format!("eps = {eps} must lie in (eps_p = {}, 1)", p.eps_p),
        });
    }
    let ln = eps.ln();
    let num = (eps - p.eps_p).powf(p.alpha + 2.0) * p.r_f * p.r_f;
    let den = (1.0 - p.eps_p).powf(p.alpha) * ((p.alpha + 1.0) * eps - p.eps_p).powi(2);
    Ok(eps / (8.0 * ln * ln) * num / den * (p.beta1 * p.eps_c).exp())
}

pub fn surface_tension(t_fc: f64) -> Result<f64> {
    if !(t_fc < 647.15) {
        return Err(ModelError::Domain {
            what: "temperature",
            detail: format!("T = {t_fc} K is at or above the critical point"),
        });
    }
    let x = (647.15 - t_fc) / 647.15;
    Ok(235.8e-3 * x.powf(1.256) * (1.0 - 0.625 * x))
}

pub fn binary_diffusivity(side: Side, p: f64, t_fc: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(ModelError::Domain {
            what: "pressure",
            detail: format!("P = {p} Pa must be positive"),
        });
    }
    Ok(binary_diffusivity_unchecked(side, p, t_fc))
}

pub(crate) fn binary_diffusivity_unchecked(side: Side, p: f64, t_fc: f64) -> f64 {
    let d0 = match side {
        Side::Anode => 1.644e-4,
        Side::Cathode => 3.242e-5,
    };
    d0 * (t_fc / 333.0).powf(2.334) * (101325.0 / p)
}

/// Porosity, percolation, compression and saturation correction applied to
/// the binary diffusivity. `D_eff = factor * D`.
pub(crate) fn effective_factor(s: f64, eps: f64, params: &ParameterSet) -> f64 {
    let p = &params.porous;
    let one_minus_s = 1.0 - s;
    eps * ((eps - p.eps_p) / (1.0 - p.eps_p)).powf(p.alpha) * one_minus_s * one_minus_s * (p.beta2 * p.eps_c).exp()
}

pub fn effective_diffusivity(side: Side, s: f64, eps: f64, p: f64, t_fc: f64, params: &ParameterSet) -> Result<f64> {
    if !(eps > params.porous.eps_p) || !(eps < 1.0) {
        return Err(ModelError::Domain {
            what: "porosity",
            detail: format!("eps = {eps} must lie in (eps_p, 1)"),
        });
    }
    Ok(effective_factor(s, eps, params) * binary_diffusivity(side, p, t_fc)?)
}

pub fn sherwood_number(w_gc: f64, h_gc: f64) -> f64 {
    0.9247 * (w_gc / h_gc).ln() + 2.3787
}

pub fn convective_mass_transfer(side: Side, p: f64, t_fc: f64, w_gc: f64, h_gc: f64) -> Result<f64> {
    if !(w_gc > 0.0) || !(h_gc > 0.0) {
        return Err(ModelError::Domain {
            what: "channel geometry",
            detail: format!("W_gc = {w_gc}, H_gc = {h_gc} must be positive"),
        });
    }
    Ok(sherwood_number(w_gc, h_gc) * binary_diffusivity(side, p, t_fc)? / h_gc)
}

/// Gas permeability of the membrane, mol/(m s Pa).
pub fn membrane_permeation(gas: Gas, lambda: f64, t_fc: f64, kappa_co: f64, params: &ParameterSet) -> f64 {
    let k = &params.kinetics;
    let w = &params.water;
    let r = params.constants.r;
    let arrhenius = |e_act: f64| (e_act / r * (1.0 / k.t_ref - 1.0 / t_fc)).exp();
    let f_v = ionomer_volume_fraction(lambda, w.v_w, w.v_mem);
    match (gas, lambda < 17.6) {
        (Gas::H2, true) => kappa_co * (0.29 + 2.2 * f_v) * 1e-14 * arrhenius(k.e_act_h2_v),
        (Gas::H2, false) => kappa_co * 1.8e-14 * arrhenius(k.e_act_h2_l),
        (Gas::O2, true) => kappa_co * (0.11 + 1.9 * f_v) * 1e-14 * arrhenius(k.e_act_o2_v),
        (Gas::O2, false) => kappa_co * 1.2e-14 * arrhenius(k.e_act_o2_l),
    }
}

/// Vapor saturation pressure, Pa. Valid for 200 K to 600 K.
pub fn saturation_pressure(t: f64) -> Result<f64> {
    if !(200.0..=600.0).contains(&t) {
        return Err(ModelError::Domain {
            what: "temperature",
            detail: format!("T = {t} K outside [200, 600] K for the saturation correlation"),
        });
    }
    let c = t - 273.15;
    Ok(101325.0 * 10f64.powf(-2.1794 + 0.02953 * c - 9.1837e-5 * c * c + 1.4454e-7 * c * c * c))
}

pub fn saturation_concentration(t: f64, r: f64) -> Result<f64> {
    Ok(saturation_pressure(t)? / (r * t))
}
