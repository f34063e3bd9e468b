//! Parameter bundles and operating conditions.
//!
//! Defaults describe the EH-31 stack. Field names in configuration files are
//! the usual symbols (`H_gdl`, `eps_mc`, `k_sm_in`, ...).

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    #[serde(rename = "A_act")]
    pub a_act: f64,
    #[serde(rename = "H_mem")]
    pub h_mem: f64,
    #[serde(rename = "H_cl")]
    pub h_cl: f64,
    #[serde(rename = "H_gdl")]
    pub h_gdl: f64,
    #[serde(rename = "H_gc")]
    pub h_gc: f64,
    #[serde(rename = "W_gc")]
    pub w_gc: f64,
    #[serde(rename = "L_gc")]
    pub l_gc: f64,
    pub n_cell: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Membrane {
    pub rho_mem: f64,
    #[serde(rename = "M_eq")]
    pub m_eq: f64,
    pub eps_mc: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Porous {
    pub eps_gdl: f64,
    pub eps_cl: f64,
    /// GDL compression ratio.
    pub eps_c: f64,
    /// Percolation threshold porosity.
    pub eps_p: f64,
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    /// Fiber radius.
    pub r_f: f64,
    pub theta_c_gdl: f64,
    pub theta_c_cl: f64,
    /// Capillary exponent.
    pub e: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Kinetics {
    pub i0_c_ref: f64,
    pub kappa_c: f64,
    pub kappa_co: f64,
    pub alpha_c: f64,
    #[serde(rename = "E0")]
    pub e0: f64,
    #[serde(rename = "P_ref")]
    pub p_ref: f64,
    #[serde(rename = "C_O2_ref")]
    pub c_o2_ref: f64,
    /// Listed with the cell data; the voltage equations do not use it.
    #[serde(rename = "E_act")]
    pub e_act: f64,
    #[serde(rename = "E_act_H2_v")]
    pub e_act_h2_v: f64,
    #[serde(rename = "E_act_H2_l")]
    pub e_act_h2_l: f64,
    #[serde(rename = "E_act_O2_v")]
    pub e_act_o2_v: f64,
    #[serde(rename = "E_act_O2_l")]
    pub e_act_o2_l: f64,
    #[serde(rename = "T_ref")]
    pub t_ref: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Water {
    pub gamma_cond: f64,
    pub gamma_evap: f64,
    #[serde(rename = "K_shape")]
    pub k_shape: f64,
    #[serde(rename = "rho_H2O")]
    pub rho_h2o: f64,
    pub nu_l: f64,
    #[serde(rename = "V_w")]
    pub v_w: f64,
    #[serde(rename = "V_mem")]
    pub v_mem: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoltageParams {
    pub a_slim: f64,
    pub b_slim: f64,
    pub a_switch: f64,
    #[serde(rename = "R_e")]
    pub r_e: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bop {
    pub tau_cp: f64,
    pub tau_hum: f64,
    #[serde(rename = "K_p")]
    pub k_p: f64,
    #[serde(rename = "K_d")]
    pub k_d: f64,
    #[serde(rename = "C_D")]
    pub c_d: f64,
    pub k_sm_in: f64,
    pub k_sm_out: f64,
    pub k_em_in: f64,
    #[serde(rename = "V_sm")]
    pub v_sm: f64,
    #[serde(rename = "V_em")]
    pub v_em: f64,
    #[serde(rename = "A_T")]
    pub a_t: f64,
    pub k_purge: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constants {
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "gamma_H2")]
    pub gamma_h2: f64,
    pub gamma_a: f64,
    #[serde(rename = "M_H2")]
    pub m_h2: f64,
    #[serde(rename = "M_H2O")]
    pub m_h2o: f64,
    #[serde(rename = "M_O2")]
    pub m_o2: f64,
    #[serde(rename = "M_N2")]
    pub m_n2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ambient {
    #[serde(rename = "T_ext")]
    pub t_ext: f64,
    #[serde(rename = "P_ext")]
    pub p_ext: f64,
    #[serde(rename = "Phi_ext")]
    pub phi_ext: f64,
    #[serde(rename = "y_O2_ext")]
    pub y_o2_ext: f64,
}

/// Immutable bundle of all model parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterSet {
    pub geometry: Geometry,
    pub membrane: Membrane,
    pub porous: Porous,
    pub kinetics: Kinetics,
    pub water: Water,
    pub voltage: VoltageParams,
    pub bop: Bop,
    pub constants: Constants,
    pub ambient: Ambient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatingConditions {
    #[serde(rename = "T_fc")]
    pub t_fc: f64,
    #[serde(rename = "P_a_des")]
    pub p_a_des: f64,
    #[serde(rename = "P_c_des")]
    pub p_c_des: f64,
    #[serde(rename = "S_a")]
    pub s_a: f64,
    #[serde(rename = "S_c")]
    pub s_c: f64,
    #[serde(rename = "Phi_a_des")]
    pub phi_a_des: f64,
    #[serde(rename = "Phi_c_des")]
    pub phi_c_des: f64,
}

impl ParameterSet {
    pub fn eh31() -> Self {
        let m_h2o = 1.8e-2;
        let rho_h2o = 1000.0;
        let m_eq = 1.1;
        let rho_mem = 1980.0;
        Self {
            geometry: Geometry {
                a_act: 8.5e-3,
                h_mem: 2e-5,
                h_cl: 1e-5,
                h_gdl: 2e-4,
                h_gc: 5e-4,
                w_gc: 4.5e-4,
                l_gc: 9.67,
                n_cell: 5,
            },
            membrane: Membrane {
                rho_mem,
                m_eq,
                eps_mc: 0.399,
                tau: 1.02,
            },
            porous: Porous {
                eps_gdl: 0.701,
                eps_cl: 0.25,
                eps_c: 0.271,
                eps_p: 0.11,
                alpha: 0.785,
                beta1: -2.51,
                beta2: -2.0,
                r_f: 4e-6,
                theta_c_gdl: 2.0 * std::f64::consts::PI / 3.0,
                theta_c_cl: 1.66,
                e: 5.0,
            },
            kinetics: Kinetics {
                i0_c_ref: 2.79,
                kappa_c: 1.61,
                kappa_co: 27.2,
                alpha_c: 0.5,
                e0: 1.229,
                p_ref: 1e5,
                c_o2_ref: 3.39,
                e_act: 73.2e3,
                e_act_h2_v: 21e3,
                e_act_h2_l: 21e3,
                e_act_o2_v: 21e3,
                e_act_o2_l: 21e3,
                t_ref: 303.15,
            },
            water: Water {
                gamma_cond: 5e3,
                gamma_evap: 1e-4,
                k_shape: 2.0,
                rho_h2o,
                nu_l: 3.65e-7,
                v_w: m_h2o / rho_h2o,
                v_mem: m_eq / rho_mem,
            },
            voltage: VoltageParams {
                a_slim: 0.0555,
                b_slim: 0.1051,
                a_switch: 0.63654,
                r_e: 5.7e-7,
            },
            bop: Bop {
                tau_cp: 1.0,
                tau_hum: 5.0,
                k_p: 5e-8,
                k_d: 1e-8,
                c_d: 0.05,
                k_sm_in: 1e-5,
                k_sm_out: 8e-6,
                k_em_in: 8e-6,
                v_sm: 7e-3,
                v_em: 2.4e-3,
                a_t: 1.18e-3,
                k_purge: 0.0,
            },
            constants: Constants {
                f: 96485.0,
                r: 8.314,
                gamma_h2: 1.404,
                gamma_a: 1.401,
                m_h2: 2e-3,
                m_h2o,
                m_o2: 3.2e-2,
                m_n2: 2.8e-2,
            },
            ambient: Ambient {
                t_ext: 298.0,
                p_ext: 101325.0,
                phi_ext: 0.4,
                y_o2_ext: 0.2095,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.geometry;
        for (name, v) in [
            ("A_act", g.a_act),
            ("H_mem", g.h_mem),
            ("H_cl", g.h_cl),
            ("H_gdl", g.h_gdl),
            ("H_gc", g.h_gc),
            ("W_gc", g.w_gc),
            ("L_gc", g.l_gc),
            ("V_sm", self.bop.v_sm),
            ("V_em", self.bop.v_em),
            ("A_T", self.bop.a_t),
            ("rho_mem", self.membrane.rho_mem),
            ("M_eq", self.membrane.m_eq),
            ("r_f", self.porous.r_f),
            ("rho_H2O", self.water.rho_h2o),
            ("nu_l", self.water.nu_l),
            ("V_w", self.water.v_w),
            ("V_mem", self.water.v_mem),
            ("tau_cp", self.bop.tau_cp),
            ("tau_hum", self.bop.tau_hum),
            ("F", self.constants.f),
            ("R", self.constants.r),
            ("T_ext", self.ambient.t_ext),
            ("P_ext", self.ambient.p_ext),
            ("P_ref", self.kinetics.p_ref),
            ("C_O2_ref", self.kinetics.c_o2_ref),
            ("i0_c_ref", self.kinetics.i0_c_ref),
            ("alpha_c", self.kinetics.alpha_c),
            ("T_ref", self.kinetics.t_ref),
            ("M_H2", self.constants.m_h2),
            ("M_H2O", self.constants.m_h2o),
            ("M_O2", self.constants.m_o2),
            ("M_N2", self.constants.m_n2),
        ] {
            positive(name, v)?;
        }
        if g.n_cell < 1 {
            return Err(ModelError::InvalidParameter {
                name: "n_cell",
                value: g.n_cell as f64,
                reason: "must be at least 1",
            });
        }
        let p = &self.porous;
        for (name, v) in [
            ("eps_gdl", p.eps_gdl),
            ("eps_cl", p.eps_cl),
            ("eps_c", p.eps_c),
            ("eps_mc", self.membrane.eps_mc),
            ("eps_p", p.eps_p),
            ("y_O2_ext", self.ambient.y_o2_ext),
            ("a_switch", self.voltage.a_switch),
        ] {
            unit_open(name, v)?;
        }
        let phi = self.ambient.phi_ext;
        if !(0.0..1.0).contains(&phi) {
            return Err(ModelError::InvalidParameter {
                name: "Phi_ext",
                value: phi,
                reason: "must lie in [0, 1)",
            });
        }
        if p.eps_gdl <= p.eps_p {
            return Err(ModelError::InvalidParameter {
                name: "eps_gdl",
                value: p.eps_gdl,
                reason: "must exceed the percolation threshold eps_p",
            });
        }
        if p.eps_cl <= p.eps_p {
            return Err(ModelError::InvalidParameter {
                name: "eps_cl",
                value: p.eps_cl,
                reason: "must exceed the percolation threshold eps_p",
            });
        }
        for (name, v) in [
            ("K_p", self.bop.k_p),
            ("K_d", self.bop.k_d),
            ("k_purge", self.bop.k_purge),
            ("kappa_co", self.kinetics.kappa_co),
            ("R_e", self.voltage.r_e),
            ("gamma_cond", self.water.gamma_cond),
            ("gamma_evap", self.water.gamma_evap),
            ("k_sm_in", self.bop.k_sm_in),
            ("k_sm_out", self.bop.k_sm_out),
            ("k_em_in", self.bop.k_em_in),
            ("C_D", self.bop.c_d),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(ModelError::InvalidParameter {
                    name,
                    value: v,
                    reason: "must be non-negative and finite",
                });
            }
        }
        for (name, v) in [
            ("gamma_H2", self.constants.gamma_h2),
            ("gamma_a", self.constants.gamma_a),
        ] {
            if !(v > 1.0) {
                return Err(ModelError::InvalidParameter {
                    name,
                    value: v,
                    reason: "heat capacity ratio must exceed 1",
                });
            }
        }
        Ok(())
    }

    /// Parameters shared by every operating point except the ones the
    /// caller chooses to vary. Convenience for tests and sweeps.
    pub fn with<F: FnOnce(&mut Self)>(&self, f: F) -> Self {
        let mut p = self.clone();
        f(&mut p);
        p
    }
}

impl Default for ParameterSet {
    fn default() -> Self {
        Self::eh31()
    }
}

impl OperatingConditions {
    /// EH-31 nominal point with both desired pressures set to `p_des` (Pa).
    pub fn eh31(p_des: f64) -> Self {
        Self {
            t_fc: 347.15,
            p_a_des: p_des,
            p_c_des: p_des,
            s_a: 1.2,
            s_c: 2.0,
            phi_a_des: 0.4,
            phi_c_des: 0.6,
        }
    }

    pub fn validate(&self, params: &ParameterSet) -> Result<()> {
        if !(self.t_fc > 273.15) || !self.t_fc.is_finite() {
            return Err(ModelError::InvalidParameter {
                name: "T_fc",
                value: self.t_fc,
                reason: "must exceed 273.15 K",
            });
        }
        let p_ext = params.ambient.p_ext;
        for (name, v) in [("P_a_des", self.p_a_des), ("P_c_des", self.p_c_des)] {
            if !(v >= p_ext) || !v.is_finite() {
                return Err(ModelError::InvalidParameter {
                    name,
                    value: v,
                    reason: "must be at least P_ext",
                });
            }
        }
        for (name, v) in [("S_a", self.s_a), ("S_c", self.s_c)] {
            if !(v >= 1.0) || !v.is_finite() {
                return Err(ModelError::InvalidParameter {
                    name,
                    value: v,
                    reason: "stoichiometry must be at least 1",
                });
            }
        }
        for (name, v) in [("Phi_a_des", self.phi_a_des), ("Phi_c_des", self.phi_c_des)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ModelError::InvalidParameter {
                    name,
                    value: v,
                    reason: "must lie in [0, 1]",
                });
            }
        }
        Ok(())
    }
}

impl Default for OperatingConditions {
    fn default() -> Self {
        Self::eh31(2e5)
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            name,
            value: v,
            reason: "must be positive and finite",
        })
    }
}

fn unit_open(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            name,
            value: v,
            reason: "must lie in (0, 1)",
        })
    }
}
