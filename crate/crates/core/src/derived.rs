//! Quantities reported alongside the state: voltage, channel composition,
//! auxiliary flows and water inventory.

use crate::error::Result;
use crate::layout::StateBlocks;
use crate::model::{Evaluation, FuelCellModel};
use crate::profile::A_PER_M2_PER_A_PER_CM2;
use crate::transport::saturation_pressure;
use crate::voltage::{cell_voltage, VoltageBreakdown, VoltageInputs};

/// Manifold humidity above which a warning is attached.
pub const HUMIDITY_WARNING: f64 = 1.05;

#[derive(Debug, Clone, PartialEq)]
pub struct DerivedQuantities {
    pub t: f64,
    /// Current density in A/m2.
    pub i_fc: f64,
    pub voltage: Option<VoltageBreakdown>,
    pub voltage_error: Option<String>,
    pub p_agc: f64,
    pub p_cgc: f64,
    pub phi_agc: f64,
    pub phi_cgc: f64,
    pub y_o2_cgc: f64,
    /// Largest cathode vapor concentration (CL, GDL nodes and channel)
    /// divided by the saturation concentration.
    pub max_cathode_vapor_ratio: f64,
    /// Manifold minus channel pressure on each side, in Pa.
    pub dp_asm_agc: f64,
    pub dp_agc_aem: f64,
    pub dp_csm_cgc: f64,
    pub dp_cgc_cem: f64,
    pub w_asm_in: f64,
    pub w_are: f64,
    pub w_cem_out: f64,
    pub w_v_csm_in: f64,
    /// Water held by one cell per unit active area, in mol/m2.
    pub water_inventory: f64,
    pub warnings: Vec<String>,
}

impl DerivedQuantities {
    /// CSV column names for [`Self::row`].
    pub fn columns() -> Vec<&'static str> {
        let mut c = vec!["i_fc_A_per_cm2"];
        c.extend(VoltageBreakdown::FIELDS);
        c.extend([
            "P_agc",
            "P_cgc",
            "Phi_agc",
            "Phi_cgc",
            "y_O2_cgc",
            "max_cathode_Cv_over_Cv_sat",
            "dP_asm_agc",
            "dP_agc_aem",
            "dP_csm_cgc",
            "dP_cgc_cem",
            "W_asm_in",
            "W_are",
            "W_cem_out",
            "W_v_csm_in",
            "water_inventory",
        ]);
        c
    }

    /// Values matching [`Self::columns`]. Voltage fields are NaN when the
    /// voltage could not be evaluated.
    pub fn row(&self) -> Vec<f64> {
        let mut r = vec![self.i_fc / A_PER_M2_PER_A_PER_CM2];
        match &self.voltage {
            Some(v) => r.extend(v.values()),
            None => r.extend([f64::NAN; 12]),
        }
        r.extend([
            self.p_agc,
            self.p_cgc,
            self.phi_agc,
            self.phi_cgc,
            self.y_o2_cgc,
            self.max_cathode_vapor_ratio,
            self.dp_asm_agc,
            self.dp_agc_aem,
            self.dp_csm_cgc,
            self.dp_cgc_cem,
            self.w_asm_in,
            self.w_are,
            self.w_cem_out,
            self.w_v_csm_in,
            self.water_inventory,
        ]);
        r
    }

    pub fn u_cell(&self) -> Option<f64> {
        self.voltage.as_ref().map(|v| v.u_cell)
    }
}

/// Water held by one cell per unit active area (ionomer, vapor, liquid and
/// channel vapor), in mol/m2.
pub fn water_inventory(model: &FuelCellModel, st: &StateBlocks) -> f64 {
    let p = model.params();
    let l = model.layout();
    let g = &p.geometry;
    let mem = &p.membrane;
    let por = &p.porous;
    let liquid = p.water.rho_h2o / p.constants.m_h2o;
    let ionomer = mem.rho_mem / mem.m_eq;
    let dx = l.dx_gdl;

    let mut total = ionomer * (mem.eps_mc * g.h_cl * (st.lambda_acl + st.lambda_ccl) + g.h_mem * st.lambda_mem);
    let pore = |eps: f64, s: f64, c_v: f64, th: f64| eps * th * (liquid * s + (1.0 - s) * c_v);
    for (s, c) in st.s_agdl.iter().zip(&st.c_v_agdl) {
        total += pore(por.eps_gdl, *s, *c, dx);
    }
    for (s, c) in st.s_cgdl.iter().zip(&st.c_v_cgdl) {
        total += pore(por.eps_gdl, *s, *c, dx);
    }
    total += pore(por.eps_cl, st.s_acl, st.c_v_acl, g.h_cl);
    total += pore(por.eps_cl, st.s_ccl, st.c_v_ccl, g.h_cl);
    total += g.h_gc * (st.c_v_agc + st.c_v_cgc);
    total
}

/// Evaluate the reported quantities at one state.
pub fn derive(model: &FuelCellModel, t: f64, y: &[f64]) -> Result<DerivedQuantities> {
    let i_fc = model.profile().at(t);
    let ev = model.evaluate(y, i_fc)?;
    derive_from(model, t, y, &ev)
}

/// As [`derive`], reusing an evaluation already computed at `y`.
pub fn derive_from(model: &FuelCellModel, t: f64, y: &[f64], ev: &Evaluation) -> Result<DerivedQuantities> {
    let l = model.layout();
    let st = StateBlocks::unpack(y, l)?;
    let p_sat = saturation_pressure(model.operating().t_fc)?;
    let c_sat = model.saturation_concentration();

    let inputs = VoltageInputs {
        i_fc: ev.i_fc,
        lambda_mem: st.lambda_mem,
        lambda_ccl: st.lambda_ccl,
        s_ccl: st.s_ccl,
        c_h2_acl: st.c_h2_acl,
        c_o2_ccl: st.c_o2_ccl,
    };
    let (voltage, voltage_error) = match cell_voltage(&inputs, model.params(), model.operating()) {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    };

    let max_cathode = std::iter::once(st.c_v_ccl)
        .chain(st.c_v_cgdl.iter().copied())
        .chain(std::iter::once(st.c_v_cgc))
        .fold(f64::NEG_INFINITY, f64::max);

    let b = &st.bop;
    let mut warnings = Vec::new();
    for (name, phi) in [
        ("Phi_asm", b.phi_asm),
        ("Phi_aem", b.phi_aem),
        ("Phi_csm", b.phi_csm),
        ("Phi_cem", b.phi_cem),
    ] {
        if phi > HUMIDITY_WARNING {
            warnings.push(format!("{name} = {phi:.4} exceeds {HUMIDITY_WARNING}"));
        }
    }
    if let Some(e) = &voltage_error {
        warnings.push(e.clone());
    }

    let gc = &ev.gc;
    Ok(DerivedQuantities {
        t,
        i_fc: ev.i_fc,
        voltage,
        voltage_error,
        p_agc: gc.p_agc,
        p_cgc: gc.p_cgc,
        phi_agc: gc.x_v_agc * gc.p_agc / p_sat,
        phi_cgc: gc.x_v_cgc * gc.p_cgc / p_sat,
        y_o2_cgc: gc.y_o2_cgc,
        max_cathode_vapor_ratio: max_cathode / c_sat,
        dp_asm_agc: b.p_asm - gc.p_agc,
        dp_agc_aem: gc.p_agc - b.p_aem,
        dp_csm_cgc: b.p_csm - gc.p_cgc,
        dp_cgc_cem: gc.p_cgc - b.p_cem,
        w_asm_in: ev.bop.w_asm_in,
        w_are: ev.bop.w_are,
        w_cem_out: ev.bop.w_cem_out,
        w_v_csm_in: ev.bop.w_v_csm_in,
        water_inventory: water_inventory(model, &st),
        warnings,
    })
}
