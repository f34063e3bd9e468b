//! Initial state: zero current, mean pressure and humidity everywhere.

use crate::error::{ModelError, Result};
use crate::layout::{BopState, DiscretizationLayout, StateBlocks};
use crate::params::{OperatingConditions, ParameterSet};
use crate::transport::{equilibrium_water_content, saturation_pressure};

pub fn initial_blocks(params: &ParameterSet, oc: &OperatingConditions, n_gdl: usize) -> Result<StateBlocks> {
    let p_bar = 0.5 * (oc.p_a_des + oc.p_c_des);
    let phi_bar = 0.5 * (oc.phi_a_des + oc.phi_c_des);
    let p_sat = saturation_pressure(oc.t_fc)?;
    let vapor = phi_bar * p_sat;
    if vapor >= p_bar {
        return Err(ModelError::InfeasibleHumidity { vapor, pressure: p_bar });
    }
    let rt = params.constants.r * oc.t_fc;
    let c_v = vapor / rt;
    let c_dry = (p_bar - vapor) / rt;
    let y = params.ambient.y_o2_ext;
    let lambda = equilibrium_water_content(phi_bar, params.water.k_shape);

    let mut st = StateBlocks::zeros(n_gdl);
    st.lambda_acl = lambda;
    st.lambda_mem = lambda;
    st.lambda_ccl = lambda;
    st.c_v_agc = c_v;
    st.c_v_agdl.fill(c_v);
    st.c_v_acl = c_v;
    st.c_v_ccl = c_v;
    st.c_v_cgdl.fill(c_v);
    st.c_v_cgc = c_v;
    st.c_h2_agc = c_dry;
    st.c_h2_agdl.fill(c_dry);
    st.c_h2_acl = c_dry;
    st.c_o2_ccl = y * c_dry;
    st.c_o2_cgdl.fill(y * c_dry);
    st.c_o2_cgc = y * c_dry;
    st.c_n2 = (1.0 - y) * c_dry;
    st.bop = BopState {
        p_asm: oc.p_a_des,
        p_aem: oc.p_a_des,
        phi_asm: oc.phi_a_des,
        phi_aem: oc.phi_a_des,
        p_csm: oc.p_c_des,
        p_cem: oc.p_c_des,
        phi_csm: oc.phi_c_des,
        phi_cem: oc.phi_c_des,
        w_cp: 0.0,
        w_c_inj: 0.0,
        // Zero compressor flow at zero current: the valve passes nothing at
        // steady state, so it starts closed.
        a_bp_c: 0.0,
    };
    Ok(st)
}

/// Flat initial state vector for `layout`.
pub fn initialize_state(
    params: &ParameterSet,
    oc: &OperatingConditions,
    layout: &DiscretizationLayout,
) -> Result<Vec<f64>> {
    initial_blocks(params, oc, layout.n_gdl)?.pack(layout)
}
