//! Node layout and the flat state-vector index map.
//!
//! Order of the flat vector:
//! `lambda[acl, mem, ccl]`,
//! `s[agdl_2..agdl_n, acl, ccl, cgdl_1..cgdl_{n-1}]`,
//! `C_v[agc, agdl_1..n, acl, ccl, cgdl_1..n, cgc]`,
//! `C_H2[agc, agdl_1..n, acl]`, `C_O2[ccl, cgdl_1..n, cgc]`, `C_N2`,
//! then the eleven balance-of-plant states.
//!
//! The liquid saturation at `agdl_1` and `cgdl_n` is held at zero and is not
//! part of the vector.

use std::ops::Range;

use crate::error::{ModelError, Result};
use crate::params::ParameterSet;

pub const N_BOP: usize = 11;

/// Positions inside the balance-of-plant block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BopSlot {
    PAsm = 0,
    PAem,
    PhiAsm,
    PhiAem,
    PCsm,
    PCem,
    PhiCsm,
    PhiCem,
    WCp,
    WCInj,
    ABpC,
}

const BOP_NAMES: [&str; N_BOP] = [
    "P_asm", "P_aem", "Phi_asm", "Phi_aem", "P_csm", "P_cem", "Phi_csm", "Phi_cem", "W_cp", "W_c_inj", "A_bp_c",
];

/// Kind of quantity stored in a slot, used for tolerances and scaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    WaterContent,
    Saturation,
    Concentration,
    Pressure,
    Humidity,
    MassFlow,
    Area,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizationLayout {
    pub n_gdl: usize,
    pub dx_gdl: f64,
    pub h_cl: f64,
    pub h_mem: f64,
    s_off: usize,
    cv_off: usize,
    ch2_off: usize,
    co2_off: usize,
    cn2_off: usize,
    bop_off: usize,
    pub total_len: usize,
}

impl DiscretizationLayout {
    /// Layout with `n_gdl = floor(H_gdl / (2 H_cl))` unless overridden.
    pub fn build(params: &ParameterSet, n_gdl_override: Option<usize>) -> Result<Self> {
        let g = &params.geometry;
        let n = match n_gdl_override {
            Some(n) => n,
            None => (g.h_gdl / (2.0 * g.h_cl)).floor() as usize,
        };
        if n < 2 {
            return Err(ModelError::Discretization {
                n_gdl: n,
                h_gdl: g.h_gdl,
                h_cl: g.h_cl,
            });
        }
        Ok(Self::with_nodes(n, g.h_gdl, g.h_cl, g.h_mem))
    }

    pub fn with_nodes(n: usize, h_gdl: f64, h_cl: f64, h_mem: f64) -> Self {
        assert!(n >= 2, "n_gdl must be at least 2");
        let s_off = 3;
        let cv_off = s_off + 2 * n;
        let ch2_off = cv_off + 2 * n + 4;
        let co2_off = ch2_off + n + 2;
        let cn2_off = co2_off + n + 2;
        let bop_off = cn2_off + 1;
        Self {
            n_gdl: n,
            dx_gdl: h_gdl / n as f64,
            h_cl,
            h_mem,
            s_off,
            cv_off,
            ch2_off,
            co2_off,
            cn2_off,
            bop_off,
            total_len: bop_off + N_BOP,
        }
    }

    pub fn lambda_acl(&self) -> usize {
        0
    }
    pub fn lambda_mem(&self) -> usize {
        1
    }
    pub fn lambda_ccl(&self) -> usize {
        2
    }
    /// Anode GDL node `i` in `2..=n`.
    pub fn s_agdl(&self, i: usize) -> usize {
        debug_assert!((2..=self.n_gdl).contains(&i));
        self.s_off + i - 2
    }
    pub fn s_acl(&self) -> usize {
        self.s_off + self.n_gdl - 1
    }
    pub fn s_ccl(&self) -> usize {
        self.s_off + self.n_gdl
    }
    /// Cathode GDL node `i` in `1..n`.
    pub fn s_cgdl(&self, i: usize) -> usize {
        debug_assert!((1..self.n_gdl).contains(&i));
        self.s_off + self.n_gdl + i
    }
    pub fn cv_agc(&self) -> usize {
        self.cv_off
    }
    /// `i` in `1..=n`.
    pub fn cv_agdl(&self, i: usize) -> usize {
        self.cv_off + i
    }
    pub fn cv_acl(&self) -> usize {
        self.cv_off + self.n_gdl + 1
    }
    pub fn cv_ccl(&self) -> usize {
        self.cv_off + self.n_gdl + 2
    }
    pub fn cv_cgdl(&self, i: usize) -> usize {
        self.cv_off + self.n_gdl + 2 + i
    }
    pub fn cv_cgc(&self) -> usize {
        self.cv_off + 2 * self.n_gdl + 3
    }
    pub fn ch2_agc(&self) -> usize {
        self.ch2_off
    }
    pub fn ch2_agdl(&self, i: usize) -> usize {
        self.ch2_off + i
    }
    pub fn ch2_acl(&self) -> usize {
        self.ch2_off + self.n_gdl + 1
    }
    pub fn co2_ccl(&self) -> usize {
        self.co2_off
    }
    pub fn co2_cgdl(&self, i: usize) -> usize {
        self.co2_off + i
    }
    pub fn co2_cgc(&self) -> usize {
        self.co2_off + self.n_gdl + 1
    }
    pub fn cn2(&self) -> usize {
        self.cn2_off
    }
    pub fn bop(&self, slot: BopSlot) -> usize {
        self.bop_off + slot as usize
    }

    /// Named contiguous ranges partitioning `0..total_len`.
    pub fn blocks(&self) -> Vec<(&'static str, Range<usize>)> {
        vec![
            ("lambda", 0..self.s_off),
            ("s", self.s_off..self.cv_off),
            ("C_v", self.cv_off..self.ch2_off),
            ("C_H2", self.ch2_off..self.co2_off),
            ("C_O2", self.co2_off..self.cn2_off),
            ("C_N2", self.cn2_off..self.bop_off),
            ("bop", self.bop_off..self.total_len),
        ]
    }

    pub fn quantity(&self, index: usize) -> Quantity {
        if index < self.s_off {
            Quantity::WaterContent
        } else if index < self.cv_off {
            Quantity::Saturation
        } else if index < self.bop_off {
            Quantity::Concentration
        } else {
            match index - self.bop_off {
                0 | 1 | 4 | 5 => Quantity::Pressure,
                2 | 3 | 6 | 7 => Quantity::Humidity,
                8 | 9 => Quantity::MassFlow,
                _ => Quantity::Area,
            }
        }
    }

    /// Human-readable name of every slot, in vector order.
    pub fn state_names(&self) -> Vec<String> {
        let n = self.n_gdl;
        let mut v = vec!["lambda_acl".into(), "lambda_mem".into(), "lambda_ccl".into()];
        v.extend((2..=n).map(|i| format!("s_agdl_{i}")));
        v.push("s_acl".into());
        v.push("s_ccl".into());
        v.extend((1..n).map(|i| format!("s_cgdl_{i}")));
        v.push("C_v_agc".into());
        v.extend((1..=n).map(|i| format!("C_v_agdl_{i}")));
        v.push("C_v_acl".into());
        v.push("C_v_ccl".into());
        v.extend((1..=n).map(|i| format!("C_v_cgdl_{i}")));
        v.push("C_v_cgc".into());
        v.push("C_H2_agc".into());
        v.extend((1..=n).map(|i| format!("C_H2_agdl_{i}")));
        v.push("C_H2_acl".into());
        v.push("C_O2_ccl".into());
        v.extend((1..=n).map(|i| format!("C_O2_cgdl_{i}")));
        v.push("C_O2_cgc".into());
        v.push("C_N2".into());
        v.extend(BOP_NAMES.iter().map(|s| s.to_string()));
        v
    }

    pub fn state_name(&self, index: usize) -> String {
        self.state_names()
            .into_iter()
            .nth(index)
            .unwrap_or_else(|| format!("y[{index}]"))
    }
}

/// Balance-of-plant states.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BopState {
    pub p_asm: f64,
    pub p_aem: f64,
    pub phi_asm: f64,
    pub phi_aem: f64,
    pub p_csm: f64,
    pub p_cem: f64,
    pub phi_csm: f64,
    pub phi_cem: f64,
    pub w_cp: f64,
    pub w_c_inj: f64,
    pub a_bp_c: f64,
}

impl BopState {
    fn to_array(self) -> [f64; N_BOP] {
        [
            self.p_asm,
            self.p_aem,
            self.phi_asm,
            self.phi_aem,
            self.p_csm,
            self.p_cem,
            self.phi_csm,
            self.phi_cem,
            self.w_cp,
            self.w_c_inj,
            self.a_bp_c,
        ]
    }

    fn from_slice(v: &[f64]) -> Self {
        Self {
            p_asm: v[0],
            p_aem: v[1],
            phi_asm: v[2],
            phi_aem: v[3],
            p_csm: v[4],
            p_cem: v[5],
            phi_csm: v[6],
            phi_cem: v[7],
            w_cp: v[8],
            w_c_inj: v[9],
            a_bp_c: v[10],
        }
    }
}

/// Structured view of a state vector. GDL arrays are indexed by node,
/// `[0]` being node 1. `s_agdl[0]` and `s_cgdl[n-1]` are the fixed
/// boundary saturations and must be zero.
#[derive(Debug, Clone, PartialEq)]
pub struct StateBlocks {
    pub lambda_acl: f64,
    pub lambda_mem: f64,
    pub lambda_ccl: f64,
    pub s_agdl: Vec<f64>,
    pub s_acl: f64,
    pub s_ccl: f64,
    pub s_cgdl: Vec<f64>,
    pub c_v_agc: f64,
    pub c_v_agdl: Vec<f64>,
    pub c_v_acl: f64,
    pub c_v_ccl: f64,
    pub c_v_cgdl: Vec<f64>,
    pub c_v_cgc: f64,
    pub c_h2_agc: f64,
    pub c_h2_agdl: Vec<f64>,
    pub c_h2_acl: f64,
    pub c_o2_ccl: f64,
    pub c_o2_cgdl: Vec<f64>,
    pub c_o2_cgc: f64,
    pub c_n2: f64,
    pub bop: BopState,
}

impl StateBlocks {
    pub fn zeros(n: usize) -> Self {
        Self {
            lambda_acl: 0.0,
            lambda_mem: 0.0,
            lambda_ccl: 0.0,
            s_agdl: vec![0.0; n],
            s_acl: 0.0,
            s_ccl: 0.0,
            s_cgdl: vec![0.0; n],
            c_v_agc: 0.0,
            c_v_agdl: vec![0.0; n],
            c_v_acl: 0.0,
            c_v_ccl: 0.0,
            c_v_cgdl: vec![0.0; n],
            c_v_cgc: 0.0,
            c_h2_agc: 0.0,
            c_h2_agdl: vec![0.0; n],
            c_h2_acl: 0.0,
            c_o2_ccl: 0.0,
            c_o2_cgdl: vec![0.0; n],
            c_o2_cgc: 0.0,
            c_n2: 0.0,
            bop: BopState::default(),
        }
    }

    pub fn pack(&self, layout: &DiscretizationLayout) -> Result<Vec<f64>> {
        let n = layout.n_gdl;
        for (name, v) in [
            ("s_agdl", &self.s_agdl),
            ("s_cgdl", &self.s_cgdl),
            ("c_v_agdl", &self.c_v_agdl),
            ("c_v_cgdl", &self.c_v_cgdl),
            ("c_h2_agdl", &self.c_h2_agdl),
            ("c_o2_cgdl", &self.c_o2_cgdl),
        ] {
            if v.len() != n {
                return Err(ModelError::Config(format!(
                    "block {name} has {} nodes, layout has {n}",
                    v.len()
                )));
            }
        }
        if self.s_agdl[0] != 0.0 || self.s_cgdl[n - 1] != 0.0 {
            return Err(ModelError::Config(
                "boundary saturations s_agdl_1 and s_cgdl_n must be zero".into(),
            ));
        }
        let mut y = vec![0.0; layout.total_len];
        y[layout.lambda_acl()] = self.lambda_acl;
        y[layout.lambda_mem()] = self.lambda_mem;
        y[layout.lambda_ccl()] = self.lambda_ccl;
        for i in 2..=n {
            y[layout.s_agdl(i)] = self.s_agdl[i - 1];
        }
        y[layout.s_acl()] = self.s_acl;
        y[layout.s_ccl()] = self.s_ccl;
        for i in 1..n {
            y[layout.s_cgdl(i)] = self.s_cgdl[i - 1];
        }
        y[layout.cv_agc()] = self.c_v_agc;
        y[layout.cv_acl()] = self.c_v_acl;
        y[layout.cv_ccl()] = self.c_v_ccl;
        y[layout.cv_cgc()] = self.c_v_cgc;
        y[layout.ch2_agc()] = self.c_h2_agc;
        y[layout.ch2_acl()] = self.c_h2_acl;
        y[layout.co2_ccl()] = self.c_o2_ccl;
        y[layout.co2_cgc()] = self.c_o2_cgc;
        for i in 1..=n {
            y[layout.cv_agdl(i)] = self.c_v_agdl[i - 1];
            y[layout.cv_cgdl(i)] = self.c_v_cgdl[i - 1];
            y[layout.ch2_agdl(i)] = self.c_h2_agdl[i - 1];
            y[layout.co2_cgdl(i)] = self.c_o2_cgdl[i - 1];
        }
        y[layout.cn2()] = self.c_n2;
        let b = self.bop.to_array();
        let off = layout.bop(BopSlot::PAsm);
        y[off..off + N_BOP].copy_from_slice(&b);
        Ok(y)
    }

    pub fn unpack(y: &[f64], layout: &DiscretizationLayout) -> Result<Self> {
        if y.len() != layout.total_len {
            return Err(ModelError::LengthMismatch {
                expected: layout.total_len,
                got: y.len(),
            });
        }
        let n = layout.n_gdl;
        let mut st = Self::zeros(n);
        st.lambda_acl = y[layout.lambda_acl()];
        st.lambda_mem = y[layout.lambda_mem()];
        st.lambda_ccl = y[layout.lambda_ccl()];
        for i in 2..=n {
            st.s_agdl[i - 1] = y[layout.s_agdl(i)];
        }
        st.s_acl = y[layout.s_acl()];
        st.s_ccl = y[layout.s_ccl()];
        for i in 1..n {
            st.s_cgdl[i - 1] = y[layout.s_cgdl(i)];
        }
        st.c_v_agc = y[layout.cv_agc()];
        st.c_v_acl = y[layout.cv_acl()];
        st.c_v_ccl = y[layout.cv_ccl()];
        st.c_v_cgc = y[layout.cv_cgc()];
        st.c_h2_agc = y[layout.ch2_agc()];
        st.c_h2_acl = y[layout.ch2_acl()];
        st.c_o2_ccl = y[layout.co2_ccl()];
        st.c_o2_cgc = y[layout.co2_cgc()];
        for i in 1..=n {
            st.c_v_agdl[i - 1] = y[layout.cv_agdl(i)];
            st.c_v_cgdl[i - 1] = y[layout.cv_cgdl(i)];
            st.c_h2_agdl[i - 1] = y[layout.ch2_agdl(i)];
            st.c_o2_cgdl[i - 1] = y[layout.co2_cgdl(i)];
        }
        st.c_n2 = y[layout.cn2()];
        let off = layout.bop(BopSlot::PAsm);
        st.bop = BopState::from_slice(&y[off..off + N_BOP]);
        Ok(st)
    }
}
