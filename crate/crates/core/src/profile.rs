//! Piecewise-constant current density profiles with optional linear ramps.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

/// Current density in A/m2 per A/cm2.
pub const A_PER_M2_PER_A_PER_CM2: f64 = 1e4;

/// Segments `(t_start, i_fc)` in seconds and A/m2. The current before the
/// first segment is zero; each change is ramped linearly over `ramp` s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurrentProfile {
    segments: Vec<(f64, f64)>,
    ramp: f64,
}

/// Default ramp applied to current steps, s.
pub const DEFAULT_RAMP: f64 = 0.01;

impl CurrentProfile {
    pub fn new(segments: Vec<(f64, f64)>, ramp: f64) -> Result<Self> {
        if segments.is_empty() {
            return Err(ModelError::Config("current profile needs at least one segment".into()));
        }
        if segments[0].0 != 0.0 {
            return Err(ModelError::Config(format!(
                "first profile segment must start at t = 0, got {}",
                segments[0].0
            )));
        }
        for w in segments.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(ModelError::Config(format!(
                    "profile start times must increase strictly ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        for &(t, i) in &segments {
            if !(i >= 0.0) || !t.is_finite() || !i.is_finite() {
                return Err(ModelError::Config(format!("invalid profile segment ({t}, {i})")));
            }
        }
        if !(ramp >= 0.0) {
            return Err(ModelError::Config(format!("ramp must be non-negative, got {ramp}")));
        }
        if let Some(w) = segments.windows(2).find(|w| w[1].0 - w[0].0 < ramp) {
            return Err(ModelError::Config(format!(
                "segment starting at {} is shorter than the {ramp} s ramp",
                w[0].0
            )));
        }
        Ok(Self { segments, ramp })
    }

    /// Constant current from t = 0, with no ramp.
    pub fn constant(i_fc: f64) -> Self {
        Self {
            segments: vec![(0.0, i_fc)],
            ramp: 0.0,
        }
    }

    /// Steps of 0 to 0.5 A/cm2 at t = 0 and 0.5 to 1.5 A/cm2 at 500 s.
    pub fn double_step() -> Self {
        Self::new(
            vec![
                (0.0, 0.5 * A_PER_M2_PER_A_PER_CM2),
                (500.0, 1.5 * A_PER_M2_PER_A_PER_CM2),
            ],
            DEFAULT_RAMP,
        )
        .expect("valid built-in profile")
    }

    pub fn segments(&self) -> &[(f64, f64)] {
        &self.segments
    }

    pub fn ramp(&self) -> f64 {
        self.ramp
    }

    pub fn at(&self, t: f64) -> f64 {
        let k = match self.segments.iter().rposition(|&(ts, _)| ts <= t) {
            Some(k) => k,
            None => return 0.0,
        };
        let (ts, i) = self.segments[k];
        let before = if k == 0 { 0.0 } else { self.segments[k - 1].1 };
        if self.ramp > 0.0 && t < ts + self.ramp {
            before + (i - before) * (t - ts) / self.ramp
        } else {
            i
        }
    }

    /// Times where the profile or its slope changes, in increasing order.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for &(t, _) in &self.segments {
            out.push(t);
            if self.ramp > 0.0 {
                out.push(t + self.ramp);
            }
        }
        out
    }

    /// Parse `t:i,t:i,...` with times in s and currents in A/cm2.
    pub fn parse(text: &str, ramp: f64) -> Result<Self> {
        let mut segments = Vec::new();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (t, i) = part
                .split_once(':')
                .ok_or_else(|| ModelError::Config(format!("profile entry '{part}' is not of the form t:i")))?;
            let t: f64 = t
                .trim()
                .parse()
                .map_err(|_| ModelError::Config(format!("bad time in profile entry '{part}'")))?;
            let i: f64 = i
                .trim()
                .parse()
                .map_err(|_| ModelError::Config(format!("bad current in profile entry '{part}'")))?;
            segments.push((t, i * A_PER_M2_PER_A_PER_CM2));
        }
        Self::new(segments, ramp)
    }
}
