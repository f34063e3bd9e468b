//! Polarization curve samples, their CSV format and the maximum relative
//! voltage deviation between two curves.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, ScenarioError};

pub const CURVE_HEADER: [&str; 2] = ["i_fc_A_per_cm2", "U_cell_V"];

/// One point of a polarization curve, current density in A/cm2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    #[serde(rename = "i_fc_A_per_cm2")]
    pub i_fc: f64,
    #[serde(rename = "U_cell_V")]
    pub u_cell: f64,
}

pub fn read_curve<R: Read>(reader: R) -> Result<Vec<CurveSample>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != CURVE_HEADER {
        return Err(ScenarioError::Invalid(format!(
            "curve header must be `{}`, found `{}`",
            CURVE_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let s: CurveSample = row?;
        if !s.i_fc.is_finite() || !s.u_cell.is_finite() {
            return Err(ScenarioError::Invalid("non-finite value in curve".into()));
        }
        out.push(s);
    }
    if out.windows(2).any(|w| w[1].i_fc <= w[0].i_fc) {
        return Err(ScenarioError::Invalid(
            "curve currents must be strictly increasing".into(),
        ));
    }
    Ok(out)
}

pub fn read_curve_file(path: &Path) -> Result<Vec<CurveSample>> {
    let f = std::fs::File::open(path).map_err(|e| ScenarioError::Io(format!("{}: {e}", path.display())))?;
    read_curve(f)
}

pub fn write_curve<W: Write>(writer: W, samples: &[CurveSample]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CURVE_HEADER)?;
    for s in samples {
        w.write_record([s.i_fc.to_string(), s.u_cell.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_curve_file(path: &Path, samples: &[CurveSample]) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| ScenarioError::Io(format!("{}: {e}", path.display())))?;
    write_curve(f, samples)
}

/// Linear interpolation of `u(i)` on sorted samples. `None` outside the range.
pub fn interpolate(samples: &[CurveSample], i: f64) -> Option<f64> {
    let first = samples.first()?;
    let last = samples.last()?;
    if i < first.i_fc || i > last.i_fc {
        return None;
    }
    let k = samples.partition_point(|s| s.i_fc < i);
    if k < samples.len() && samples[k].i_fc == i {
        return Some(samples[k].u_cell);
    }
    let (a, b) = (samples[k - 1], samples[k]);
    Some(a.u_cell + (b.u_cell - a.u_cell) * (i - a.i_fc) / (b.i_fc - a.i_fc))
}

/// Relative deviations in percent at every experimental point inside the
/// simulated range.
pub fn relative_deviations(sim: &[CurveSample], exp: &[CurveSample]) -> Result<Vec<f64>> {
    let d: Vec<f64> = exp
        .iter()
        .filter_map(|e| interpolate(sim, e.i_fc).map(|u| (u - e.u_cell).abs() / e.u_cell * 100.0))
        .collect();
    if d.is_empty() {
        return Err(ScenarioError::NoOverlap);
    }
    Ok(d)
}

/// Largest relative deviation, in percent, between a simulated curve
/// (linearly interpolated) and experimental samples.
pub fn delta_u_max(sim: &[CurveSample], exp: &[CurveSample]) -> Result<f64> {
    Ok(relative_deviations(sim, exp)?.into_iter().fold(0.0, f64::max))
}
