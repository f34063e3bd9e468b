//! Time-series CSV output.

use std::io::Write;
use std::path::Path;

use pemfc_core::DerivedQuantities;

use crate::error::{Result, ScenarioError};
use crate::transient::SimulationResult;

/// Header of the time-series CSV: `t_s`, every state, then derived columns.
pub fn time_series_header(result: &SimulationResult) -> Vec<String> {
    let mut h = vec!["t_s".to_string()];
    h.extend(result.state_names.iter().cloned());
    h.extend(DerivedQuantities::columns().into_iter().map(String::from));
    h
}

/// Write every recorded output time, including the prefix reached before a
/// failure.
pub fn write_time_series<W: Write>(writer: W, result: &SimulationResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(time_series_header(result))?;
    for ((t, y), d) in result.times.iter().zip(&result.states).zip(&result.derived) {
        let mut row = vec![t.to_string()];
        row.extend(y.iter().map(|v| v.to_string()));
        row.extend(d.row().iter().map(|v| v.to_string()));
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_time_series_file(path: &Path, result: &SimulationResult) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| ScenarioError::Io(format!("{}: {e}", path.display())))?;
    write_time_series(f, result)
}
