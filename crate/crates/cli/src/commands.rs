//! Subcommand implementations.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use pemfc_core::derived::derive;
use pemfc_core::profile::A_PER_M2_PER_A_PER_CM2;
use pemfc_core::voltage::VoltageBreakdown;
use pemfc_core::{CurrentProfile, ModelConfig};
use pemfc_scenario::output::write_time_series_file;
use pemfc_scenario::{
    calibrate as run_calibration, current_grid, default_bounds, polarization_curve, read_curve_file, run_transient,
    write_curve_file, Bound, CalibrationProblem, ExperimentalCurve, FreeParameter, Objective, PolarizationCurve,
    ScenarioError, SearchConfig, Simulation, SimulationResult,
};

use crate::manifest::RunManifest;
use crate::{
    CalibrateArgs, Common, DefaultConfigArgs, ObjectiveArg, PolarizationArgs, SteadyArgs, TransientArgs, EXIT_CONFIG,
    EXIT_SOLVER, WORKERS_ENV,
};

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

fn config_err(m: impl Display) -> CliError {
    CliError {
        code: EXIT_CONFIG,
        message: m.to_string(),
    }
}

fn solver_err(m: impl Display) -> CliError {
    CliError {
        code: EXIT_SOLVER,
        message: m.to_string(),
    }
}

/// Errors raised before any integration step are input errors; the rest are
/// solver failures.
fn scenario_err(e: ScenarioError) -> CliError {
    match e {
        ScenarioError::Model(_) | ScenarioError::Invalid(_) | ScenarioError::NoOverlap => config_err(e),
        ScenarioError::Integrator(_) => solver_err(e),
        ScenarioError::Io(_) => config_err(e),
    }
}

type CliResult<T> = Result<T, CliError>;

fn load(common: &Common) -> CliResult<(ModelConfig, Simulation)> {
    let cfg = ModelConfig::load(&common.config).map_err(config_err)?;
    let mut sim = Simulation::from_config(&cfg);
    if common.n_gdl.is_some() {
        sim.n_gdl = common.n_gdl;
    }
    if !(common.rtol > 0.0 && common.rtol < 1.0) {
        return Err(config_err(format!("--rtol must lie in (0, 1), got {}", common.rtol)));
    }
    sim.rtol = common.rtol;
    sim.layout().map_err(scenario_err)?;
    Ok((cfg, sim))
}

fn prepare_out(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| config_err(format!("cannot create {}: {e}", dir.display())))
}

fn io_err(path: &Path, e: impl Display) -> CliError {
    config_err(format!("cannot write {}: {e}", path.display()))
}

fn workers() -> CliResult<usize> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(config_err(format!(
                "{WORKERS_ENV} must be a positive integer, got '{v}'"
            ))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn common_args(c: &Common) -> Vec<(String, String)> {
    let mut v = vec![("rtol".to_string(), c.rtol.to_string())];
    if let Some(n) = c.n_gdl {
        v.push(("n_gdl".to_string(), n.to_string()));
    }
    v
}

pub fn default_config(a: &DefaultConfigArgs) -> CliResult<()> {
    let text = ModelConfig::eh31().to_toml_string();
    match &a.out {
        Some(p) => std::fs::write(p, text).map_err(|e| io_err(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn transient(a: &TransientArgs) -> CliResult<()> {
    let (cfg, sim) = load(&a.common)?;
    let profile = CurrentProfile::parse(&a.profile, a.ramp).map_err(config_err)?;
    if !(a.duration > 0.0) || !(a.output_dt > 0.0) {
        return Err(config_err("--duration and --output-dt must be positive"));
    }
    prepare_out(&a.common.out)?;
    let mut args = common_args(&a.common);
    args.extend([
        ("profile".to_string(), a.profile.clone()),
        ("ramp".to_string(), a.ramp.to_string()),
        ("duration".to_string(), a.duration.to_string()),
        ("output_dt".to_string(), a.output_dt.to_string()),
    ]);
    RunManifest::new("transient", &a.common.config, &cfg, None, &a.common.out, args)
        .write(&a.common.out)
        .map_err(|e| io_err(&a.common.out, e))?;

    let res = run_transient(&sim, profile, a.duration, a.output_dt).map_err(scenario_err)?;
    let path = a.common.out.join("timeseries.csv");
    write_time_series_file(&path, &res).map_err(|e| io_err(&path, e))?;
    report_warnings(&res);
    match &res.failure {
        None => Ok(()),
        Some(f) => Err(solver_err(format!(
            "solver failure at t = {} s: {} (output kept up to t = {} s)",
            f.t,
            f.message,
            res.times.last().copied().unwrap_or(0.0)
        ))),
    }
}

fn report_warnings(res: &SimulationResult) {
    if let Some(d) = res.derived.iter().find(|d| !d.warnings.is_empty()) {
        eprintln!("warning at t = {} s: {}", d.t, d.warnings.join("; "));
    }
}

fn pressure_label(p_bar: f64) -> String {
    format!("{p_bar:.2}bar")
}

fn write_points(path: &Path, curve: &PolarizationCurve) -> CliResult<()> {
    let mut text = String::from("i_fc_A_per_cm2,U_cell_V,converged,settle_time_s,residual,s_ccl");
    for f in VoltageBreakdown::FIELDS {
        text.push(',');
        text.push_str(f);
    }
    text.push_str(",error\n");
    for p in &curve.points {
        let mut row = vec![
            (p.i_fc / A_PER_M2_PER_A_PER_CM2).to_string(),
            p.u_cell.to_string(),
            p.converged.to_string(),
            p.settle_time.to_string(),
            p.residual.to_string(),
            p.s_ccl.to_string(),
        ];
        match &p.breakdown {
            Some(b) => row.extend(b.values().iter().map(|v| v.to_string())),
            None => row.extend(std::iter::repeat_n("NaN".to_string(), VoltageBreakdown::FIELDS.len())),
        }
        row.push(p.error.as_deref().unwrap_or("").replace([',', '\n'], ";"));
        text.push_str(&row.join(","));
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn polarization(a: &PolarizationArgs) -> CliResult<()> {
    let (cfg, sim) = load(&a.common)?;
    if a.pressures.is_empty() || a.pressures.iter().any(|p| !(*p > 0.0) || !p.is_finite()) {
        return Err(config_err("--pressures must be positive values in bar"));
    }
    let grid = current_grid(a.imin, a.imax, a.points).map_err(scenario_err)?;
    let n_workers = workers()?;
    prepare_out(&a.common.out)?;
    let mut args = common_args(&a.common);
    args.extend([
        (
            "pressures".to_string(),
            a.pressures.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(","),
        ),
        ("imin".to_string(), a.imin.to_string()),
        ("imax".to_string(), a.imax.to_string()),
        ("points".to_string(), a.points.to_string()),
        ("cold".to_string(), a.cold.to_string()),
    ]);
    RunManifest::new("polarization", &a.common.config, &cfg, None, &a.common.out, args)
        .write(&a.common.out)
        .map_err(|e| io_err(&a.common.out, e))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n_workers.min(a.pressures.len()))
        .build()
        .map_err(config_err)?;
    let curves: Vec<Result<PolarizationCurve, ScenarioError>> = pool.install(|| {
        a.pressures
            .par_iter()
            .map(|p| polarization_curve(&sim.at_pressure(p * 1e5), &grid, !a.cold))
            .collect()
    });
    let mut unsettled = 0;
    for (p, c) in a.pressures.iter().zip(curves) {
        let c = c.map_err(scenario_err)?;
        let label = pressure_label(*p);
        let curve_path = a.common.out.join(format!("polarization_{label}.csv"));
        write_curve_file(&curve_path, &c.samples()).map_err(|e| io_err(&curve_path, e))?;
        write_points(&a.common.out.join(format!("points_{label}.csv")), &c)?;
        unsettled += c
            .points
            .iter()
            .filter(|p| !p.converged || !p.u_cell.is_finite())
            .count();
    }
    if unsettled > 0 {
        eprintln!("warning: {unsettled} point(s) did not settle or have no voltage; see points_*.csv");
    }
    Ok(())
}

pub fn steady(a: &SteadyArgs) -> CliResult<()> {
    let (cfg, sim) = load(&a.common)?;
    if !(a.current >= 0.0) || !a.current.is_finite() {
        return Err(config_err("--current must be a non-negative current density in A/cm2"));
    }
    prepare_out(&a.common.out)?;
    let mut args = common_args(&a.common);
    args.push(("current".to_string(), a.current.to_string()));
    RunManifest::new("steady", &a.common.config, &cfg, None, &a.common.out, args)
        .write(&a.common.out)
        .map_err(|e| io_err(&a.common.out, e))?;

    let i_fc = a.current * A_PER_M2_PER_A_PER_CM2;
    let curve = polarization_curve(&sim, &[i_fc], true).map_err(scenario_err)?;
    let point = &curve.points[0];
    if point.state.is_empty() {
        return Err(solver_err(point.error.clone().unwrap_or_default()));
    }
    let model = sim.model(CurrentProfile::constant(i_fc)).map_err(scenario_err)?;
    let d = derive(&model, point.settle_time, &point.state).map_err(solver_err)?;
    let res = SimulationResult {
        state_names: model.layout().state_names(),
        times: vec![point.settle_time],
        states: vec![point.state.clone()],
        derived: vec![d],
        stats: curve.stats.clone(),
        failure: None,
    };
    let path = a.common.out.join("steady.csv");
    write_time_series_file(&path, &res).map_err(|e| io_err(&path, e))?;
    report_warnings(&res);
    if let Some(e) = &point.error {
        return Err(solver_err(e));
    }
    if !point.converged {
        eprintln!(
            "warning: not settled after {} s (residual {:.3e})",
            point.settle_time, point.residual
        );
    }
    Ok(())
}

/// Pressure in bar from a file stem such as `2.25bar` or `eh31_2.25bar`.
fn pressure_from_stem(stem: &str) -> Option<f64> {
    let body = stem.strip_suffix("bar")?;
    let num = body.rsplit(['_', '-']).next()?;
    num.parse::<f64>().ok().filter(|p| *p > 0.0)
}

fn read_curves(dir: &Path, cfg: &ModelConfig) -> CliResult<Vec<(PathBuf, ExperimentalCurve)>> {
    let entries = std::fs::read_dir(dir).map_err(|e| config_err(format!("cannot read {}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    let mut out = Vec::new();
    for f in files {
        let stem = f.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        let p = pressure_from_stem(stem).ok_or_else(|| {
            config_err(format!(
                "cannot read a pressure from {}; name curve files like 2.25bar.csv",
                f.display()
            ))
        })?;
        let samples = read_curve_file(&f).map_err(|e| config_err(format!("{}: {e}", f.display())))?;
        let mut oc = cfg.operating.clone();
        oc.p_a_des = p * 1e5;
        oc.p_c_des = p * 1e5;
        out.push((f, ExperimentalCurve { oc, samples }));
    }
    if out.len() < 2 {
        return Err(config_err(format!(
            "calibration needs at least two curve files in {}, found {}",
            dir.display(),
            out.len()
        )));
    }
    Ok(out)
}

fn read_bounds(path: &Path) -> CliResult<Vec<Bound>> {
    let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    let table: BTreeMap<String, [f64; 2]> = toml::from_str(&text).map_err(config_err)?;
    let mut bounds = Vec::new();
    for (name, [lo, hi]) in table {
        let param =
            FreeParameter::from_name(&name).ok_or_else(|| config_err(format!("unknown free parameter '{name}'")))?;
        bounds.push(Bound { param, lo, hi });
    }
    bounds.sort_by_key(|b| FreeParameter::ALL.iter().position(|p| *p == b.param));
    Ok(bounds)
}

pub fn calibrate(a: &CalibrateArgs) -> CliResult<()> {
    let (cfg, sim) = load(&a.common)?;
    let curves = read_curves(&a.data, &cfg)?;
    let bounds = match &a.bounds {
        Some(p) => read_bounds(p)?,
        None => default_bounds(),
    };
    let problem = CalibrationProblem {
        base: sim,
        bounds,
        curves: curves.iter().map(|(_, c)| c.clone()).collect(),
        objective: match a.objective {
            ObjectiveArg::Max => Objective::MaxDeviation,
            ObjectiveArg::Mse => Objective::MeanSquared,
        },
    };
    problem.validate().map_err(scenario_err)?;
    let search = SearchConfig {
        population: a.population,
        budget: a.budget,
        seed: a.seed,
        target: a.target,
        workers: Some(workers()?),
        ..SearchConfig::default()
    };
    prepare_out(&a.common.out)?;
    let mut args = common_args(&a.common);
    args.extend([
        ("data".to_string(), a.data.display().to_string()),
        ("budget".to_string(), a.budget.to_string()),
        ("population".to_string(), a.population.to_string()),
        ("objective".to_string(), format!("{:?}", a.objective)),
    ]);
    if let Some(t) = a.target {
        args.push(("target".to_string(), t.to_string()));
    }
    for (f, _) in &curves {
        args.push(("curve".to_string(), f.display().to_string()));
    }
    RunManifest::new("calibrate", &a.common.config, &cfg, Some(a.seed), &a.common.out, args)
        .write(&a.common.out)
        .map_err(|e| io_err(&a.common.out, e))?;

    let report = run_calibration(&problem, &search).map_err(scenario_err)?;
    let path = a.common.out.join("calibration_report.json");
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    std::fs::write(&path, text).map_err(|e| io_err(&path, e))?;

    let mut sections: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for ((name, value), b) in report.best.iter().zip(&problem.bounds) {
        sections
            .entry(b.param.section())
            .or_default()
            .push(format!("{name} = {value:?}"));
    }
    let mut fragment = String::new();
    for (section, lines) in sections {
        fragment.push_str(&format!("[{section}]\n"));
        for l in lines {
            fragment.push_str(&l);
            fragment.push('\n');
        }
        fragment.push('\n');
    }
    let path = a.common.out.join("calibrated.toml");
    std::fs::write(&path, fragment).map_err(|e| io_err(&path, e))?;
    eprintln!(
        "objective {:.4} after {} evaluations{}",
        report.objective,
        report.evaluations,
        if report.budget_exhausted {
            " (budget exhausted)"
        } else {
            ""
        }
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pressure_stems() {
        assert_eq!(pressure_from_stem("2.25bar"), Some(2.25));
        assert_eq!(pressure_from_stem("eh31_2.0bar"), Some(2.0));
        assert_eq!(pressure_from_stem("polarization_2.50bar"), Some(2.5));
        assert_eq!(pressure_from_stem("curve"), None);
    }
}
