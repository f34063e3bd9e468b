use pemfc_core::{CurrentProfile, ParameterSet};
use pemfc_scenario::{
    current_grid, polarization_curve, run_transient, CalibrationProblem, ExperimentalCurve, FreeParameter, Objective,
    Simulation, STEADY_RTOL,
};

fn voltages(sim: &Simulation, grid: &[f64], warm: bool) -> Vec<f64> {
    let c = polarization_curve(sim, grid, warm).unwrap();
    assert!(c.all_converged());
    c.points.iter().map(|p| p.u_cell).collect()
}

#[test]
fn warm_and_cold_sweeps_agree() {
    let sim = Simulation::eh31(2e5).with_n_gdl(Some(4));
    let grid = current_grid(0.2, 1.5, 6).unwrap();
    let warm = voltages(&sim, &grid, true);
    let cold = voltages(&sim, &grid, false);
    for (w, c) in warm.iter().zip(&cold) {
        assert!((w - c).abs() <= 2.0 * STEADY_RTOL * c.abs(), "{w} vs {c}");
    }
}

#[test]
fn voltage_decreases_along_the_curve() {
    for p in [2.0e5, 2.5e5] {
        let sim = Simulation::eh31(p).with_n_gdl(Some(4));
        let u = voltages(&sim, &current_grid(0.2, 1.5, 12).unwrap(), true);
        assert!(u.windows(2).all(|w| w[1] < w[0]), "{u:?}");
    }
}

#[test]
fn lowest_grid_current_settles() {
    let sim = Simulation::eh31(2e5);
    let c = polarization_curve(&sim, &[1000.0], true).unwrap();
    assert_eq!(c.points.len(), 1);
    assert!(c.points[0].converged && c.points[0].u_cell.is_finite());
}

#[test]
fn half_amp_step_settles_before_500_s() {
    let sim = Simulation::eh31(2e5).with_n_gdl(Some(10));
    let c = polarization_curve(&sim, &[5000.0], false).unwrap();
    let p = &c.points[0];
    assert!(p.converged, "residual {}", p.residual);
    assert!(p.settle_time < 500.0, "{}", p.settle_time);
}

#[test]
fn double_step_completes_with_voltage_drop() {
    let sim = Simulation::eh31(2e5).with_n_gdl(Some(4));
    let r = run_transient(&sim, CurrentProfile::double_step(), 1000.0, 10.0).unwrap();
    assert!(r.completed(), "{:?}", r.failure.map(|f| f.message));
    let u = |t: f64| {
        let k = r.times.iter().position(|x| (x - t).abs() < 1e-9).unwrap();
        r.derived[k].u_cell().unwrap()
    };
    assert!(u(490.0) > u(1000.0) + 0.1);
}

#[test]
fn calibration_objective_vanishes_at_the_generating_parameters() {
    let base = Simulation::eh31(2e5).with_n_gdl(Some(2));
    let grid = current_grid(0.3, 1.2, 4).unwrap();
    let curves: Vec<ExperimentalCurve> = [2.0e5, 2.5e5]
        .iter()
        .map(|&p| {
            let s = base.at_pressure(p);
            let c = polarization_curve(&s, &grid, true).unwrap();
            ExperimentalCurve {
                oc: s.oc.clone(),
                samples: c.samples(),
            }
        })
        .collect();
    let truth = ParameterSet::eh31();
    let bounds = FreeParameter::ALL
        .iter()
        .map(|&p| {
            let v = p.get(&truth);
            pemfc_scenario::Bound {
                param: p,
                lo: 0.9 * v,
                hi: 1.1 * v + 1e-3,
            }
        })
        .collect();
    let prob = CalibrationProblem {
        base,
        bounds,
        curves,
        objective: Objective::MaxDeviation,
    };
    assert!(prob.evaluate_params(&truth) < 1e-9);
}
