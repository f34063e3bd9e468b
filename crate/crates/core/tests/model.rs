use pemfc_core::{
    initialize_state, CurrentProfile, DiscretizationLayout, FuelCellModel, ModelConfig, ModelOptions,
    OperatingConditions, ParameterSet,
};
use pemfc_integrator::OdeSystem;
use proptest::prelude::*;

#[test]
fn configuration_survives_a_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cell.toml");
    let mut cfg = ModelConfig::eh31();
    cfg.numerics.n_gdl = Some(6);
    cfg.operating.t_fc = 350.0;
    std::fs::write(&path, cfg.to_toml_string()).unwrap();
    assert_eq!(ModelConfig::load(&path).unwrap(), cfg);
}

#[test]
fn unknown_key_is_rejected() {
    let text = ModelConfig::eh31()
        .to_toml_string()
        .replace("[geometry]", "[geometry]\nH_foo = 1.0");
    let err = ModelConfig::from_toml_str(&text).unwrap_err().to_string();
    assert!(err.contains("H_foo"), "{err}");
}

fn rest_model(n_gdl: usize) -> (FuelCellModel, Vec<f64>) {
    let mut params = ParameterSet::eh31();
    params.kinetics.kappa_co = 0.0;
    let mut oc = OperatingConditions::eh31(params.ambient.p_ext);
    let phi = 0.5 * (oc.phi_a_des + oc.phi_c_des);
    oc.phi_a_des = phi;
    oc.phi_c_des = phi;
    let layout = DiscretizationLayout::build(&params, Some(n_gdl)).unwrap();
    let y0 = initialize_state(&params, &oc, &layout).unwrap();
    let model = FuelCellModel::new(
        params,
        oc,
        layout,
        CurrentProfile::constant(0.0),
        ModelOptions::default(),
    )
    .unwrap();
    (model, y0)
}

#[test]
fn zero_current_initial_state_is_a_fixed_point_at_rest() {
    for n in [2, 5, 10] {
        let (model, y0) = rest_model(n);
        let mut f = vec![0.0; y0.len()];
        model.rhs(0.0, &y0, &mut f).unwrap();
        for (i, v) in f.iter().enumerate() {
            assert!(v.abs() < 1e-12, "{} = {v}", model.state_name(i));
        }
    }
}

proptest! {
    #[test]
    fn projection_is_idempotent(
        values in prop::collection::vec(-1.0f64..1.0, 47),
    ) {
        let (model, y0) = rest_model(4);
        prop_assume!(y0.len() == values.len());
        let mut y = values.clone();
        model.project_state(&mut y);
        let once = y.clone();
        prop_assert!(!model.project_state(&mut y));
        prop_assert_eq!(y, once);
    }
}
