use pemfc_scenario::{current_grid, delta_u_max, read_curve_file, write_curve_file, CurveSample};
use proptest::prelude::*;

fn curve() -> impl Strategy<Value = Vec<CurveSample>> {
    prop::collection::vec((1e-3f64..0.2, 0.3f64..1.1), 1..20).prop_map(|steps| {
        let mut i = 0.0;
        steps
            .into_iter()
            .map(|(di, u_cell)| {
                i += di;
                CurveSample { i_fc: i, u_cell }
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn curve_files_round_trip_exactly(samples in curve()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("curve.csv");
        write_curve_file(&path, &samples).unwrap();
        prop_assert_eq!(read_curve_file(&path).unwrap(), samples);
    }

    #[test]
    fn a_curve_has_no_deviation_from_itself(samples in curve()) {
        prop_assert_eq!(delta_u_max(&samples, &samples).unwrap(), 0.0);
    }

    #[test]
    fn uniform_voltage_shift_gives_its_relative_size(samples in curve(), k in 0.5f64..1.5) {
        let shifted: Vec<CurveSample> = samples
            .iter()
            .map(|s| CurveSample { i_fc: s.i_fc, u_cell: k * s.u_cell })
            .collect();
        let d = delta_u_max(&shifted, &samples).unwrap();
        prop_assert!((d - 100.0 * (k - 1.0).abs()).abs() < 1e-9);
    }

    #[test]
    fn current_grid_is_even_and_spans_the_range(
        i_min in 0.0f64..1.0,
        span in 1e-3f64..2.0,
        points in 2usize..60,
    ) {
        let i_max = i_min + span;
        let g = current_grid(i_min, i_max, points).unwrap();
        prop_assert_eq!(g.len(), points);
        prop_assert!((g[0] - 1e4 * i_min).abs() < 1e-9);
        prop_assert!((g[points - 1] - 1e4 * i_max).abs() < 1e-9 * (1.0 + 1e4 * i_max));
        let h = g[1] - g[0];
        for w in g.windows(2) {
            prop_assert!((w[1] - w[0] - h).abs() < 1e-9 * (1.0 + g[points - 1]));
        }
    }
}

#[test]
fn unordered_curve_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "i_fc_A_per_cm2,U_cell_V\n0.5,0.8\n0.4,0.82\n").unwrap();
    assert!(read_curve_file(&path).is_err());
}
