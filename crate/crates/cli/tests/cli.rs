use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn pemfc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pemfc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn default_config(dir: &Path) -> PathBuf {
    let path = dir.join("eh31.toml");
    let out = pemfc(&["default-config", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_curve(path: &Path) -> Vec<(f64, f64)> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("i_fc_A_per_cm2,U_cell_V"));
    lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect()
}

#[test]
fn transient_writes_time_series_and_manifest() {
    let dir = TempDir::new().unwrap();
    let cfg = default_config(dir.path());
    let out = dir.path().join("run");
    let o = pemfc(&[
        "transient",
        "--config",
        s(&cfg),
        "--out",
        s(&out),
        "--profile",
        "0:0.5",
        "--duration",
        "5",
        "--output-dt",
        "1",
        "--n-gdl",
        "2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out.join("timeseries.csv")).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert_eq!(header[0], "t_s");
    assert!(header.contains(&"U_cell"));
    assert_eq!(text.lines().count(), 7);
    let manifest = std::fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"parameter_hash\""));
    assert!(manifest.contains("\"transient\""));
}

#[test]
fn missing_key_exits_with_config_status() {
    let dir = TempDir::new().unwrap();
    let cfg = default_config(dir.path());
    let text = std::fs::read_to_string(&cfg).unwrap();
    let pruned: String = text
        .lines()
        .filter(|l| !l.starts_with("A_act"))
        .map(|l| format!("{l}\n"))
        .collect();
    std::fs::write(&cfg, pruned).unwrap();
    let o = pemfc(&["transient", "--config", s(&cfg), "--out", s(&dir.path().join("run"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("A_act"));
}

#[test]
fn unreadable_config_exits_with_config_status() {
    let dir = TempDir::new().unwrap();
    let o = pemfc(&[
        "steady",
        "--config",
        s(&dir.path().join("absent.toml")),
        "--out",
        s(dir.path()),
        "--current",
        "0.5",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn starvation_exits_with_solver_status_and_partial_output() {
    let dir = TempDir::new().unwrap();
    let cfg = default_config(dir.path());
    let out = dir.path().join("run");
    let o = pemfc(&[
        "transient",
        "--config",
        s(&cfg),
        "--out",
        s(&out),
        "--profile",
        "0:0.5,2:20",
        "--duration",
        "10",
        "--output-dt",
        "0.5",
        "--n-gdl",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out.join("timeseries.csv")).unwrap();
    let rows: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(rows.len() >= 5, "{rows:?}");
    assert!(*rows.last().unwrap() < 10.0);
}

#[test]
fn one_curve_file_per_pressure_ordered_by_pressure() {
    let dir = TempDir::new().unwrap();
    let cfg = default_config(dir.path());
    let out = dir.path().join("sweep");
    let o = pemfc(&[
        "polarization",
        "--config",
        s(&cfg),
        "--out",
        s(&out),
        "--pressures",
        "1.75,2.0,2.25,2.5",
        "--imin",
        "0.2",
        "--imax",
        "1.5",
        "--points",
        "6",
        "--n-gdl",
        "4",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let curves: Vec<Vec<(f64, f64)>> = ["1.75", "2.00", "2.25", "2.50"]
        .iter()
        .map(|p| read_curve(&out.join(format!("polarization_{p}bar.csv"))))
        .collect();
    for c in &curves {
        assert_eq!(c.len(), 6);
    }
    for k in 0..6 {
        for w in curves.windows(2) {
            assert_eq!(w[0][k].0, w[1][k].0);
            assert!(w[0][k].1 < w[1][k].1, "{:?} vs {:?}", w[0][k], w[1][k]);
        }
    }
    assert!(out.join("points_2.50bar.csv").exists());
}

#[test]
fn single_point_sweep() {
    let dir = TempDir::new().unwrap();
    let cfg = default_config(dir.path());
    let out = dir.path().join("one");
    let o = pemfc(&[
        "polarization",
        "--config",
        s(&cfg),
        "--out",
        s(&out),
        "--points",
        "1",
        "--imax",
        "0.8",
        "--n-gdl",
        "2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let c = read_curve(&out.join("polarization_2.00bar.csv"));
    assert_eq!(c.len(), 1);
    assert!((c[0].0 - 0.8).abs() < 1e-12);
}

#[test]
fn steady_writes_one_row() {
    let dir = TempDir::new().unwrap();
    let cfg = default_config(dir.path());
    let out = dir.path().join("steady");
    let o = pemfc(&[
        "steady",
        "--config",
        s(&cfg),
        "--out",
        s(&out),
        "--current",
        "0.5",
        "--n-gdl",
        "2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out.join("steady.csv")).unwrap();
    assert_eq!(text.lines().count(), 2);
}

fn write_synthetic_curves(cfg: &Path, data: &Path) {
    let sweep = data.with_extension("sweep");
    let o = pemfc(&[
        "polarization",
        "--config",
        s(cfg),
        "--out",
        s(&sweep),
        "--pressures",
        "2.0,2.5",
        "--imin",
        "0.3",
        "--imax",
        "1.2",
        "--points",
        "3",
        "--n-gdl",
        "2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::create_dir_all(data).unwrap();
    for p in ["2.00", "2.50"] {
        std::fs::copy(
            sweep.join(format!("polarization_{p}bar.csv")),
            data.join(format!("eh31_{p}bar.csv")),
        )
        .unwrap();
    }
}

#[test]
fn calibration_is_reproducible_for_a_seed() {
    let dir = TempDir::new().unwrap();
    let cfg = default_config(dir.path());
    let data = dir.path().join("data");
    write_synthetic_curves(&cfg, &data);
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = pemfc(&[
            "calibrate",
            "--config",
            s(&cfg),
            "--out",
            s(&out),
            "--data",
            s(&data),
            "--budget",
            "24",
            "--population",
            "8",
            "--seed",
            "11",
            "--n-gdl",
            "2",
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(out.join("calibrated.toml").exists());
        std::fs::read_to_string(out.join("calibration_report.json")).unwrap()
    };
    let a = run("cal_a");
    let b = run("cal_b");
    assert_eq!(a, b);
    assert!(a.contains("\"seed\": 11"));
}

#[test]
fn calibration_without_curves_exits_with_config_status() {
    let dir = TempDir::new().unwrap();
    let cfg = default_config(dir.path());
    let data = dir.path().join("empty");
    std::fs::create_dir_all(&data).unwrap();
    let o = pemfc(&[
        "calibrate",
        "--config",
        s(&cfg),
        "--out",
        s(&dir.path().join("cal")),
        "--data",
        s(&data),
    ]);
    assert_eq!(o.status.code(), Some(2));
}
