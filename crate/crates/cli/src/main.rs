//! `pemfc`: run transients, polarization sweeps, settled operating points and
//! calibrations of the PEM fuel cell model from a TOML configuration.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exit status for unreadable or invalid inputs.
pub const EXIT_CONFIG: u8 = 2;
/// Exit status for solver failures.
pub const EXIT_SOLVER: u8 = 3;

/// Environment variable capping the worker threads of sweeps and
/// calibration.
pub const WORKERS_ENV: &str = "PEMFC_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "pemfc",
    version,
    about = "Dynamic two-phase PEM fuel cell model with balance of plant"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a current profile and write the time series.
    Transient(TransientArgs),
    /// Settle the cell over a current grid at one or more desired pressures.
    Polarization(PolarizationArgs),
    /// Settle the cell at one current density and write the state.
    Steady(SteadyArgs),
    /// Fit the undetermined parameters to measured polarization curves.
    Calibrate(CalibrateArgs),
    /// Print the EH-31 configuration.
    DefaultConfig(DefaultConfigArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Model configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Override the number of GDL nodes.
    #[arg(long)]
    pub n_gdl: Option<usize>,
    /// Relative integration tolerance.
    #[arg(long, default_value_t = 1e-6)]
    pub rtol: f64,
}

#[derive(Debug, Args)]
pub struct TransientArgs {
    #[command(flatten)]
    pub common: Common,
    /// Current profile `t:i,...` with t in s and i in A/cm2.
    #[arg(long, default_value = "0:0.5,500:1.5")]
    pub profile: String,
    /// Linear ramp applied at each current step, in s.
    #[arg(long, default_value_t = 0.01)]
    pub ramp: f64,
    /// Simulated duration in s.
    #[arg(long, default_value_t = 1000.0)]
    pub duration: f64,
    /// Output interval in s.
    #[arg(long, default_value_t = 1.0)]
    pub output_dt: f64,
}

#[derive(Debug, Args)]
pub struct PolarizationArgs {
    #[command(flatten)]
    pub common: Common,
    /// Desired pressures in bar, applied to both sides.
    #[arg(long, value_delimiter = ',', default_value = "2.0")]
    pub pressures: Vec<f64>,
    /// Lowest current density in A/cm2.
    #[arg(long, default_value_t = 0.1)]
    pub imin: f64,
    /// Highest current density in A/cm2.
    #[arg(long, default_value_t = 1.5)]
    pub imax: f64,
    /// Number of points per curve.
    #[arg(long, default_value_t = 30)]
    pub points: usize,
    /// Start every point from the zero-current state instead of the previous
    /// point.
    #[arg(long)]
    pub cold: bool,
}

#[derive(Debug, Args)]
pub struct SteadyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Current density in A/cm2.
    #[arg(long)]
    pub current: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ObjectiveArg {
    /// Largest relative deviation over the curves, in percent.
    Max,
    /// Mean squared relative deviation, in percent squared.
    Mse,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Directory of curve CSVs named `<pressure>bar.csv` or
    /// `<anything>_<pressure>bar.csv`, pressure in bar.
    #[arg(long)]
    pub data: PathBuf,
    /// Maximum number of objective evaluations.
    #[arg(long, default_value_t = 2400)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 24)]
    pub population: usize,
    /// Stop once the objective falls below this value.
    #[arg(long)]
    pub target: Option<f64>,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Max)]
    pub objective: ObjectiveArg,
    /// Search box file (TOML table `name = [lo, hi]`); defaults to the
    /// built-in box.
    #[arg(long)]
    pub bounds: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DefaultConfigArgs {
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Transient(a) => commands::transient(&a),
        Command::Polarization(a) => commands::polarization(&a),
        Command::Steady(a) => commands::steady(&a),
        Command::Calibrate(a) => commands::calibrate(&a),
        Command::DefaultConfig(a) => commands::default_config(&a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
