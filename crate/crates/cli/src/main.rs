//! `jpo`: batch front end for the JPO readout simulator.

mod commands;
mod config;
mod manifest;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "jpo",
    version,
    about = "Josephson parametric oscillator qubit readout simulator"
)]
pub struct Cli {
    /// TOML configuration; the built-in reference configuration when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,

    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    /// Worker threads; all cores when omitted.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Map the oscillation region for both qubit states.
    RegionMap(RegionMapArgs),
    /// Monte-Carlo readout cycles, histogram analysis and error budget.
    Readout(ReadoutArgs),
    /// Photon number vs time for each prepared state.
    Trajectory(TrajectoryArgs),
    /// Fit line attenuation and chain gain from Kerr-pull data.
    Calibrate(CalibrateArgs),
    /// Print the instability boundary of the quiet state.
    Threshold(ThresholdArgs),
}

#[derive(Args, Debug)]
pub struct RegionMapArgs {
    /// Grid size as DELTAxEPSILON points.
    #[arg(long, default_value = "64x64")]
    pub grid: String,
    /// Trajectories averaged per cell.
    #[arg(long, default_value_t = 1)]
    pub shots_per_cell: usize,
    /// Ground-state detuning range, units of Γ.
    #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
    pub delta_min: f64,
    #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
    pub delta_max: f64,
    /// Pump amplitude range, units of Γ.
    #[arg(long, default_value_t = 0.0)]
    pub epsilon_min: f64,
    #[arg(long, default_value_t = 5.0)]
    pub epsilon_max: f64,
    /// Run length per cell, s. |A|² is averaged over the second half.
    #[arg(long, default_value_t = 2e-6)]
    pub duration: f64,
    /// Integrator step, s. Chosen to resolve the stiffest cell when omitted.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Also run this many readout cycles per state in every cell and write the
    /// discrimination map.
    #[arg(long)]
    pub discrimination_shots: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ReadoutArgs {
    /// Shots per prepared state; overrides the configuration.
    #[arg(long)]
    pub shots: Option<usize>,
    /// Threshold the rectified signal instead of the amplitude.
    #[arg(long)]
    pub rectified: bool,
    /// Write records as length-prefixed binary frames instead of text.
    #[arg(long)]
    pub binary: bool,
}

#[derive(Args, Debug)]
pub struct TrajectoryArgs {
    /// Number of trajectories averaged per state; 1 writes the raw trace.
    #[arg(long, default_value_t = 1)]
    pub average: usize,
    /// Prepared state: 0, 1 or both.
    #[arg(long, default_value = "both")]
    pub state: String,
}

#[derive(Args, Debug)]
pub struct CalibrateArgs {
    /// Dataset with columns flux bias F, probe power (dBm), resonance (Hz).
    #[arg(required_unless_present = "synthesize", conflicts_with = "synthesize")]
    pub dataset: Option<PathBuf>,
    /// Generate a dataset at this line attenuation (dB) and calibrate it.
    #[arg(long)]
    pub synthesize: Option<f64>,
    /// Scatter of synthetic points as a fraction of each frequency pull.
    #[arg(long, default_value_t = 0.01)]
    pub noise_fraction: f64,
    /// Off-resonant reflection |S11|², dB.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub s11_db: f64,
}

#[derive(Args, Debug)]
pub struct ThresholdArgs {
    /// Detuning range, units of Γ.
    #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
    pub delta_min: f64,
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
    pub delta_max: f64,
    #[arg(long, default_value_t = 41)]
    pub points: usize,
}

/// Exit status 2 for bad input, 3 for failures while running.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<jpo_core::Error> for Failure {
    fn from(e: jpo_core::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
