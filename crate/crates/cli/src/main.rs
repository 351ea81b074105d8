//! `scissors-sim`: fidelity and phase sweeps, tomography round trips and
//! single-point runs of the quantum-scissors teleportation model.

mod commands;
mod config;
mod error;
mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use config::RunConfig;
use error::CliError;

/// Simulate quantum-scissors teleportation and its homodyne characterization.
///
/// Settings are layered: defaults, then `--replay`, then `--config`, then
/// individual flags.
#[derive(Debug, Parser)]
#[command(name = "scissors-sim", version)]
struct Args {
    /// fidelity-sweep | phase-sweep | tomography-roundtrip | single-shot
    #[arg(long)]
    command: Option<String>,
    /// First |α| of the fidelity sweep
    #[arg(long)]
    alpha_start: Option<String>,
    /// Last |α| of the fidelity sweep (inclusive)
    #[arg(long)]
    alpha_stop: Option<String>,
    #[arg(long)]
    alpha_step: Option<String>,
    /// |α| for phase-sweep, tomography-roundtrip and single-shot
    #[arg(long)]
    alpha: Option<String>,
    /// Phase of α in radians (ignored by phase-sweep)
    #[arg(long)]
    alpha_phase: Option<String>,
    /// Number of source phases over [0, 2π) in phase-sweep
    #[arg(long)]
    phi_steps: Option<String>,
    /// Heralded single-photon preparation efficiency
    #[arg(long)]
    eta_one: Option<String>,
    /// Efficiency of Alice's photodetectors
    #[arg(long)]
    eta_spd: Option<String>,
    /// Efficiency of Bob's homodyne detection
    #[arg(long)]
    eta_hd: Option<String>,
    /// Fraction of runs with full mode matching
    #[arg(long)]
    mode_match: Option<String>,
    /// Photons per mode kept in the simulation, or "auto"
    #[arg(long)]
    cutoff: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Total homodyne samples in tomography-roundtrip
    #[arg(long)]
    samples: Option<String>,
    /// Local-oscillator phases over [0, π) in tomography-roundtrip
    #[arg(long)]
    theta_steps: Option<String>,
    /// Highest photon number reconstructed
    #[arg(long)]
    recon_cutoff: Option<String>,
    /// Also report the teleportation fidelity after undoing the homodyne loss
    #[arg(long)]
    loss_correct: bool,
    #[arg(long)]
    hist_bins: Option<String>,
    /// Histograms cover [-w, w]
    #[arg(long)]
    hist_half_width: Option<String>,
    /// csv | json
    #[arg(long)]
    format: Option<String>,
    /// Output file; standard output when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the sampled quadratures here (tomography-roundtrip)
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Flat `key = value` configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Re-run the configuration recorded in an earlier output file
    #[arg(long)]
    replay: Option<PathBuf>,
}

impl Args {
    fn flag_values(&self) -> Vec<(&'static str, Option<&String>)> {
        vec![
            ("command", self.command.as_ref()),
            ("alpha_start", self.alpha_start.as_ref()),
            ("alpha_stop", self.alpha_stop.as_ref()),
            ("alpha_step", self.alpha_step.as_ref()),
            ("alpha", self.alpha.as_ref()),
            ("alpha_phase", self.alpha_phase.as_ref()),
            ("phi_steps", self.phi_steps.as_ref()),
            ("eta_one", self.eta_one.as_ref()),
            ("eta_spd", self.eta_spd.as_ref()),
            ("eta_hd", self.eta_hd.as_ref()),
            ("mode_match", self.mode_match.as_ref()),
            ("cutoff", self.cutoff.as_ref()),
            ("seed", self.seed.as_ref()),
            ("samples", self.samples.as_ref()),
            ("theta_steps", self.theta_steps.as_ref()),
            ("recon_cutoff", self.recon_cutoff.as_ref()),
            ("hist_bins", self.hist_bins.as_ref()),
            ("hist_half_width", self.hist_half_width.as_ref()),
            ("format", self.format.as_ref()),
        ]
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn build_config(args: &Args) -> Result<RunConfig, CliError> {
    let mut config = RunConfig::default();
    if let Some(path) = &args.replay {
        config.apply_replay(&read(path)?)?;
    }
    if let Some(path) = &args.config {
        config.apply_file(&read(path)?)?;
    }
    for (key, value) in args.flag_values() {
        if let Some(value) = value {
            config.set(key, value)?;
        }
    }
    if args.loss_correct {
        config.loss_correct = true;
    }
    Ok(config)
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("SCISSORS_SIM_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("SCISSORS_SIM_THREADS = {value:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn write(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

fn run(args: &Args) -> Result<(), CliError> {
    configure_threads()?;
    let config = build_config(args)?;
    if args.dataset.is_some() && config.command != config::Command::TomographyRoundtrip {
        return Err(CliError::Config("--dataset only applies to tomography-roundtrip".into()));
    }
    let outcome = commands::run(&config)?;
    if let (Some(path), Some(data)) = (&args.dataset, &outcome.dataset) {
        write(Some(path), &data.to_text())?;
    }
    write(args.out.as_deref(), &outcome.document.render(config.format))?;
    if outcome.failures > 0 {
        return Err(CliError::Numerical(format!(
            "{} of {} rows failed; see the status column",
            outcome.failures,
            outcome.document.rows.len()
        )));
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("scissors-sim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
