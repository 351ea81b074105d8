//! Run configuration: defaults, flat `key = value` files, and replay of the
//! header block written at the top of every output file.

use std::fmt;

use scissors_core::protocol::ProtocolParams;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    FidelitySweep,
    PhaseSweep,
    TomographyRoundtrip,
    SingleShot,
}

impl Command {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "fidelity-sweep" => Self::FidelitySweep,
            "phase-sweep" => Self::PhaseSweep,
            "tomography-roundtrip" => Self::TomographyRoundtrip,
            "single-shot" => Self::SingleShot,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::FidelitySweep => "fidelity-sweep",
            Self::PhaseSweep => "phase-sweep",
            Self::TomographyRoundtrip => "tomography-roundtrip",
            Self::SingleShot => "single-shot",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

/// Largest reconstruction cutoff accepted; the upward recurrence for the
/// irregular solutions loses accuracy in the tails beyond it.
pub const MAX_RECON_CUTOFF: usize = 10;

const MAX_GRID_POINTS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub alpha_start: f64,
    pub alpha_stop: f64,
    pub alpha_step: f64,
    /// `|α|` for the single-amplitude commands
    pub alpha: f64,
    /// phase of `α` in radians
    pub alpha_phase: f64,
    pub phi_steps: usize,
    pub eta_one: f64,
    pub eta_spd: f64,
    pub eta_hd: f64,
    pub mode_match: f64,
    pub cutoff: Option<usize>,
    pub seed: u64,
    pub samples: usize,
    pub theta_steps: usize,
    pub recon_cutoff: usize,
    pub loss_correct: bool,
    pub hist_bins: usize,
    pub hist_half_width: f64,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: Command::FidelitySweep,
            alpha_start: 0.0,
            alpha_stop: 2.0,
            alpha_step: 0.05,
            alpha: 0.5,
            alpha_phase: 0.0,
            phi_steps: 24,
            eta_one: ProtocolParams::FITTED_ETA_ONE,
            eta_spd: ProtocolParams::FITTED_ETA_SPD,
            eta_hd: ProtocolParams::FITTED_ETA_HD,
            mode_match: ProtocolParams::FITTED_MODE_MATCH,
            cutoff: None,
            seed: 1,
            samples: 20_000,
            theta_steps: 12,
            recon_cutoff: 2,
            loss_correct: false,
            hist_bins: 41,
            hist_half_width: 5.0,
            format: Format::Csv,
        }
    }
}

/// Keys in the order they are written to headers.
pub const KEYS: &[&str] = &[
    "command",
    "alpha_start",
    "alpha_stop",
    "alpha_step",
    "alpha",
    "alpha_phase",
    "phi_steps",
    "eta_one",
    "eta_spd",
    "eta_hd",
    "mode_match",
    "cutoff",
    "seed",
    "samples",
    "theta_steps",
    "recon_cutoff",
    "loss_correct",
    "hist_bins",
    "hist_half_width",
    "format",
];

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| CliError::Config(format!("{key} = {value:?}: {e}")))
}

impl RunConfig {
    /// Sets one key; hyphens and underscores are interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        match key.as_str() {
            "command" => {
                self.command = Command::parse(value)
                    .ok_or_else(|| CliError::Config(format!("unknown command {value:?}")))?
            }
            "alpha_start" => self.alpha_start = parse_num(&key, value)?,
            "alpha_stop" => self.alpha_stop = parse_num(&key, value)?,
            "alpha_step" => self.alpha_step = parse_num(&key, value)?,
            "alpha" => self.alpha = parse_num(&key, value)?,
            "alpha_phase" => self.alpha_phase = parse_num(&key, value)?,
            "phi_steps" => self.phi_steps = parse_num(&key, value)?,
            "eta_one" => self.eta_one = parse_num(&key, value)?,
            "eta_spd" => self.eta_spd = parse_num(&key, value)?,
            "eta_hd" => self.eta_hd = parse_num(&key, value)?,
            "mode_match" => self.mode_match = parse_num(&key, value)?,
            "cutoff" => {
                self.cutoff = match value {
                    "auto" => None,
                    v => Some(parse_num(&key, v)?),
                }
            }
            "seed" => self.seed = parse_num(&key, value)?,
            "samples" => self.samples = parse_num(&key, value)?,
            "theta_steps" => self.theta_steps = parse_num(&key, value)?,
            "recon_cutoff" => self.recon_cutoff = parse_num(&key, value)?,
            "loss_correct" => self.loss_correct = parse_num(&key, value)?,
            "hist_bins" => self.hist_bins = parse_num(&key, value)?,
            "hist_half_width" => self.hist_half_width = parse_num(&key, value)?,
            "format" => {
                self.format = match value {
                    "csv" => Format::Csv,
                    "json" => Format::Json,
                    _ => return Err(CliError::Config(format!("unknown format {value:?}"))),
                }
            }
            _ => return Err(CliError::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> String {
        match key {
            "command" => self.command.name().to_string(),
            "alpha_start" => self.alpha_start.to_string(),
            "alpha_stop" => self.alpha_stop.to_string(),
            "alpha_step" => self.alpha_step.to_string(),
            "alpha" => self.alpha.to_string(),
            "alpha_phase" => self.alpha_phase.to_string(),
            "phi_steps" => self.phi_steps.to_string(),
            "eta_one" => self.eta_one.to_string(),
            "eta_spd" => self.eta_spd.to_string(),
            "eta_hd" => self.eta_hd.to_string(),
            "mode_match" => self.mode_match.to_string(),
            "cutoff" => self.cutoff.map_or_else(|| "auto".to_string(), |c| c.to_string()),
            "seed" => self.seed.to_string(),
            "samples" => self.samples.to_string(),
            "theta_steps" => self.theta_steps.to_string(),
            "recon_cutoff" => self.recon_cutoff.to_string(),
            "loss_correct" => self.loss_correct.to_string(),
            "hist_bins" => self.hist_bins.to_string(),
            "hist_half_width" => self.hist_half_width.to_string(),
            "format" => self.format.name().to_string(),
            _ => unreachable!("unknown key {key}"),
        }
    }

    pub fn entries(&self) -> Vec<(&'static str, String)> {
        KEYS.iter().map(|&k| (k, self.get(k))).collect()
    }

    /// Applies a flat `key = value` file. Blank lines and `#` comments are
    /// skipped.
    pub fn apply_file(&mut self, text: &str) -> Result<(), CliError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", i + 1)))?;
            self.set(key, value)?;
        }
        Ok(())
    }

    /// Applies the configuration recorded in the header of an earlier
    /// output file, CSV or JSON.
    pub fn apply_replay(&mut self, text: &str) -> Result<(), CliError> {
        if text.trim_start().starts_with('{') {
            let doc: serde_json::Value =
                serde_json::from_str(text).map_err(|e| CliError::Config(format!("replay file: {e}")))?;
            let config = doc
                .get("config")
                .and_then(|c| c.as_object())
                .ok_or_else(|| CliError::Config("replay file has no config object".into()))?;
            for (key, value) in config {
                let value = value
                    .as_str()
                    .ok_or_else(|| CliError::Config(format!("replay key {key} is not a string")))?;
                self.set(key, value)?;
            }
            return Ok(());
        }
        let mut found = false;
        for line in text.lines() {
            let Some(rest) = line.strip_prefix("# ") else {
                if line.starts_with('#') {
                    continue;
                }
                break;
            };
            if let Some((key, value)) = rest.split_once(" = ") {
                self.set(key, value)?;
                found = true;
            }
        }
        if found {
            Ok(())
        } else {
            Err(CliError::Config("replay file has no configuration header".into()))
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        for (name, v) in [
            ("eta_one", self.eta_one),
            ("eta_spd", self.eta_spd),
            ("eta_hd", self.eta_hd),
            ("mode_match", self.mode_match),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} = {v} outside [0, 1]"));
            }
        }
        for (name, v) in [
            ("alpha_start", self.alpha_start),
            ("alpha_stop", self.alpha_stop),
            ("alpha", self.alpha),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} = {v} must be a finite magnitude >= 0"));
            }
        }
        if !self.alpha_phase.is_finite() {
            return bad("alpha_phase must be finite".into());
        }
        match self.command {
            Command::FidelitySweep => {
                if !(self.alpha_step.is_finite() && self.alpha_step > 0.0) {
                    return bad(format!("alpha_step = {} must be > 0", self.alpha_step));
                }
                if self.alpha_stop < self.alpha_start {
                    return bad("alpha_stop is below alpha_start: empty grid".into());
                }
                if self.alpha_grid().len() > MAX_GRID_POINTS {
                    return bad(format!("grid has more than {MAX_GRID_POINTS} points"));
                }
            }
            Command::PhaseSweep => {
                if self.phi_steps == 0 {
                    return bad("phi_steps must be >= 1".into());
                }
                if self.hist_bins == 0 || !(self.hist_half_width > 0.0 && self.hist_half_width.is_finite()) {
                    return bad("histogram needs hist_bins >= 1 and hist_half_width > 0".into());
                }
            }
            Command::TomographyRoundtrip => {
                if self.samples == 0 {
                    return bad("samples must be >= 1".into());
                }
                if self.theta_steps < 2 {
                    return bad("theta_steps must be >= 2".into());
                }
                if !(1..=MAX_RECON_CUTOFF).contains(&self.recon_cutoff) {
                    return bad(format!("recon_cutoff must be in 1..={MAX_RECON_CUTOFF}"));
                }
            }
            Command::SingleShot => {}
        }
        Ok(())
    }

    /// `alpha_start + k·alpha_step` up to `alpha_stop`, tolerant of
    /// rounding in the last step.
    pub fn alpha_grid(&self) -> Vec<f64> {
        let span = (self.alpha_stop - self.alpha_start) / self.alpha_step;
        let count = (span + 1e-9).floor() as usize + 1;
        (0..count).map(|k| self.alpha_start + k as f64 * self.alpha_step).collect()
    }
}
