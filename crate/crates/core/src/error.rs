use thiserror::Error;

/// Failures raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid mode layout: {0}")]
    InvalidLayout(String),

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("mode index {index} out of range for {mode_count} modes")]
    ModeOutOfRange { index: usize, mode_count: usize },

    #[error("parameter `{name}` = {value} outside {range}")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("cutoff {cutoff} too small: truncated tail mass {tail_mass:.3e} exceeds bound {bound:.1e}")]
    CutoffTooSmall {
        cutoff: usize,
        tail_mass: f64,
        bound: f64,
    },

    #[error("photon number exceeds the cutoff: weight {weight:.3e} outside the representable blocks (bound {bound:.1e})")]
    PhotonNumberOverflow { weight: f64, bound: f64 },

    #[error("cannot normalize a state with trace {trace:.3e}")]
    DegenerateState { trace: f64 },

    #[error("state is not normalized: trace {trace}")]
    NotNormalized { trace: f64 },

    #[error("no valid teleportation branch: probability {probability:.3e} below floor {floor:.1e}")]
    NoTeleportation { probability: f64, floor: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("theta coverage spans only {window:.4} rad; off-diagonal elements are unidentifiable")]
    DegenerateThetaCoverage { window: f64 },

    #[error("malformed dataset: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange {
            name,
            value,
            range: "[0, 1]",
        })
    }
}
