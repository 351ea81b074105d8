//! Simulation of quantum-scissors teleportation of a coherent state onto a
//! single-rail qubit, with realistic detectors, source and mode-matching
//! imperfections, plus homodyne sampling and state reconstruction.
//!
//! States live in a truncated Fock basis ([`fock`]); linear optics and loss
//! are in [`optics`], photodetection in [`detection`], the teleportation
//! pipeline in [`protocol`] and homodyne tomography in [`homodyne`].

pub mod detection;
pub mod error;
pub mod fock;
pub mod homodyne;
pub mod optics;
pub mod protocol;

pub use error::{Error, Result};
pub use fock::{coherent_state, fidelity_pure, partial_trace, state_fidelity, tensor, DensityMatrix, FockState, ModeLayout};
pub use protocol::{fidelity_vs_alpha, phase_sweep, teleportation_fidelity, ProtocolParams, SimOptions, SweepRow};
