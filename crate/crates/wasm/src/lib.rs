//! Browser bindings for the demo page in `www/`.
//!
//! Every export returns a flat `Float64Array`; the layouts are documented on
//! the functions. Failed points are `NaN` rather than errors so a curve with a
//! single bad grid point still draws.

use std::f64::consts::PI;

use num_complex::Complex64;
use scissors_core::homodyne::{quadrature_histogram, quadrature_mean};
use scissors_core::protocol::{bob_ensemble, fidelity_vs_alpha, phase_sweep, teleportation_fidelity, ProtocolParams, SimOptions};
use wasm_bindgen::prelude::*;

/// Largest |α| the demo accepts; beyond this the default cutoff grows past
/// what is comfortable on the main thread.
pub const MAX_ALPHA: f64 = 3.0;

/// Stride of [`fidelity_curves`] rows.
pub const CURVE_STRIDE: usize = 5;

/// Number of leading values in [`bob_state`].
pub const BOB_STATE_LEN: usize = 7;

fn params(alpha: Complex64, eta_one: f64, eta_spd: f64, eta_hd: f64, mode_match: f64) -> Result<ProtocolParams, String> {
    if alpha.norm() > MAX_ALPHA {
        return Err(format!("|alpha| must be at most {MAX_ALPHA}"));
    }
    ProtocolParams::new(alpha, eta_one, eta_spd, eta_hd, mode_match).map_err(|e| e.to_string())
}

/// `points` rows of `[alpha, f_mixed, f_ideal, f_semiclassical, p_tel]` for
/// real α evenly spaced on `[0, alpha_max]`.
pub fn fidelity_curves_inner(
    eta_one: f64,
    eta_spd: f64,
    eta_hd: f64,
    mode_match: f64,
    alpha_max: f64,
    points: usize,
) -> Result<Vec<f64>, String> {
    if points < 2 {
        return Err("need at least two points".into());
    }
    if !(alpha_max > 0.0) {
        return Err("alpha_max must be positive".into());
    }
    let template = params(Complex64::new(alpha_max, 0.0), eta_one, eta_spd, eta_hd, mode_match)?;
    let grid: Vec<Complex64> = (0..points)
        .map(|i| Complex64::new(alpha_max * i as f64 / (points - 1) as f64, 0.0))
        .collect();
    let rows = fidelity_vs_alpha(&template, &grid, &SimOptions::default()).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(points * CURVE_STRIDE);
    for row in rows {
        out.push(row.alpha.re);
        for value in [&row.f_mixed, &row.f_ideal, &row.f_semiclassical, &row.p_tel] {
            out.push(*value.as_ref().unwrap_or(&f64::NAN));
        }
    }
    Ok(out)
}

/// For each of `phi_steps` source phases over `[0, 2π)`: the quadrature mean
/// at LO phase 0 followed by `bins` histogram masses over
/// `[-half_width, half_width]`. Row stride is `bins + 1`.
#[allow(clippy::too_many_arguments)]
pub fn phase_map_inner(
    alpha: f64,
    eta_one: f64,
    eta_spd: f64,
    eta_hd: f64,
    mode_match: f64,
    phi_steps: usize,
    bins: usize,
    half_width: f64,
) -> Result<Vec<f64>, String> {
    if phi_steps == 0 || bins == 0 {
        return Err("phi_steps and bins must be positive".into());
    }
    let template = params(Complex64::new(alpha, 0.0), eta_one, eta_spd, eta_hd, mode_match)?;
    let phis: Vec<f64> = (0..phi_steps).map(|k| 2.0 * PI * k as f64 / phi_steps as f64).collect();
    let states = phase_sweep(&template, &phis, &SimOptions::default()).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(phi_steps * (bins + 1));
    for (_, rho) in states {
        out.push(quadrature_mean(&rho, 0.0).map_err(|e| e.to_string())?);
        out.extend(quadrature_histogram(&rho, 0.0, bins, half_width).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

/// `[ρ00, ρ11, Re ρ10, Im ρ10, p_tel, F, F_target_norm]` of Bob's qubit for a
/// complex source amplitude, where `F_target_norm` is the weight of the
/// normalized target `|0⟩ + α|1⟩` that the ideal protocol would deliver.
pub fn bob_state_inner(
    alpha_abs: f64,
    alpha_phase: f64,
    eta_one: f64,
    eta_spd: f64,
    eta_hd: f64,
    mode_match: f64,
) -> Result<Vec<f64>, String> {
    let alpha = Complex64::from_polar(alpha_abs, alpha_phase);
    let p = params(alpha, eta_one, eta_spd, eta_hd, mode_match)?;
    let bob = bob_ensemble(&p, &SimOptions::default()).map_err(|e| e.to_string())?;
    let f = teleportation_fidelity(&bob.rho, alpha).map_err(|e| e.to_string())?;
    let rho = &bob.rho;
    let coherence = rho.get(1, 0);
    let norm = 1.0 + alpha.norm_sqr();
    let target_overlap = (rho.get(0, 0) + (rho.get(0, 1) * alpha + rho.get(1, 0) * alpha.conj()) + rho.get(1, 1) * alpha.norm_sqr()).re / norm;
    Ok(vec![
        rho.get(0, 0).re,
        rho.get(1, 1).re,
        coherence.re,
        coherence.im,
        bob.probability,
        f,
        target_overlap,
    ])
}

#[wasm_bindgen]
pub fn fidelity_curves(
    eta_one: f64,
    eta_spd: f64,
    eta_hd: f64,
    mode_match: f64,
    alpha_max: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    fidelity_curves_inner(eta_one, eta_spd, eta_hd, mode_match, alpha_max, points).map_err(|e| JsError::new(&e))
}

#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn phase_map(
    alpha: f64,
    eta_one: f64,
    eta_spd: f64,
    eta_hd: f64,
    mode_match: f64,
    phi_steps: usize,
    bins: usize,
    half_width: f64,
) -> Result<Vec<f64>, JsError> {
    phase_map_inner(alpha, eta_one, eta_spd, eta_hd, mode_match, phi_steps, bins, half_width)
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn bob_state(
    alpha_abs: f64,
    alpha_phase: f64,
    eta_one: f64,
    eta_spd: f64,
    eta_hd: f64,
    mode_match: f64,
) -> Result<Vec<f64>, JsError> {
    bob_state_inner(alpha_abs, alpha_phase, eta_one, eta_spd, eta_hd, mode_match).map_err(|e| JsError::new(&e))
}

/// Fitted defaults as `[eta_one, eta_spd, eta_hd, mode_match]`.
#[wasm_bindgen]
pub fn fitted_parameters() -> Vec<f64> {
    vec![
        ProtocolParams::FITTED_ETA_ONE,
        ProtocolParams::FITTED_ETA_SPD,
        ProtocolParams::FITTED_ETA_HD,
        ProtocolParams::FITTED_MODE_MATCH,
    ]
}
