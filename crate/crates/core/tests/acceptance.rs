//! Acceptance checks, one PASS/FAIL line each. Exits non-zero on any failure.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use scissors_core::detection::{povm_click, povm_no_click, DetectorSpec};
use scissors_core::fock::{state_fidelity, DensityMatrix, ModeLayout};
use scissors_core::homodyne::{default_theta_schedule, quadrature_mean, reconstruct, sample_quadratures_total};
use scissors_core::optics::{beam_splitter_matrix, loss_channel, BeamSplitterSpec};
use scissors_core::protocol::{
    bob_ensemble, fidelity_vs_alpha, phase_sweep, quantum_branch_ideal, semiclassical_statistics,
    teleportation_fidelity, unconditioned_bob, ProtocolParams, SimOptions,
};

type Outcome = Result<String, String>;

fn real(a: f64) -> Complex64 {
    Complex64::new(a, 0.0)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn step_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

fn within_time(elapsed: Duration, limit: f64, detail: String) -> Outcome {
    if elapsed.as_secs_f64() < limit {
        Ok(detail)
    } else {
        Err(format!("{detail}; took {:.2} s, limit {limit} s", elapsed.as_secs_f64()))
    }
}

fn vacuum_perfection() -> Outcome {
    let start = Instant::now();
    let levels = linspace(0.0, 1.0, 5);
    let opts = SimOptions::default();
    let (mut checked, mut skipped, mut worst) = (0, 0, 0.0f64);
    for &eta_one in &levels {
        for &eta_spd in &levels {
            for &eta_hd in &levels {
                for &m in &levels {
                    let params = ProtocolParams::new(real(0.0), eta_one, eta_spd, eta_hd, m).map_err(|e| e.to_string())?;
                    match bob_ensemble(&params, &opts) {
                        Ok(bob) => {
                            let f = teleportation_fidelity(&bob.rho, real(0.0)).map_err(|e| e.to_string())?;
                            worst = worst.max((f - 1.0).abs());
                            checked += 1;
                        }
                        Err(scissors_core::Error::NoTeleportation { .. }) => skipped += 1,
                        Err(e) => return Err(e.to_string()),
                    }
                }
            }
        }
    }
    let detail = format!("{checked} points with p_tel > 0 ({skipped} never herald), max |F-1| = {worst:.1e}");
    if worst > 1e-9 {
        return Err(detail);
    }
    within_time(start.elapsed(), 10.0, detail)
}

fn ideal_closed_form() -> Outcome {
    let start = Instant::now();
    let opts = SimOptions::default();
    let mut worst = 0.0f64;
    for a in linspace(0.0, 2.0, 50) {
        let params = ProtocolParams::fitted(real(a));
        let rho = quantum_branch_ideal(&params, &opts).map_err(|e| e.to_string())?.rho;
        let f = teleportation_fidelity(&rho, real(a)).map_err(|e| e.to_string())?;
        worst = worst.max((f - (-a * a).exp() * (1.0 + a * a)).abs());
    }
    let detail = format!("50 amplitudes, max deviation {worst:.1e}");
    if worst > 1e-9 {
        return Err(detail);
    }
    within_time(start.elapsed(), 5.0, detail)
}

fn quantum_beats_semiclassical() -> Outcome {
    let grid: Vec<Complex64> = step_grid(0.05, 2.0, 0.05).into_iter().map(real).collect();
    let rows = fidelity_vs_alpha(&ProtocolParams::fitted(real(0.0)), &grid, &SimOptions::default())
        .map_err(|e| e.to_string())?;
    let mut min_gap = f64::INFINITY;
    let mut at = 0.0;
    for row in &rows {
        let fm = row.f_mixed.clone().map_err(|e| format!("alpha {}: {e}", row.alpha.re))?;
        let fs = row.f_semiclassical.clone().map_err(|e| format!("alpha {}: {e}", row.alpha.re))?;
        if fm - fs < min_gap {
            min_gap = fm - fs;
            at = row.alpha.re;
        }
    }
    let detail = format!("{} amplitudes, min F_mixed - F_sc = {min_gap:.4e} at alpha = {at:.2}", rows.len());
    if min_gap > 0.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn small_alpha_fidelity() -> Outcome {
    let opts = SimOptions::default();
    let mut best = (0.0, 0.0);
    for a in step_grid(0.01, 0.2, 0.01) {
        let rho = bob_ensemble(&ProtocolParams::fitted(real(a)), &opts).map_err(|e| e.to_string())?.rho;
        let f = teleportation_fidelity(&rho, real(a)).map_err(|e| e.to_string())?;
        if f > best.0 {
            best = (f, a);
        }
    }
    let detail = format!("max F_mixed = {:.5} at alpha = {:.2}", best.0, best.1);
    if best.0 >= 0.98 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn calibration_identity() -> Outcome {
    let opts = SimOptions::default();
    let mut worst = 0.0f64;
    let mut count = 0;
    for &a in &[0.0, 0.5, 1.3] {
        for &eta_one in &[0.0, 0.3, 0.9, 1.0] {
            for &eta_hd in &[0.2, 0.54, 1.0] {
                let params = ProtocolParams::new(real(a), eta_one, 0.5, eta_hd, 0.56).map_err(|e| e.to_string())?;
                let rho = unconditioned_bob(&params, &opts).map_err(|e| e.to_string())?;
                worst = worst.max((rho.get(1, 1).re - eta_one * eta_hd / 2.0).abs());
                count += 1;
            }
        }
    }
    let params = ProtocolParams::new(real(0.5), 0.9, 0.5, 0.49 / 0.9, 0.56).map_err(|e| e.to_string())?;
    let fitted = unconditioned_bob(&params, &opts).map_err(|e| e.to_string())?.get(1, 1).re;
    let detail = format!("{count} grid points, max deviation {worst:.1e}; fraction at 0.49 = {fitted:.12}");
    if worst <= 1e-12 && (fitted - 0.245).abs() <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn scissors_truncation() -> Outcome {
    let opts = SimOptions::default();
    let mut worst = 0.0f64;
    for a in linspace(0.0, 2.0, 21) {
        let rho = quantum_branch_ideal(&ProtocolParams::fitted(real(a)), &opts)
            .map_err(|e| e.to_string())?
            .rho;
        let high: f64 = rho.diagonal().iter().skip(2).sum();
        worst = worst.max(high.abs());
    }
    let detail = format!("max weight on n >= 2 = {worst:.1e}");
    if worst < 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Least-squares fit of `y = a cos φ + b sin φ`; returns amplitude and
/// residual RMS.
fn cosine_fit(phis: &[f64], ys: &[f64]) -> (f64, f64) {
    let (mut cc, mut ss, mut cs, mut yc, mut ys_) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&p, &y) in phis.iter().zip(ys) {
        let (s, c) = p.sin_cos();
        cc += c * c;
        ss += s * s;
        cs += c * s;
        yc += y * c;
        ys_ += y * s;
    }
    let det = cc * ss - cs * cs;
    let a = (yc * ss - ys_ * cs) / det;
    let b = (ys_ * cc - yc * cs) / det;
    let rms = (phis
        .iter()
        .zip(ys)
        .map(|(&p, &y)| (y - a * p.cos() - b * p.sin()).powi(2))
        .sum::<f64>()
        / phis.len() as f64)
        .sqrt();
    (a.hypot(b), rms)
}

fn phase_covariance() -> Outcome {
    let phis: Vec<f64> = (0..24).map(|k| 2.0 * PI * k as f64 / 24.0).collect();
    let opts = SimOptions::default();
    let means = |params: &ProtocolParams| -> Result<Vec<f64>, String> {
        phase_sweep(params, &phis, &opts)
            .map_err(|e| e.to_string())?
            .iter()
            .map(|(_, rho)| quadrature_mean(rho, 0.0).map_err(|e| e.to_string()))
            .collect()
    };
    let fitted = ProtocolParams::fitted(real(0.5));
    let (amplitude, rms) = cosine_fit(&phis, &means(&fitted)?);
    let mut null = fitted;
    null.mode_match = 0.0;
    let null_max = means(&null)?.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let detail = format!("A = {amplitude:.6}, residual/A = {:.1e}; M = 0 max |mean| = {null_max:.1e}", rms / amplitude);
    if amplitude > 0.0 && rms < 1e-6 * amplitude && null_max == 0.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_density(rng: &mut ChaCha8Rng, layout: ModeLayout) -> DensityMatrix {
    let dim = layout.dim();
    let g: Vec<Complex64> = (0..dim * dim)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let mut rho = DensityMatrix::zeros(layout);
    for i in 0..dim {
        for j in 0..dim {
            let v: Complex64 = (0..dim).map(|k| g[i * dim + k] * g[j * dim + k].conj()).sum();
            rho.set(i, j, v);
        }
    }
    rho.normalized().unwrap()
}

fn unitarity_suite() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = [0.0f64; 4];

    for _ in 0..200 {
        let cutoff = rng.random_range(1..=10);
        let t = rng.random::<f64>();
        let layout = ModeLayout::new(2, cutoff).unwrap();
        let matrix = beam_splitter_matrix(&BeamSplitterSpec::new(0, 1, t).unwrap(), layout).unwrap();
        for s in 0..=cutoff {
            let block = matrix.block(s).unwrap();
            let w = s + 1;
            for i in 0..w {
                for j in 0..w {
                    let dot: f64 = (0..w).map(|k| block[k * w + i] * block[k * w + j]).sum();
                    let target = if i == j { 1.0 } else { 0.0 };
                    worst[0] = worst[0].max((dot - target).abs());
                }
            }
        }
    }

    for _ in 0..200 {
        let layout = ModeLayout::single(rng.random_range(1..=12)).unwrap();
        let rho = random_density(&mut rng, layout);
        let (e1, e2) = (rng.random::<f64>(), rng.random::<f64>());
        let once = loss_channel(&rho, e1, 0).unwrap();
        worst[1] = worst[1].max((once.trace() - rho.trace()).norm());
        let twice = loss_channel(&once, e2, 0).unwrap();
        let direct = loss_channel(&rho, e1 * e2, 0).unwrap();
        worst[2] = worst[2].max(twice.max_abs_diff(&direct).unwrap());
    }

    for _ in 0..200 {
        let layout = ModeLayout::single(rng.random_range(1..=30)).unwrap();
        let spec = DetectorSpec::on_off(rng.random::<f64>()).unwrap();
        let sum: Vec<f64> = povm_click(&spec, layout)
            .unwrap()
            .entries()
            .iter()
            .zip(povm_no_click(&spec, layout).unwrap().entries())
            .map(|(a, b)| a + b)
            .collect();
        for v in sum {
            worst[3] = worst[3].max((v - 1.0).abs());
        }
    }

    let detail = format!(
        "block unitarity {:.1e}, loss trace {:.1e}, loss composition {:.1e}, POVM completeness {:.1e}",
        worst[0], worst[1], worst[2], worst[3]
    );
    if worst.iter().any(|&w| w > 1e-12) {
        return Err(detail);
    }
    within_time(start.elapsed(), 10.0, detail)
}

fn tomography_round_trip() -> Outcome {
    let start = Instant::now();
    let alpha = real(0.5);
    let recon_cutoff = 2;
    let truth = bob_ensemble(&ProtocolParams::fitted(alpha), &SimOptions::default())
        .map_err(|e| e.to_string())?
        .rho;
    let thetas = default_theta_schedule(12);
    let data = sample_quadratures_total(&truth, &thetas, 20_000, 7).map_err(|e| e.to_string())?;
    let again = sample_quadratures_total(&truth, &thetas, 20_000, 7).map_err(|e| e.to_string())?;
    let rec = reconstruct(&data, recon_cutoff).map_err(|e| e.to_string())?;
    let rec_again = reconstruct(&again, recon_cutoff).map_err(|e| e.to_string())?;
    let deterministic = data == again && rec == rec_again;

    let truth_small = truth.with_cutoff(recon_cutoff).map_err(|e| e.to_string())?;
    let fidelity = state_fidelity(&rec.rho_hat, &truth_small).map_err(|e| e.to_string())?;
    let f_true = teleportation_fidelity(&truth, alpha).map_err(|e| e.to_string())?;
    let f_rec = teleportation_fidelity(&rec.rho_hat.normalized().map_err(|e| e.to_string())?, alpha)
        .map_err(|e| e.to_string())?;
    let detail = format!(
        "state fidelity {fidelity:.4}, F_true {f_true:.4}, F_rec {f_rec:.4}, |dF| {:.4}, deterministic {deterministic}",
        (f_rec - f_true).abs()
    );
    if fidelity < 0.99 || (f_rec - f_true).abs() >= 0.02 || !deterministic {
        return Err(detail);
    }
    within_time(start.elapsed(), 60.0, detail)
}

/// Direct simulation of the particle picture, photon by photon.
fn monte_carlo(params: &ProtocolParams, trials: u64, seed: u64) -> (f64, f64, f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let poisson = Poisson::new(params.alpha.norm_sqr()).ok();
    let (mut heralds, mut with_photon) = (0u64, 0u64);
    for _ in 0..trials {
        let source = poisson.as_ref().map_or(0, |p| p.sample(&mut rng) as u64);
        let u: f64 = rng.random();
        let (at_alice, at_bob) = if u < params.eta_one / 2.0 {
            (source + 1, false)
        } else if u < params.eta_one {
            (source, true)
        } else {
            (source, false)
        };
        let (mut d1, mut d2) = (false, false);
        for _ in 0..at_alice {
            let v: f64 = rng.random();
            if v < params.eta_spd / 2.0 {
                d1 = true;
            } else if v < params.eta_spd {
                d2 = true;
            }
        }
        if d1 && !d2 {
            heralds += 1;
            with_photon += u64::from(at_bob);
        }
    }
    let p_tel = heralds as f64 / trials as f64;
    let p_out = with_photon as f64 / heralds as f64;
    let se_tel = (p_tel * (1.0 - p_tel) / trials as f64).sqrt();
    let se_out = (p_out * (1.0 - p_out) / heralds as f64).sqrt();
    (p_tel, se_tel, p_out, se_out)
}

fn semiclassical_oracle() -> Outcome {
    let points = [
        (0.3, 0.9, 0.5),
        (0.7, 0.9, 0.5),
        (1.2, 0.6, 0.8),
        (1.8, 1.0, 0.3),
        (0.5, 0.4, 1.0),
    ];
    let mut lines = Vec::new();
    let mut ok = true;
    for (i, &(a, eta_one, eta_spd)) in points.iter().enumerate() {
        let params = ProtocolParams::new(real(a), eta_one, eta_spd, 0.54, 0.56).map_err(|e| e.to_string())?;
        let exact = semiclassical_statistics(&params, &SimOptions::default()).map_err(|e| e.to_string())?;
        let (p_tel, se_tel, p_out, se_out) = monte_carlo(&params, 10_000_000, 100 + i as u64);
        let z_tel = (exact.p_tel - p_tel) / se_tel;
        let z_out = (exact.p_out - p_out) / se_out;
        ok &= z_tel.abs() < 3.0 && z_out.abs() < 3.0;
        lines.push(format!("z=({z_tel:+.2},{z_out:+.2})"));
    }
    let detail = lines.join(" ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("vacuum-source perfection", vacuum_perfection),
        ("ideal-model closed form", ideal_closed_form),
        ("quantum beats semiclassical", quantum_beats_semiclassical),
        ("high small-alpha fidelity", small_alpha_fidelity),
        ("calibration identity", calibration_identity),
        ("scissors truncation", scissors_truncation),
        ("phase covariance", phase_covariance),
        ("unitarity and trace suite", unitarity_suite),
        ("tomography round trip", tomography_round_trip),
        ("semiclassical oracle agreement", semiclassical_oracle),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.2} s]", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {detail} [{secs:.2} s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
