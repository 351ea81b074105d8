use num_complex::Complex64;

use scissors_core::fock::{state_fidelity, DensityMatrix, FockState, ModeLayout};
use scissors_core::homodyne::{default_theta_schedule, reconstruct, sample_quadratures_total, QuadratureDataset};
use scissors_core::protocol::{bob_ensemble, teleportation_fidelity, ProtocolParams, SimOptions};

fn test_state() -> DensityMatrix {
    let layout = ModeLayout::single(2).unwrap();
    let psi = FockState::new(
        layout,
        vec![Complex64::new(0.7, 0.0), Complex64::new(0.3, 0.4), Complex64::new(0.0, 0.2)],
    )
    .unwrap()
    .normalized()
    .unwrap();
    let mut rho = psi.to_density_matrix().scaled(0.7);
    rho.add_scaled(&DensityMatrix::from_diagonal(layout, &[0.6, 0.4, 0.0]).unwrap(), 0.3)
        .unwrap();
    rho
}

fn rms_error(rho: &DensityMatrix, samples: usize, seed: u64) -> f64 {
    let data = sample_quadratures_total(rho, &default_theta_schedule(12), samples, seed).unwrap();
    let rec = reconstruct(&data, 2).unwrap();
    let n = rho.elements().len() as f64;
    (rec.rho_hat
        .elements()
        .iter()
        .zip(rho.elements())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        / n)
        .sqrt()
}

#[test]
fn estimator_error_shrinks_as_inverse_root_n() {
    let rho = test_state();
    let sizes = [1_000usize, 10_000, 100_000];
    let errors: Vec<f64> = sizes
        .iter()
        .map(|&n| (0..6).map(|seed| rms_error(&rho, n, 1000 + seed)).sum::<f64>() / 6.0)
        .collect();
    let xs: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((-0.7..=-0.3).contains(&slope), "slope {slope}, errors {errors:?}");
    // each point within a factor 2 of the c/√N law fitted through all three
    let c = (0..3).map(|i| errors[i] * (sizes[i] as f64).sqrt()).sum::<f64>() / 3.0;
    for (e, &n) in errors.iter().zip(&sizes) {
        let predicted = c / (n as f64).sqrt();
        assert!(e / predicted < 2.0 && predicted / e < 2.0, "{e} vs {predicted}");
    }
}

#[test]
fn fitted_state_round_trip_over_seeds() {
    let alpha = Complex64::new(0.5, 0.0);
    let truth = bob_ensemble(&ProtocolParams::fitted(alpha), &SimOptions::default()).unwrap().rho;
    let f_true = teleportation_fidelity(&truth, alpha).unwrap();
    let small = truth.with_cutoff(2).unwrap();
    for seed in 0..5 {
        let data = sample_quadratures_total(&truth, &default_theta_schedule(12), 20_000, seed).unwrap();
        let rec = reconstruct(&data, 2).unwrap();
        assert!(state_fidelity(&rec.rho_hat, &small).unwrap() >= 0.99);
        let f_rec = teleportation_fidelity(&rec.rho_hat.normalized().unwrap(), alpha).unwrap();
        assert!((f_rec - f_true).abs() < 0.02, "seed {seed}: {f_rec} vs {f_true}");
        let trace_dev = (rec.rho_hat.trace().re - 1.0).abs();
        assert!(trace_dev <= 3.0 * rec.trace_standard_error + 1e-12);
    }
}

#[test]
fn dataset_survives_text_round_trip() {
    let data = sample_quadratures_total(&test_state(), &default_theta_schedule(12), 500, 3).unwrap();
    let parsed = QuadratureDataset::parse(&data.to_text()).unwrap();
    assert_eq!(parsed, data);
    assert_eq!(reconstruct(&parsed, 2).unwrap(), reconstruct(&data, 2).unwrap());
}
