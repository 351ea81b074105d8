use std::f64::consts::PI;

use num_complex::Complex64;
use scissors_core::fock::state_fidelity;
use scissors_core::homodyne::{
    default_theta_schedule, loss_correct, quadrature_histogram, quadrature_mean, quadrature_second_moment,
    reconstruct, sample_quadratures_total, QuadratureDataset,
};
use scissors_core::protocol::{
    bob_ensemble, fidelity_vs_alpha, phase_sweep, teleportation_fidelity, ProtocolParams, SimOptions, SweepRow,
};

use crate::config::{Command, RunConfig};
use crate::error::CliError;
use crate::output::{Cell, Document};

/// A finished run. `failures` counts rows that hit a numerical error; the
/// document is still written, then the process exits non-zero.
pub struct Outcome {
    pub document: Document,
    pub failures: usize,
    pub dataset: Option<QuadratureDataset>,
}

impl Outcome {
    fn complete(document: Document) -> Self {
        Self {
            document,
            failures: 0,
            dataset: None,
        }
    }
}

pub fn run(config: &RunConfig) -> Result<Outcome, CliError> {
    config.validate()?;
    match config.command {
        Command::FidelitySweep => fidelity_sweep(config),
        Command::PhaseSweep => phase_sweep_run(config),
        Command::TomographyRoundtrip => tomography(config),
        Command::SingleShot => single_shot(config),
    }
}

fn options(config: &RunConfig) -> SimOptions {
    SimOptions {
        cutoff: config.cutoff,
        ..SimOptions::default()
    }
}

fn params(config: &RunConfig, alpha: Complex64) -> Result<ProtocolParams, CliError> {
    Ok(ProtocolParams::new(
        alpha,
        config.eta_one,
        config.eta_spd,
        config.eta_hd,
        config.mode_match,
    )?)
}

fn single_alpha(config: &RunConfig) -> Complex64 {
    Complex64::from_polar(config.alpha, config.alpha_phase)
}

const SWEEP_COLUMNS: [&str; 9] = [
    "alpha_abs",
    "alpha_phase",
    "cutoff",
    "f_mixed",
    "f_ideal",
    "f_semiclassical",
    "p_tel",
    "p_tel_sc",
    "status",
];

fn sweep_cells(row: &SweepRow, opts: &SimOptions) -> (Vec<Cell>, bool) {
    let values = [
        &row.f_mixed,
        &row.f_ideal,
        &row.f_semiclassical,
        &row.p_tel,
        &row.p_tel_semiclassical,
    ];
    let mut cells = vec![
        Cell::num(row.alpha.norm()),
        Cell::num(row.alpha.arg()),
        Cell::Int(opts.cutoff_for(row.alpha.norm()) as u64),
    ];
    cells.extend(values.iter().map(|v| Cell::num(*v.as_ref().unwrap_or(&f64::NAN))));
    let problems: Vec<String> = SWEEP_COLUMNS[3..8]
        .iter()
        .zip(values)
        .filter_map(|(name, v)| v.as_ref().err().map(|e| format!("{name}: {e}")))
        .collect();
    let ok = problems.is_empty();
    cells.push(Cell::Text(if ok { "ok".into() } else { problems.join("; ") }));
    (cells, ok)
}

fn cutoff_range(opts: &SimOptions, magnitudes: impl Iterator<Item = f64>) -> String {
    let cutoffs: Vec<usize> = magnitudes.map(|a| opts.cutoff_for(a)).collect();
    let (lo, hi) = (
        cutoffs.iter().copied().min().unwrap_or(0),
        cutoffs.iter().copied().max().unwrap_or(0),
    );
    if lo == hi {
        lo.to_string()
    } else {
        format!("{lo}..{hi}")
    }
}

fn fidelity_sweep(config: &RunConfig) -> Result<Outcome, CliError> {
    let opts = options(config);
    let grid: Vec<Complex64> = config
        .alpha_grid()
        .into_iter()
        .map(|a| Complex64::from_polar(a, config.alpha_phase))
        .collect();
    let template = params(config, Complex64::new(0.0, 0.0))?;
    // a fixed cutoff must hold the largest amplitude; fail before computing
    if config.cutoff.is_some() {
        let largest = grid.iter().map(|a| a.norm()).fold(0.0, f64::max);
        scissors_core::protocol::source_state(Complex64::new(largest, 0.0), opts.cutoff_for(largest), &opts)?;
    }
    let rows = fidelity_vs_alpha(&template, &grid, &opts)?;
    let mut doc = Document::new(config, SWEEP_COLUMNS.iter().map(|s| s.to_string()).collect());
    doc.info.push(("resolved_cutoff".into(), cutoff_range(&opts, grid.iter().map(|a| a.norm()))));
    let mut failures = 0;
    for row in &rows {
        let (cells, ok) = sweep_cells(row, &opts);
        failures += usize::from(!ok);
        doc.rows.push(cells);
    }
    Ok(Outcome {
        document: doc,
        failures,
        dataset: None,
    })
}

fn single_shot(config: &RunConfig) -> Result<Outcome, CliError> {
    let opts = options(config);
    let alpha = single_alpha(config);
    let p = params(config, alpha)?;
    let rows = fidelity_vs_alpha(&p, &[alpha], &opts)?;
    let (mut cells, ok) = sweep_cells(&rows[0], &opts);
    let status = cells.pop().expect("status column");
    let bob = ["bob_p0", "bob_p1", "bob_coherence_re", "bob_coherence_im"];
    match bob_ensemble(&p, &opts) {
        Ok(b) => {
            let c = b.rho.get(1, 0);
            cells.extend([b.rho.get(0, 0).re, b.rho.get(1, 1).re, c.re, c.im].map(Cell::num));
        }
        Err(_) => cells.extend(bob.map(|_| Cell::num(f64::NAN))),
    }
    cells.push(status);

    let (last, head) = SWEEP_COLUMNS.split_last().expect("columns");
    let columns = head.iter().chain(&bob).chain([last]).map(|s| s.to_string()).collect();
    let mut doc = Document::new(config, columns);
    doc.info.push(("resolved_cutoff".into(), opts.cutoff_for(config.alpha).to_string()));
    doc.rows.push(cells);
    Ok(Outcome {
        document: doc,
        failures: usize::from(!ok),
        dataset: None,
    })
}

fn phase_sweep_run(config: &RunConfig) -> Result<Outcome, CliError> {
    let opts = options(config);
    let template = params(config, Complex64::new(config.alpha, 0.0))?;
    let phis: Vec<f64> = (0..config.phi_steps)
        .map(|k| 2.0 * PI * k as f64 / config.phi_steps as f64)
        .collect();
    let states = phase_sweep(&template, &phis, &opts)?;
    let mut columns: Vec<String> = ["phi", "x_mean", "x_second_moment", "x_variance"].map(String::from).to_vec();
    columns.extend((0..config.hist_bins).map(|b| format!("hist_{b:03}")));
    let mut doc = Document::new(config, columns);
    let width = 2.0 * config.hist_half_width / config.hist_bins as f64;
    doc.info.push(("resolved_cutoff".into(), opts.cutoff_for(config.alpha).to_string()));
    doc.info.push(("lo_phase".into(), "0".into()));
    doc.info.push((
        "histogram".into(),
        format!(
            "{} bins of width {} from {}, probability mass per bin",
            config.hist_bins, width, -config.hist_half_width
        ),
    ));
    for (phi, rho) in states {
        let mean = quadrature_mean(&rho, 0.0)?;
        let second = quadrature_second_moment(&rho, 0.0)?;
        let mut row = vec![Cell::num(phi), Cell::num(mean), Cell::num(second), Cell::num(second - mean * mean)];
        row.extend(
            quadrature_histogram(&rho, 0.0, config.hist_bins, config.hist_half_width)?
                .into_iter()
                .map(Cell::num),
        );
        doc.rows.push(row);
    }
    Ok(Outcome::complete(doc))
}

fn tomography(config: &RunConfig) -> Result<Outcome, CliError> {
    let opts = options(config);
    let alpha = single_alpha(config);
    let p = params(config, alpha)?;
    let truth = bob_ensemble(&p, &opts)?.rho;
    let thetas = default_theta_schedule(config.theta_steps);
    let data = sample_quadratures_total(&truth, &thetas, config.samples, config.seed)?;
    let rec = reconstruct(&data, config.recon_cutoff)?;
    let truth_small = truth.with_cutoff(config.recon_cutoff)?;

    let columns = ["m", "n", "true_re", "true_im", "estimate_re", "estimate_im", "standard_error", "abs_error"];
    let mut doc = Document::new(config, columns.map(String::from).to_vec());
    doc.info.push(("resolved_cutoff".into(), opts.cutoff_for(config.alpha).to_string()));
    let dim = config.recon_cutoff + 1;
    let mut max_error = 0.0f64;
    for m in 0..dim {
        for n in 0..dim {
            let (t, e) = (truth_small.get(m, n), rec.rho_hat.get(m, n));
            max_error = max_error.max((t - e).norm());
            doc.rows.push(vec![
                Cell::Int(m as u64),
                Cell::Int(n as u64),
                Cell::num(t.re),
                Cell::num(t.im),
                Cell::num(e.re),
                Cell::num(e.im),
                Cell::num(rec.standard_error(m, n)),
                Cell::num((t - e).norm()),
            ]);
        }
    }
    let f_true = teleportation_fidelity(&truth, alpha)?;
    let f_rec = teleportation_fidelity(&rec.rho_hat.normalized()?, alpha)?;
    let summary = &mut doc.summary;
    summary.push(("samples".into(), Cell::Int(data.len() as u64)));
    summary.push(("state_fidelity".into(), Cell::num(state_fidelity(&rec.rho_hat, &truth_small)?)));
    summary.push(("f_true".into(), Cell::num(f_true)));
    summary.push(("f_reconstructed".into(), Cell::num(f_rec)));
    summary.push(("f_difference".into(), Cell::num(f_rec - f_true)));
    summary.push(("trace".into(), Cell::num(rec.rho_hat.trace().re)));
    summary.push(("trace_standard_error".into(), Cell::num(rec.trace_standard_error)));
    summary.push(("max_abs_error".into(), Cell::num(max_error)));
    if config.loss_correct {
        let before_loss = bob_ensemble(&ProtocolParams { eta_hd: 1.0, ..p }, &opts)?.rho;
        let corrected = loss_correct(&rec.rho_hat, config.eta_hd)?;
        let f_corrected = teleportation_fidelity(&corrected.rho.normalized()?, alpha)?;
        summary.push(("f_true_before_loss".into(), Cell::num(teleportation_fidelity(&before_loss, alpha)?)));
        summary.push(("f_loss_corrected".into(), Cell::num(f_corrected)));
        summary.push(("loss_corrected_min_eigenvalue".into(), Cell::num(corrected.min_eigenvalue)));
        summary.push((
            "loss_corrected_physical".into(),
            Cell::Text(corrected.physical.to_string()),
        ));
    }
    Ok(Outcome {
        document: doc,
        failures: 0,
        dataset: Some(data),
    })
}
