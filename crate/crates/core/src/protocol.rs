//! End-to-end teleportation pipelines.
//!
//! Mode labels follow the optical layout: mode 0 carries the coherent
//! source, mode 1 is Alice's half of the nonlocal photon, mode 2 is Bob's
//! half. Alice's splitter mixes modes 0 and 1; D₁ watches output port 0 and
//! D₂ output port 1. With this assignment a successful herald leaves Bob
//! with `a₀|0⟩ + a₁|1⟩` and no correction is needed.

use num_complex::Complex64;

use crate::detection::{
    condition_on_bell_ensemble, DetectorSpec, DEFAULT_PROBABILITY_FLOOR,
};
use crate::error::{check_unit_interval, Error, Result};
use crate::fock::{
    coherent_state_with_bound, cutoff_for_amplitude, fidelity_pure, DensityMatrix, FockState,
    ModeLayout, DEFAULT_CUTOFF, DEFAULT_TAIL_BOUND,
};
use crate::optics::{
    beam_splitter_apply_state_with_bound, loss_channel, make_epr, prepare_heralded_photon,
    BeamSplitterSpec, SourceSpec,
};

/// The five physical knobs of the experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    pub alpha: Complex64,
    pub eta_one: f64,
    pub eta_spd: f64,
    pub eta_hd: f64,
    pub mode_match: f64,
}

impl ProtocolParams {
    pub const FITTED_ETA_ONE: f64 = 0.9;
    pub const FITTED_ETA_SPD: f64 = 0.5;
    pub const FITTED_ETA_HD: f64 = 0.54;
    pub const FITTED_MODE_MATCH: f64 = 0.56;

    pub fn new(alpha: Complex64, eta_one: f64, eta_spd: f64, eta_hd: f64, mode_match: f64) -> Result<Self> {
        let params = Self {
            alpha,
            eta_one,
            eta_spd,
            eta_hd,
            mode_match,
        };
        params.validate()?;
        Ok(params)
    }

    /// Efficiencies and mode matching at the experiment's fitted values.
    pub fn fitted(alpha: Complex64) -> Self {
        Self {
            alpha,
            eta_one: Self::FITTED_ETA_ONE,
            eta_spd: Self::FITTED_ETA_SPD,
            eta_hd: Self::FITTED_ETA_HD,
            mode_match: Self::FITTED_MODE_MATCH,
        }
    }

    pub fn with_alpha(&self, alpha: Complex64) -> Self {
        Self { alpha, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.re.is_finite() && self.alpha.im.is_finite()) {
            return Err(Error::ParameterOutOfRange {
                name: "alpha",
                value: self.alpha.norm(),
                range: "finite complex numbers",
            });
        }
        check_unit_interval("eta_one", self.eta_one)?;
        check_unit_interval("eta_spd", self.eta_spd)?;
        check_unit_interval("eta_hd", self.eta_hd)?;
        check_unit_interval("mode_match", self.mode_match)
    }
}

/// Numerical settings shared by the pipelines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    /// Per-mode cutoff; `None` picks the smallest adequate one for each `α`.
    pub cutoff: Option<usize>,
    pub tail_bound: f64,
    pub probability_floor: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            cutoff: None,
            tail_bound: DEFAULT_TAIL_BOUND,
            probability_floor: DEFAULT_PROBABILITY_FLOOR,
        }
    }
}

impl SimOptions {
    pub fn with_cutoff(cutoff: usize) -> Self {
        Self {
            cutoff: Some(cutoff),
            ..Self::default()
        }
    }

    /// Cutoff used for a source amplitude `|α|`: the configured one, or
    /// at least [`DEFAULT_CUTOFF`] and large enough that the source leaves
    /// no more than `tail_bound` beyond `N − 1` (room for the extra photon
    /// of the nonlocal pair at Alice's splitter).
    pub fn cutoff_for(&self, alpha_abs: f64) -> usize {
        self.cutoff
            .unwrap_or_else(|| DEFAULT_CUTOFF.max(cutoff_for_amplitude(alpha_abs, self.tail_bound)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchTag {
    Quantum,
    Semiclassical,
    Mixed,
}

/// Normalized single-mode state delivered to Bob and the probability of
/// the branch that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchResult {
    pub rho: DensityMatrix,
    pub probability: f64,
    pub tag: BranchTag,
}

/// Untruncated `|α⟩` on Bob's single-mode layout.
pub fn source_state(alpha: Complex64, cutoff: usize, opts: &SimOptions) -> Result<FockState> {
    Ok(coherent_state_with_bound(alpha, ModeLayout::single(cutoff)?, opts.tail_bound)?.state)
}

/// Pure components of the three-mode state right before Alice's detectors.
///
/// The diagonal input `|0⟩⟨0| ⊗ ρ_|1⟩` splits into number states; each is
/// sent through the pair-generating splitter, joined with `|α⟩`, and sent
/// through Alice's splitter.
pub fn three_mode_ensemble(alpha: Complex64, eta_one: f64, opts: &SimOptions) -> Result<Vec<(f64, FockState)>> {
    let cutoff = opts.cutoff_for(alpha.norm());
    let single = ModeLayout::single(cutoff)?;
    let source = coherent_state_with_bound(alpha, single, opts.tail_bound)?.state;
    let photon = prepare_heralded_photon(&SourceSpec::new(eta_one)?, single)?;
    let pair_input = FockState::vacuum(single).to_density_matrix().tensor(&photon)?;
    let pair_splitter = BeamSplitterSpec::symmetric(0, 1)?;
    let alice_splitter = BeamSplitterSpec::symmetric(0, 1)?;
    pair_input
        .ensemble()
        .into_iter()
        .map(|(w, component)| {
            let pair = beam_splitter_apply_state_with_bound(&component, &pair_splitter, opts.tail_bound)?;
            let joint = source.tensor(&pair)?;
            let mixed = beam_splitter_apply_state_with_bound(&joint, &alice_splitter, opts.tail_bound)?;
            Ok((w, mixed))
        })
        .collect()
}

fn run_quantum(
    alpha: Complex64,
    eta_one: f64,
    d1: &DetectorSpec,
    d2: &DetectorSpec,
    opts: &SimOptions,
) -> Result<BranchResult> {
    let ensemble = three_mode_ensemble(alpha, eta_one, opts)?;
    let conditioned = condition_on_bell_ensemble(&ensemble, d1, d2, opts.probability_floor)?;
    Ok(BranchResult {
        rho: conditioned.rho_out.normalized()?,
        probability: conditioned.p_tel,
        tag: BranchTag::Quantum,
    })
}

/// Fully mode-matched teleportation with click/no-click detectors.
pub fn quantum_branch(params: &ProtocolParams, opts: &SimOptions) -> Result<BranchResult> {
    params.validate()?;
    let detector = DetectorSpec::on_off(params.eta_spd)?;
    run_quantum(params.alpha, params.eta_one, &detector, &detector, opts)
}

/// Perfect photon source and number-resolving detectors; only `α` is used.
pub fn quantum_branch_ideal(params: &ProtocolParams, opts: &SimOptions) -> Result<BranchResult> {
    params.validate()?;
    let detector = DetectorSpec::number_resolving();
    run_quantum(params.alpha, 1.0, &detector, &detector, opts)
}

/// Heralding probability and Bob's photon probability in the particle
/// picture, before the `(p_tel, p_out)` pair is turned into a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiclassicalStatistics {
    pub p_tel: f64,
    pub p_out: f64,
}

/// Exact enumeration of the particle model: Poissonian source photons,
/// the pair photon present with probability `η₁` and sent to either side
/// with probability 1/2, every photon at Alice's splitter routed to D₁ or
/// D₂ with probability 1/2, and each detected with probability `η_SPD`.
pub fn semiclassical_statistics(params: &ProtocolParams, opts: &SimOptions) -> Result<SemiclassicalStatistics> {
    params.validate()?;
    let mean = params.alpha.norm_sqr();
    let miss = 1.0 - params.eta_spd;
    let eta_one = params.eta_one;

    // P(D₁ clicks, D₂ silent | k photons at Alice's splitter)
    let herald = |photons: usize| -> f64 {
        let mut route = 0.5f64.powi(photons as i32);
        let mut total = 0.0;
        for to_d1 in 0..=photons {
            if to_d1 > 0 {
                route *= (photons - to_d1 + 1) as f64 / to_d1 as f64;
            }
            let click = 1.0 - miss.powi(to_d1 as i32);
            let silent = miss.powi((photons - to_d1) as i32);
            total += route * click * silent;
        }
        total
    };

    let mut weight = (-mean).exp();
    let mut accounted = 0.0;
    let mut p_tel = 0.0;
    let mut p_bob_and_tel = 0.0;
    let mut n = 0usize;
    loop {
        let with_pair_at_alice = herald(n + 1);
        let without_pair_at_alice = herald(n);
        let to_bob = 0.5 * eta_one * without_pair_at_alice;
        let to_alice = 0.5 * eta_one * with_pair_at_alice;
        let absent = (1.0 - eta_one) * without_pair_at_alice;
        p_tel += weight * (to_bob + to_alice + absent);
        p_bob_and_tel += weight * to_bob;
        accounted += weight;
        n += 1;
        weight *= mean / n as f64;
        let remaining = 1.0 - accounted;
        if (n as f64 > mean && remaining <= opts.tail_bound * 1e-3) || n > 100_000 {
            break;
        }
    }
    if !(p_tel >= opts.probability_floor) || p_tel <= 0.0 {
        return Err(Error::NoTeleportation {
            probability: p_tel,
            floor: opts.probability_floor,
        });
    }
    Ok(SemiclassicalStatistics {
        p_tel,
        p_out: p_bob_and_tel / p_tel,
    })
}

/// Completely mode-mismatched teleportation: `diag(1 − p_out, p_out)`.
pub fn semiclassical_branch(params: &ProtocolParams, opts: &SimOptions) -> Result<BranchResult> {
    let stats = semiclassical_statistics(params, opts)?;
    let layout = ModeLayout::single(opts.cutoff_for(params.alpha.norm()))?;
    Ok(BranchResult {
        rho: DensityMatrix::from_diagonal(layout, &[1.0 - stats.p_out, stats.p_out])?,
        probability: stats.p_tel,
        tag: BranchTag::Semiclassical,
    })
}

/// Mixes the two branches with weights `M·p_tel` and `(1−M)·p_tel^sc`,
/// renormalizes, and applies the homodyne loss `η_HD` to Bob's mode.
/// A missing branch contributes zero weight.
pub fn mix_branches(
    quantum: Option<&BranchResult>,
    semiclassical: Option<&BranchResult>,
    params: &ProtocolParams,
    opts: &SimOptions,
) -> Result<BranchResult> {
    let w_q = quantum.map_or(0.0, |b| params.mode_match * b.probability);
    let w_sc = semiclassical.map_or(0.0, |b| (1.0 - params.mode_match) * b.probability);
    let total = w_q + w_sc;
    if !(total >= opts.probability_floor) || total <= 0.0 {
        return Err(Error::NoTeleportation {
            probability: total,
            floor: opts.probability_floor,
        });
    }
    let layout = quantum.or(semiclassical).map(|b| b.rho.layout()).expect("weight implies a branch");
    let mut rho = DensityMatrix::zeros(layout);
    for (branch, w) in [(quantum, w_q), (semiclassical, w_sc)] {
        if let Some(branch) = branch {
            if w > 0.0 {
                rho.add_scaled(&branch.rho, w / total)?;
            }
        }
    }
    Ok(BranchResult {
        rho: loss_channel(&rho, params.eta_hd, 0)?,
        probability: total,
        tag: BranchTag::Mixed,
    })
}

/// Treats a sub-floor herald as an absent branch; other errors propagate.
fn optional_branch(result: Result<BranchResult>) -> Result<Option<BranchResult>> {
    match result {
        Ok(b) => Ok(Some(b)),
        Err(Error::NoTeleportation { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// The ensemble Bob's homodyne detector sees after partial mode matching.
pub fn bob_ensemble(params: &ProtocolParams, opts: &SimOptions) -> Result<BranchResult> {
    params.validate()?;
    let quantum = if params.mode_match > 0.0 {
        optional_branch(quantum_branch(params, opts))?
    } else {
        None
    };
    let semiclassical = if params.mode_match < 1.0 {
        optional_branch(semiclassical_branch(params, opts))?
    } else {
        None
    };
    mix_branches(quantum.as_ref(), semiclassical.as_ref(), params, opts)
}

/// Teleportation fidelity `⟨α|ρ|α⟩` against the untruncated source. Only
/// the components of `|α⟩` inside `rho`'s cutoff contribute, so the overlap
/// is exact at any cutoff.
pub fn teleportation_fidelity(rho: &DensityMatrix, alpha: Complex64) -> Result<f64> {
    let source = coherent_state_with_bound(alpha, rho.layout(), f64::INFINITY)?.state;
    fidelity_pure(rho, &source)
}

/// One point of the fidelity-versus-amplitude sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub alpha: Complex64,
    /// Partially mode-matched model with homodyne loss.
    pub f_mixed: Result<f64>,
    /// Number-resolving detectors, perfect source, no loss.
    pub f_ideal: Result<f64>,
    /// Particle model with homodyne loss.
    pub f_semiclassical: Result<f64>,
    pub p_tel: Result<f64>,
    pub p_tel_semiclassical: Result<f64>,
}

impl SweepRow {
    pub fn is_complete(&self) -> bool {
        self.f_mixed.is_ok()
            && self.f_ideal.is_ok()
            && self.f_semiclassical.is_ok()
            && self.p_tel.is_ok()
            && self.p_tel_semiclassical.is_ok()
    }
}

fn sweep_point(params: &ProtocolParams, opts: &SimOptions) -> SweepRow {
    let alpha = params.alpha;
    if let Err(e) = params.validate() {
        return SweepRow {
            alpha,
            f_mixed: Err(e.clone()),
            f_ideal: Err(e.clone()),
            f_semiclassical: Err(e.clone()),
            p_tel: Err(e.clone()),
            p_tel_semiclassical: Err(e),
        };
    }
    let quantum = quantum_branch(params, opts);
    let semiclassical = semiclassical_branch(params, opts);
    let fidelity = |rho: &DensityMatrix| teleportation_fidelity(rho, alpha);

    let f_mixed = (|| {
        let q = optional_branch(quantum.clone())?;
        let sc = optional_branch(semiclassical.clone())?;
        let q = q.filter(|_| params.mode_match > 0.0);
        let sc = sc.filter(|_| params.mode_match < 1.0);
        fidelity(&mix_branches(q.as_ref(), sc.as_ref(), params, opts)?.rho)
    })();
    let f_ideal = quantum_branch_ideal(params, opts).and_then(|b| fidelity(&b.rho));
    let f_semiclassical = semiclassical
        .as_ref()
        .map_err(Clone::clone)
        .and_then(|b| fidelity(&loss_channel(&b.rho, params.eta_hd, 0)?));
    SweepRow {
        alpha,
        f_mixed,
        f_ideal,
        f_semiclassical,
        p_tel: quantum.map(|b| b.probability),
        p_tel_semiclassical: semiclassical.map(|b| b.probability),
    }
}

#[cfg(feature = "parallel")]
fn map_grid<T: Send, F>(grid: &[Complex64], f: F) -> Vec<T>
where
    F: Fn(Complex64) -> T + Sync + Send,
{
    use rayon::prelude::*;
    grid.par_iter().map(|&a| f(a)).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_grid<T, F>(grid: &[Complex64], f: F) -> Vec<T>
where
    F: Fn(Complex64) -> T,
{
    grid.iter().map(|&a| f(a)).collect()
}

/// Fidelities of the three models and both heralding probabilities over a
/// grid of source amplitudes. Per-point failures are recorded in the row.
pub fn fidelity_vs_alpha(template: &ProtocolParams, alpha_grid: &[Complex64], opts: &SimOptions) -> Result<Vec<SweepRow>> {
    if alpha_grid.is_empty() {
        return Err(Error::Empty("amplitude grid"));
    }
    Ok(map_grid(alpha_grid, |alpha| sweep_point(&template.with_alpha(alpha), opts)))
}

/// Bob's state without conditioning on Alice, after the homodyne loss.
/// Alice's operations cannot change it, so only the pair is propagated.
pub fn unconditioned_bob(params: &ProtocolParams, opts: &SimOptions) -> Result<DensityMatrix> {
    params.validate()?;
    let layout = ModeLayout::new(2, opts.cutoff_for(params.alpha.norm()))?;
    let pair = make_epr(&SourceSpec::new(params.eta_one)?, layout)?;
    loss_channel(&pair.partial_trace(&[1])?, params.eta_hd, 0)
}

/// Bob's ensemble as the source phase `φ` is scanned at fixed `|α|`.
pub fn phase_sweep(template: &ProtocolParams, phis: &[f64], opts: &SimOptions) -> Result<Vec<(f64, DensityMatrix)>> {
    if phis.is_empty() {
        return Err(Error::Empty("phase grid"));
    }
    let magnitude = template.alpha.norm();
    let opts = SimOptions {
        cutoff: Some(opts.cutoff_for(magnitude)),
        ..*opts
    };
    let alphas: Vec<Complex64> = phis.iter().map(|&phi| Complex64::from_polar(magnitude, phi)).collect();
    map_grid(&alphas, |alpha| bob_ensemble(&template.with_alpha(alpha), &opts).map(|b| b.rho))
        .into_iter()
        .zip(phis)
        .map(|(rho, &phi)| rho.map(|r| (phi, r)))
        .collect()
}
