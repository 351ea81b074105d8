//! Photon detector models and the heralded Bell-measurement collapse.
//!
//! Every operator here is diagonal in the number basis, so POVM elements
//! are applied as per-occupation weights before tracing. That shortcut is
//! only valid for diagonal POVMs.

use num_complex::Complex64;

use crate::error::{check_unit_interval, Error, Result};
use crate::fock::{DensityMatrix, FockState, ModeLayout};

/// Default floor below which a heralding probability is treated as zero.
pub const DEFAULT_PROBABILITY_FLOOR: f64 = 1e-15;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorSpec {
    eta_spd: f64,
    discriminating: bool,
}

impl DetectorSpec {
    /// Click/no-click detector with quantum efficiency `eta_spd`.
    pub fn on_off(eta_spd: f64) -> Result<Self> {
        check_unit_interval("eta_spd", eta_spd)?;
        Ok(Self {
            eta_spd,
            discriminating: false,
        })
    }

    /// Ideal photon-number-resolving detector (unit efficiency).
    pub fn number_resolving() -> Self {
        Self {
            eta_spd: 1.0,
            discriminating: true,
        }
    }

    pub fn eta_spd(&self) -> f64 {
        self.eta_spd
    }

    pub fn is_discriminating(&self) -> bool {
        self.discriminating
    }
}

/// Operator diagonal in the single-mode number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalOperator(Vec<f64>);

impl DiagonalOperator {
    pub fn identity(layout: ModeLayout) -> Self {
        Self(vec![1.0; layout.local_dim()])
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn complement(&self) -> Self {
        Self(self.0.iter().map(|w| 1.0 - w).collect())
    }

    pub fn to_density_matrix(&self, layout: ModeLayout) -> Result<DensityMatrix> {
        DensityMatrix::from_diagonal(layout, &self.0)
    }
}

fn require_single(layout: ModeLayout) -> Result<()> {
    if layout.mode_count() == 1 {
        Ok(())
    } else {
        Err(Error::LayoutMismatch(format!(
            "detector operators act on one mode, got {}",
            layout.mode_count()
        )))
    }
}

fn require_on_off(spec: &DetectorSpec) -> Result<()> {
    if spec.discriminating {
        Err(Error::InvalidLayout(
            "click/no-click POVM requested for a number-resolving detector".into(),
        ))
    } else {
        Ok(())
    }
}

/// `Σₙ (1−η)ⁿ |n⟩⟨n|`.
pub fn povm_no_click(spec: &DetectorSpec, layout: ModeLayout) -> Result<DiagonalOperator> {
    require_single(layout)?;
    require_on_off(spec)?;
    let miss = 1.0 - spec.eta_spd;
    Ok(DiagonalOperator(
        (0..layout.local_dim()).map(|n| miss.powi(n as i32)).collect(),
    ))
}

/// `1 − Π^no-click`.
pub fn povm_click(spec: &DetectorSpec, layout: ModeLayout) -> Result<DiagonalOperator> {
    Ok(povm_no_click(spec, layout)?.complement())
}

/// `|n⟩⟨n|`.
pub fn projector_exactly_n(n: usize, layout: ModeLayout) -> Result<DiagonalOperator> {
    require_single(layout)?;
    if n > layout.cutoff() {
        return Err(Error::InvalidLayout(format!(
            "photon number {n} exceeds cutoff {}",
            layout.cutoff()
        )));
    }
    let mut entries = vec![0.0; layout.local_dim()];
    entries[n] = 1.0;
    Ok(DiagonalOperator(entries))
}

/// Operator for the heralding outcome of a detector: "click" on D₁
/// (exactly one photon if number-resolving) or "no click" on D₂ (vacuum).
fn herald_operator(spec: &DetectorSpec, layout: ModeLayout, expect_click: bool) -> Result<DiagonalOperator> {
    match (spec.discriminating, expect_click) {
        (true, true) => projector_exactly_n(1, layout),
        (true, false) => projector_exactly_n(0, layout),
        (false, true) => povm_click(spec, layout),
        (false, false) => povm_no_click(spec, layout),
    }
}

/// Unnormalized state left in mode 2 after the heralding outcome on modes
/// 0 and 1, with its probability `p_tel = Tr ρ_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct Conditioned {
    pub rho_out: DensityMatrix,
    pub p_tel: f64,
}

pub fn condition_on_bell(rho123: &DensityMatrix, d1: &DetectorSpec, d2: &DetectorSpec) -> Result<Conditioned> {
    condition_on_bell_with_floor(rho123, d1, d2, DEFAULT_PROBABILITY_FLOOR)
}

/// `Tr₁₂(ρ₁₂₃ Π₁ Π₂)` for D₁ on mode 0 and D₂ on mode 1.
pub fn condition_on_bell_with_floor(
    rho123: &DensityMatrix,
    d1: &DetectorSpec,
    d2: &DetectorSpec,
    floor: f64,
) -> Result<Conditioned> {
    let layout = require_three(rho123.layout())?;
    let weights = herald_weights(layout, d1, d2)?;
    let local = layout.local_dim();
    let single = ModeLayout::single(layout.cutoff())?;
    let mut rho_out = DensityMatrix::zeros(single);
    let dim = layout.dim();
    for (pair, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let base = pair * local;
        for b in 0..local {
            for c in 0..local {
                let v = rho123.get(base + b, base + c) * w;
                let current = rho_out.get(b, c);
                rho_out.set(b, c, current + v);
            }
        }
        debug_assert!(base + local <= dim);
    }
    finish(rho_out, floor)
}

/// Same collapse for `ρ₁₂₃ = Σ wₖ |ψₖ⟩⟨ψₖ|` given as its components.
pub fn condition_on_bell_ensemble(
    ensemble: &[(f64, FockState)],
    d1: &DetectorSpec,
    d2: &DetectorSpec,
    floor: f64,
) -> Result<Conditioned> {
    let first = ensemble
        .first()
        .ok_or(Error::Empty("conditioning needs at least one state"))?;
    let layout = require_three(first.1.layout())?;
    let weights = herald_weights(layout, d1, d2)?;
    let single = ModeLayout::single(layout.cutoff())?;
    let mut rho_out = DensityMatrix::zeros(single);
    for (w, psi) in ensemble {
        accumulate_pure(&mut rho_out, psi, &weights, *w)?;
    }
    finish(rho_out, floor)
}

/// Reduced state of mode 2 with no measurement on modes 0 and 1.
pub fn reduced_ensemble(ensemble: &[(f64, FockState)]) -> Result<DensityMatrix> {
    let first = ensemble
        .first()
        .ok_or(Error::Empty("reduction needs at least one state"))?;
    let layout = require_three(first.1.layout())?;
    let weights = vec![1.0; layout.local_dim() * layout.local_dim()];
    let mut rho = DensityMatrix::zeros(ModeLayout::single(layout.cutoff())?);
    for (w, psi) in ensemble {
        accumulate_pure(&mut rho, psi, &weights, *w)?;
    }
    Ok(rho)
}

fn accumulate_pure(rho_out: &mut DensityMatrix, psi: &FockState, weights: &[f64], w: f64) -> Result<()> {
    let layout = require_three(psi.layout())?;
    if layout.cutoff() + 1 != rho_out.dim() {
        return Err(Error::LayoutMismatch("ensemble members differ in cutoff".into()));
    }
    let local = layout.local_dim();
    let amps = psi.amplitudes();
    for (pair, &pw) in weights.iter().enumerate() {
        let weight = pw * w;
        if weight == 0.0 {
            continue;
        }
        let slice = &amps[pair * local..(pair + 1) * local];
        if slice.iter().all(|a| *a == ZERO) {
            continue;
        }
        for (b, x) in slice.iter().enumerate() {
            if *x == ZERO {
                continue;
            }
            let wx = x * weight;
            for (c, y) in slice.iter().enumerate() {
                let current = rho_out.get(b, c);
                rho_out.set(b, c, current + wx * y.conj());
            }
        }
    }
    Ok(())
}

fn require_three(layout: ModeLayout) -> Result<ModeLayout> {
    if layout.mode_count() == 3 {
        Ok(layout)
    } else {
        Err(Error::LayoutMismatch(format!(
            "Bell conditioning needs three modes, got {}",
            layout.mode_count()
        )))
    }
}

/// `Π₁[n₁] · Π₂[n₂]` indexed by `n₁ (N+1) + n₂`.
fn herald_weights(layout: ModeLayout, d1: &DetectorSpec, d2: &DetectorSpec) -> Result<Vec<f64>> {
    let single = ModeLayout::single(layout.cutoff())?;
    let click = herald_operator(d1, single, true)?;
    let silent = herald_operator(d2, single, false)?;
    Ok(click
        .entries()
        .iter()
        .flat_map(|a| silent.entries().iter().map(move |b| a * b))
        .collect())
}

fn finish(rho_out: DensityMatrix, floor: f64) -> Result<Conditioned> {
    let p_tel = rho_out.trace().re;
    if !(p_tel >= floor) || p_tel <= 0.0 {
        return Err(Error::NoTeleportation {
            probability: p_tel,
            floor,
        });
    }
    Ok(Conditioned { rho_out, p_tel })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::partial_trace;
    use crate::optics::{make_epr, SourceSpec};

    fn one(cutoff: usize) -> ModeLayout {
        ModeLayout::single(cutoff).unwrap()
    }

    #[test]
    fn no_click_examples() {
        let layout = one(4);
        let perfect = povm_no_click(&DetectorSpec::on_off(1.0).unwrap(), layout).unwrap();
        assert_eq!(perfect.entries(), &[1.0, 0.0, 0.0, 0.0, 0.0]);
        let blind = povm_no_click(&DetectorSpec::on_off(0.0).unwrap(), layout).unwrap();
        assert_eq!(blind, DiagonalOperator::identity(layout));
        let half = povm_no_click(&DetectorSpec::on_off(0.5).unwrap(), layout).unwrap();
        assert_eq!(half.entries()[2], 0.25);
    }

    #[test]
    fn click_examples() {
        let layout = one(4);
        let perfect = povm_click(&DetectorSpec::on_off(1.0).unwrap(), layout).unwrap();
        assert_eq!(perfect.entries(), &[0.0, 1.0, 1.0, 1.0, 1.0]);
        for eta in [0.0, 0.3, 0.9] {
            let c = povm_click(&DetectorSpec::on_off(eta).unwrap(), layout).unwrap();
            assert_eq!(c.entries()[0], 0.0);
        }
        let half = povm_click(&DetectorSpec::on_off(0.5).unwrap(), layout).unwrap();
        assert_eq!(half.entries()[2], 0.75);
    }

    #[test]
    fn number_projectors_are_complete() {
        let layout = one(5);
        let mut total = vec![0.0; 6];
        for n in 0..=5 {
            let p = projector_exactly_n(n, layout).unwrap();
            for (t, w) in total.iter_mut().zip(p.entries()) {
                *t += w;
            }
        }
        assert_eq!(total, vec![1.0; 6]);
        assert_eq!(projector_exactly_n(0, layout).unwrap().entries()[0], 1.0);
        assert!(projector_exactly_n(6, layout).is_err());
        assert!(povm_click(&DetectorSpec::number_resolving(), layout).is_err());
        assert!(DetectorSpec::on_off(1.01).is_err());
    }

    #[test]
    fn single_photon_projector_selects_photon_branch() {
        let layout = ModeLayout::new(2, 2).unwrap();
        let epr = make_epr(&SourceSpec::new(1.0).unwrap(), layout).unwrap();
        let proj = projector_exactly_n(1, one(2)).unwrap().to_density_matrix(one(2)).unwrap();
        let id = DiagonalOperator::identity(one(2)).to_density_matrix(one(2)).unwrap();
        let op = proj.tensor(&id).unwrap();
        // Tr[(|1⟩⟨1| ⊗ 1) ρ] picks the half of the pair with the photon in mode 0
        let mut p = 0.0;
        for i in 0..op.dim() {
            p += (op.get(i, i) * epr.get(i, i)).re;
        }
        assert!((p - 0.5).abs() < 1e-15);
    }

    fn three_mode(alpha: f64, eta_one: f64, cutoff: usize) -> DensityMatrix {
        let single = one(cutoff);
        let coh = crate::fock::coherent_state_with_bound(Complex64::new(alpha, 0.0), single, 1e-3)
            .unwrap()
            .state
            .to_density_matrix();
        let epr = make_epr(&SourceSpec::new(eta_one).unwrap(), ModeLayout::new(2, cutoff).unwrap()).unwrap();
        let input = coh.tensor(&epr).unwrap();
        crate::optics::beam_splitter_apply_with_bound(
            &input,
            &crate::optics::BeamSplitterSpec::symmetric(0, 1).unwrap(),
            1e-3,
        )
        .unwrap()
    }

    #[test]
    fn vacuum_source_heralds_with_quarter_probability() {
        let rho = three_mode(0.0, 1.0, 3);
        let d = DetectorSpec::on_off(1.0).unwrap();
        let out = condition_on_bell(&rho, &d, &d).unwrap();
        assert!((out.p_tel - 0.25).abs() < 1e-15);
        let normalized = out.rho_out.normalized().unwrap();
        assert!((normalized.get(0, 0).re - 1.0).abs() < 1e-15);
        assert!(out.rho_out.hermiticity_error() < 1e-15);
    }

    #[test]
    fn blind_trigger_detector_never_heralds() {
        let rho = three_mode(0.5, 1.0, 6);
        let blind = DetectorSpec::on_off(0.0).unwrap();
        let good = DetectorSpec::on_off(1.0).unwrap();
        let err = condition_on_bell(&rho, &blind, &good).unwrap_err();
        assert!(matches!(err, Error::NoTeleportation { probability, .. } if probability == 0.0));
    }

    #[test]
    fn ensemble_route_matches_dense_route() {
        let rho = three_mode(0.6, 0.8, 5);
        let ensemble = rho.ensemble();
        for (d1, d2) in [
            (DetectorSpec::on_off(0.5).unwrap(), DetectorSpec::on_off(0.5).unwrap()),
            (DetectorSpec::number_resolving(), DetectorSpec::number_resolving()),
        ] {
            let dense = condition_on_bell(&rho, &d1, &d2).unwrap();
            let split = condition_on_bell_ensemble(&ensemble, &d1, &d2, DEFAULT_PROBABILITY_FLOOR).unwrap();
            assert!(dense.rho_out.max_abs_diff(&split.rho_out).unwrap() < 1e-12);
        }
        let reduced = reduced_ensemble(&ensemble).unwrap();
        let oracle = partial_trace(&rho, &[2]).unwrap();
        assert!(reduced.max_abs_diff(&oracle).unwrap() < 1e-12);
    }

    #[test]
    fn conditioning_equals_explicit_projection_and_trace() {
        let cutoff = 4;
        let rho = three_mode(0.4, 0.9, cutoff);
        let d = DetectorSpec::on_off(0.5).unwrap();
        let single = one(cutoff);
        let click = povm_click(&d, single).unwrap().to_density_matrix(single).unwrap();
        let silent = povm_no_click(&d, single).unwrap().to_density_matrix(single).unwrap();
        let id = DiagonalOperator::identity(single).to_density_matrix(single).unwrap();
        let op = click.tensor(&silent).unwrap().tensor(&id).unwrap();
        // ρ·Π as a dense product, Π diagonal
        let mut product = rho.clone();
        for r in 0..rho.dim() {
            for c in 0..rho.dim() {
                product.set(r, c, rho.get(r, c) * op.get(c, c));
            }
        }
        let oracle = partial_trace(&product, &[2]).unwrap();
        let out = condition_on_bell(&rho, &d, &d).unwrap();
        assert!(out.rho_out.max_abs_diff(&oracle).unwrap() < 1e-14);
    }
}
