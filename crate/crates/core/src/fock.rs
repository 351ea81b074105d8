//! Truncated Fock-space states and the linear algebra shared by every
//! other module.
//!
//! Basis ordering is row-major over the occupation tuple with mode 0 as the
//! slowest index, so `|n_0, n_1, …⟩` sits at `Σ n_k (N+1)^(M-1-k)`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default per-mode photon-number cutoff.
pub const DEFAULT_CUTOFF: usize = 12;

/// Default bound on the Fock-expansion mass discarded by truncation.
pub const DEFAULT_TAIL_BOUND: f64 = 1e-10;

/// Default tolerance on `|Tr ρ - 1|` for operations that need a normalized state.
pub const DEFAULT_TRACE_TOLERANCE: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeLayout {
    mode_count: usize,
    cutoff: usize,
}

impl ModeLayout {
    pub fn new(mode_count: usize, cutoff: usize) -> Result<Self> {
        if mode_count == 0 {
            return Err(Error::InvalidLayout("mode count must be positive".into()));
        }
        if cutoff == 0 {
            return Err(Error::InvalidLayout("cutoff must be positive".into()));
        }
        let local = cutoff + 1;
        if local.checked_pow(mode_count as u32).is_none() {
            return Err(Error::InvalidLayout(format!(
                "{mode_count} modes at cutoff {cutoff} overflow the index space"
            )));
        }
        Ok(Self { mode_count, cutoff })
    }

    pub fn single(cutoff: usize) -> Result<Self> {
        Self::new(1, cutoff)
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Basis dimension of one mode, `N_max + 1`.
    pub fn local_dim(&self) -> usize {
        self.cutoff + 1
    }

    pub fn dim(&self) -> usize {
        self.local_dim().pow(self.mode_count as u32)
    }

    pub fn stride(&self, mode: usize) -> usize {
        self.local_dim().pow((self.mode_count - 1 - mode) as u32)
    }

    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        (index / self.stride(mode)) % self.local_dim()
    }

    pub fn occupations(&self, index: usize) -> Vec<usize> {
        (0..self.mode_count)
            .map(|mode| self.occupation(index, mode))
            .collect()
    }

    pub fn index(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.mode_count {
            return Err(Error::LayoutMismatch(format!(
                "{} occupations for {} modes",
                occupations.len(),
                self.mode_count
            )));
        }
        let local = self.local_dim();
        occupations.iter().try_fold(0usize, |acc, &n| {
            if n > self.cutoff {
                Err(Error::InvalidLayout(format!(
                    "occupation {n} exceeds cutoff {}",
                    self.cutoff
                )))
            } else {
                Ok(acc * local + n)
            }
        })
    }

    pub fn check_mode(&self, mode: usize) -> Result<()> {
        if mode < self.mode_count {
            Ok(())
        } else {
            Err(Error::ModeOutOfRange {
                index: mode,
                mode_count: self.mode_count,
            })
        }
    }

    fn concat(&self, other: &ModeLayout) -> Result<ModeLayout> {
        if self.cutoff != other.cutoff {
            return Err(Error::LayoutMismatch(format!(
                "cutoff {} vs {}",
                self.cutoff, other.cutoff
            )));
        }
        ModeLayout::new(self.mode_count + other.mode_count, self.cutoff)
    }
}

/// Pure state as an amplitude vector over the truncated basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    layout: ModeLayout,
    amplitudes: Vec<Complex64>,
}

impl FockState {
    pub fn new(layout: ModeLayout, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != layout.dim() {
            return Err(Error::LayoutMismatch(format!(
                "{} amplitudes for dimension {}",
                amplitudes.len(),
                layout.dim()
            )));
        }
        Ok(Self { layout, amplitudes })
    }

    /// Number state `|n_0, n_1, …⟩`.
    pub fn basis(layout: ModeLayout, occupations: &[usize]) -> Result<Self> {
        let index = layout.index(occupations)?;
        let mut amplitudes = vec![ZERO; layout.dim()];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { layout, amplitudes })
    }

    pub fn vacuum(layout: ModeLayout) -> Self {
        let mut amplitudes = vec![ZERO; layout.dim()];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Self { layout, amplitudes }
    }

    pub fn layout(&self) -> ModeLayout {
        self.layout
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm_sqr = self.norm_sqr();
        if !(norm_sqr > f64::MIN_POSITIVE) {
            return Err(Error::DegenerateState { trace: norm_sqr });
        }
        let scale = norm_sqr.sqrt().recip();
        Ok(Self {
            layout: self.layout,
            amplitudes: self.amplitudes.iter().map(|a| a * scale).collect(),
        })
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &FockState) -> Result<Complex64> {
        same_layout(&self.layout, &other.layout)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn tensor(&self, other: &FockState) -> Result<FockState> {
        let layout = self.layout.concat(&other.layout)?;
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        Ok(FockState { layout, amplitudes })
    }

    pub fn to_density_matrix(&self) -> DensityMatrix {
        let dim = self.layout.dim();
        let mut elements = vec![ZERO; dim * dim];
        for (i, a) in self.amplitudes.iter().enumerate() {
            if *a == ZERO {
                continue;
            }
            let row = &mut elements[i * dim..(i + 1) * dim];
            for (slot, b) in row.iter_mut().zip(&self.amplitudes) {
                *slot = a * b.conj();
            }
        }
        DensityMatrix {
            layout: self.layout,
            elements,
        }
    }

    pub fn with_global_phase(&self, phase: f64) -> FockState {
        let factor = Complex64::from_polar(1.0, phase);
        FockState {
            layout: self.layout,
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
        }
    }
}

/// Coherent state truncated at the layout cutoff, together with the
/// Fock-expansion mass left beyond it.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentState {
    pub state: FockState,
    pub tail_mass: f64,
}

pub fn coherent_state(alpha: Complex64, layout: ModeLayout) -> Result<CoherentState> {
    coherent_state_with_bound(alpha, layout, DEFAULT_TAIL_BOUND)
}

pub fn coherent_state_with_bound(
    alpha: Complex64,
    layout: ModeLayout,
    tail_bound: f64,
) -> Result<CoherentState> {
    if layout.mode_count() != 1 {
        return Err(Error::LayoutMismatch(format!(
            "coherent state needs one mode, got {}",
            layout.mode_count()
        )));
    }
    let cutoff = layout.cutoff();
    let mean = alpha.norm_sqr();
    let mut amplitudes = Vec::with_capacity(cutoff + 1);
    amplitudes.push(Complex64::new((-mean / 2.0).exp(), 0.0));
    for n in 1..=cutoff {
        let next = amplitudes[n - 1] * alpha / (n as f64).sqrt();
        amplitudes.push(next);
    }
    let tail_mass = poisson_tail(mean, amplitudes[cutoff].norm_sqr(), cutoff);
    if tail_mass > tail_bound {
        return Err(Error::CutoffTooSmall {
            cutoff,
            tail_mass,
            bound: tail_bound,
        });
    }
    Ok(CoherentState {
        state: FockState { layout, amplitudes },
        tail_mass,
    })
}

/// `Σ_{n > last} e^{-μ} μⁿ/n!` given the Poisson weight at `last`.
fn poisson_tail(mean: f64, weight_at_last: f64, last: usize) -> f64 {
    if weight_at_last == 0.0 && mean > 0.0 {
        // amplitudes underflowed before reaching `last`
        return 1.0;
    }
    let mut term = weight_at_last;
    let mut tail = 0.0;
    let mut n = last;
    loop {
        n += 1;
        term *= mean / n as f64;
        tail += term;
        if term <= tail * 1e-17 || term == 0.0 {
            break;
        }
        if n > last + 100_000 {
            break;
        }
    }
    tail
}

/// Smallest cutoff `N` for which a coherent amplitude `|α|` leaves at most
/// `tail_bound` of its Poisson weight at `n ≥ N`.
pub fn cutoff_for_amplitude(alpha_abs: f64, tail_bound: f64) -> usize {
    let mean = alpha_abs * alpha_abs;
    let mut weight = (-mean).exp();
    let mut n = 0usize;
    loop {
        // P(n ≥ N) with N = n + 1 is the tail beyond n
        if poisson_tail(mean, weight, n) <= tail_bound || n > 10_000 {
            return n + 1;
        }
        n += 1;
        weight *= mean / n as f64;
    }
}

/// Square density matrix over a truncated multi-mode basis, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    layout: ModeLayout,
    elements: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn new(layout: ModeLayout, elements: Vec<Complex64>) -> Result<Self> {
        let dim = layout.dim();
        if elements.len() != dim * dim {
            return Err(Error::LayoutMismatch(format!(
                "{} elements for dimension {dim}",
                elements.len()
            )));
        }
        Ok(Self { layout, elements })
    }

    pub fn zeros(layout: ModeLayout) -> Self {
        let dim = layout.dim();
        Self {
            layout,
            elements: vec![ZERO; dim * dim],
        }
    }

    pub fn from_diagonal(layout: ModeLayout, diagonal: &[f64]) -> Result<Self> {
        let dim = layout.dim();
        if diagonal.len() > dim {
            return Err(Error::LayoutMismatch(format!(
                "{} diagonal entries for dimension {dim}",
                diagonal.len()
            )));
        }
        let mut rho = Self::zeros(layout);
        for (i, &p) in diagonal.iter().enumerate() {
            rho.elements[i * dim + i] = Complex64::new(p, 0.0);
        }
        Ok(rho)
    }

    pub fn layout(&self) -> ModeLayout {
        self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn elements(&self) -> &[Complex64] {
        &self.elements
    }

    pub(crate) fn elements_mut(&mut self) -> &mut [Complex64] {
        &mut self.elements
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.elements[row * self.dim() + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        let dim = self.dim();
        self.elements[row * dim + col] = value;
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let dim = self.dim();
        (0..dim).map(|i| self.elements[i * dim + i].re).collect()
    }

    pub fn trace(&self) -> Complex64 {
        let dim = self.dim();
        (0..dim).map(|i| self.elements[i * dim + i]).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let trace = self.trace().re;
        if !(trace.abs() > f64::MIN_POSITIVE) {
            return Err(Error::DegenerateState { trace });
        }
        Ok(self.scaled(trace.recip()))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            layout: self.layout,
            elements: self.elements.iter().map(|z| z * factor).collect(),
        }
    }

    /// `self + weight · other`.
    pub fn add_scaled(&mut self, other: &DensityMatrix, weight: f64) -> Result<()> {
        same_layout(&self.layout, &other.layout)?;
        for (a, b) in self.elements.iter_mut().zip(&other.elements) {
            *a += b * weight;
        }
        Ok(())
    }

    /// Accumulates `weight · |ψ⟩⟨ψ|`.
    pub fn add_projector(&mut self, state: &FockState, weight: f64) -> Result<()> {
        same_layout(&self.layout, &state.layout)?;
        let dim = self.dim();
        for (i, a) in state.amplitudes.iter().enumerate() {
            if *a == ZERO {
                continue;
            }
            let wa = a * weight;
            let row = &mut self.elements[i * dim..(i + 1) * dim];
            for (slot, b) in row.iter_mut().zip(&state.amplitudes) {
                *slot += wa * b.conj();
            }
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        let dim = self.dim();
        let mut elements = vec![ZERO; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                elements[j * dim + i] = self.elements[i * dim + j].conj();
            }
        }
        Self {
            layout: self.layout,
            elements,
        }
    }

    pub fn hermitized(&self) -> Self {
        let adjoint = self.adjoint();
        Self {
            layout: self.layout,
            elements: self
                .elements
                .iter()
                .zip(&adjoint.elements)
                .map(|(a, b)| (a + b) * 0.5)
                .collect(),
        }
    }

    /// Largest `|ρ_ij - conj(ρ_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in i..dim {
                let d = (self.elements[i * dim + j] - self.elements[j * dim + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> Result<f64> {
        same_layout(&self.layout, &other.layout)?;
        Ok(self
            .elements
            .iter()
            .zip(&other.elements)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn expectation(&self, psi: &FockState) -> Result<Complex64> {
        same_layout(&self.layout, &psi.layout)?;
        let dim = self.dim();
        let mut total = ZERO;
        for (i, a) in psi.amplitudes.iter().enumerate() {
            if *a == ZERO {
                continue;
            }
            let row = &self.elements[i * dim..(i + 1) * dim];
            let inner: Complex64 = row.iter().zip(&psi.amplitudes).map(|(r, b)| r * b).sum();
            total += a.conj() * inner;
        }
        Ok(total)
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let layout = self.layout.concat(&other.layout)?;
        let (da, db) = (self.dim(), other.dim());
        let dim = da * db;
        let mut elements = vec![ZERO; dim * dim];
        for i in 0..da {
            for j in 0..da {
                let a = self.elements[i * da + j];
                if a == ZERO {
                    continue;
                }
                for k in 0..db {
                    let row = (i * db + k) * dim + j * db;
                    let src = &other.elements[k * db..(k + 1) * db];
                    for (slot, b) in elements[row..row + db].iter_mut().zip(src) {
                        *slot = a * b;
                    }
                }
            }
        }
        Ok(DensityMatrix { layout, elements })
    }

    /// Reduced state on the modes in `keep`, in ascending mode order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::Empty("partial trace needs at least one kept mode"));
        }
        let mut kept: Vec<usize> = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        for &mode in &kept {
            self.layout.check_mode(mode)?;
        }
        let traced: Vec<usize> = (0..self.layout.mode_count())
            .filter(|m| !kept.contains(m))
            .collect();
        let out_layout = ModeLayout::new(kept.len(), self.layout.cutoff())?;
        if traced.is_empty() {
            return Ok(self.clone());
        }
        let local = self.layout.local_dim();
        let dk = out_layout.dim();
        let dt = local.pow(traced.len() as u32);
        let offsets = |modes: &[usize], count: usize| -> Vec<usize> {
            (0..count)
                .map(|idx| {
                    let mut rem = idx;
                    let mut full = 0;
                    for &mode in modes.iter().rev() {
                        full += (rem % local) * self.layout.stride(mode);
                        rem /= local;
                    }
                    full
                })
                .collect()
        };
        let kept_offsets = offsets(&kept, dk);
        let traced_offsets = offsets(&traced, dt);
        let dim = self.dim();
        let mut out = DensityMatrix::zeros(out_layout);
        for (r, &kr) in kept_offsets.iter().enumerate() {
            for (c, &kc) in kept_offsets.iter().enumerate() {
                let mut sum = ZERO;
                for &t in &traced_offsets {
                    sum += self.elements[(kr + t) * dim + kc + t];
                }
                out.elements[r * dk + c] = sum;
            }
        }
        Ok(out)
    }

    /// Same state on a different per-mode cutoff: entries with any
    /// occupation above the new cutoff are dropped, new ones are zero.
    pub fn with_cutoff(&self, cutoff: usize) -> Result<DensityMatrix> {
        let layout = ModeLayout::new(self.layout.mode_count(), cutoff)?;
        let map: Vec<Option<usize>> = (0..self.dim())
            .map(|i| layout.index(&self.layout.occupations(i)).ok())
            .collect();
        let mut out = DensityMatrix::zeros(layout);
        let dim = self.dim();
        let out_dim = layout.dim();
        for (i, ni) in map.iter().enumerate() {
            let Some(ni) = ni else { continue };
            for (j, nj) in map.iter().enumerate() {
                if let Some(nj) = nj {
                    out.elements[ni * out_dim + nj] = self.elements[i * dim + j];
                }
            }
        }
        Ok(out)
    }

    fn to_nalgebra(&self) -> DMatrix<Complex64> {
        let dim = self.dim();
        DMatrix::from_fn(dim, dim, |i, j| self.elements[i * dim + j])
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut values: Vec<f64> = self
            .hermitized()
            .to_nalgebra()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        values.sort_by(f64::total_cmp);
        values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Decomposition `ρ = Σ wₖ |ψₖ⟩⟨ψₖ|` with `wₖ > 0`. Diagonal matrices
    /// decompose onto number states directly; anything else goes through a
    /// Hermitian eigen-decomposition.
    pub fn ensemble(&self) -> Vec<(f64, FockState)> {
        let dim = self.dim();
        let off_diagonal = (0..dim)
            .flat_map(|i| (0..dim).filter(move |&j| j != i).map(move |j| i * dim + j))
            .any(|k| self.elements[k] != ZERO);
        if !off_diagonal {
            return (0..dim)
                .filter_map(|i| {
                    let w = self.elements[i * dim + i].re;
                    (w > 0.0).then(|| {
                        let mut amplitudes = vec![ZERO; dim];
                        amplitudes[i] = Complex64::new(1.0, 0.0);
                        (
                            w,
                            FockState {
                                layout: self.layout,
                                amplitudes,
                            },
                        )
                    })
                })
                .collect();
        }
        let eigen = self.hermitized().to_nalgebra().symmetric_eigen();
        let scale = eigen.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        eigen
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > scale * 1e-15)
            .map(|(k, &w)| {
                let amplitudes = eigen.eigenvectors.column(k).iter().copied().collect();
                (
                    w,
                    FockState {
                        layout: self.layout,
                        amplitudes,
                    },
                )
            })
            .collect()
    }

    fn sqrt_psd(&self) -> DMatrix<Complex64> {
        let eigen = self.hermitized().to_nalgebra().symmetric_eigen();
        let roots = eigen.eigenvalues.map(|v| Complex64::new(v.max(0.0).sqrt(), 0.0));
        let v = &eigen.eigenvectors;
        v * DMatrix::from_diagonal(&roots) * v.adjoint()
    }
}

pub fn tensor(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    a.tensor(b)
}

pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    rho.partial_trace(keep)
}

/// `⟨ψ|ρ|ψ⟩` for a normalized `ρ`.
pub fn fidelity_pure(rho: &DensityMatrix, psi: &FockState) -> Result<f64> {
    fidelity_pure_with_tolerance(rho, psi, DEFAULT_TRACE_TOLERANCE)
}

pub fn fidelity_pure_with_tolerance(
    rho: &DensityMatrix,
    psi: &FockState,
    trace_tolerance: f64,
) -> Result<f64> {
    let trace = rho.trace().re;
    if (trace - 1.0).abs() > trace_tolerance {
        return Err(Error::NotNormalized { trace });
    }
    let value = rho.expectation(psi)?.re;
    Ok(if value < 0.0 && value > -1e-12 {
        0.0
    } else if value > 1.0 && value < 1.0 + 1e-12 {
        1.0
    } else {
        value
    })
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`. Negative eigenvalues of either
/// argument are clipped before taking square roots.
pub fn state_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_layout(&rho.layout, &sigma.layout)?;
    let root = rho.sqrt_psd();
    let inner = &root * sigma.hermitized().to_nalgebra() * &root;
    let inner = (&inner + inner.adjoint()) * Complex64::new(0.5, 0.0);
    let trace_root: f64 = inner
        .symmetric_eigenvalues()
        .iter()
        .map(|v| v.max(0.0).sqrt())
        .sum();
    Ok(trace_root * trace_root)
}

fn same_layout(a: &ModeLayout, b: &ModeLayout) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::LayoutMismatch(format!(
            "{} modes at cutoff {} vs {} modes at cutoff {}",
            a.mode_count, a.cutoff, b.mode_count, b.cutoff
        )))
    }
}
