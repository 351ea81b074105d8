//! Linear-optical elements: beam splitters, the heralded single-photon
//! source, the nonlocal single-photon pair, and the Bernoulli loss channel.

use num_complex::Complex64;

use crate::error::{check_unit_interval, Error, Result};
use crate::fock::{DensityMatrix, FockState, ModeLayout, DEFAULT_TAIL_BOUND};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Two-mode beam splitter acting on `mode_a`, `mode_b` of a layout.
///
/// Creation operators transform as `a† → t a† + r b†`, `b† → −r a† + t b†`
/// with `t = √T`, `r = √(1−T)`; at `T = 1/2` this is the symmetric splitter
/// including its `(−1)ᵏ` phase on the second input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitterSpec {
    mode_a: usize,
    mode_b: usize,
    transmissivity: f64,
}

impl BeamSplitterSpec {
    pub fn new(mode_a: usize, mode_b: usize, transmissivity: f64) -> Result<Self> {
        if mode_a == mode_b {
            return Err(Error::InvalidLayout(format!(
                "beam splitter needs two distinct modes, got {mode_a} twice"
            )));
        }
        check_unit_interval("transmissivity", transmissivity)?;
        Ok(Self {
            mode_a,
            mode_b,
            transmissivity,
        })
    }

    pub fn symmetric(mode_a: usize, mode_b: usize) -> Result<Self> {
        Self::new(mode_a, mode_b, 0.5)
    }

    pub fn mode_a(&self) -> usize {
        self.mode_a
    }

    pub fn mode_b(&self) -> usize {
        self.mode_b
    }

    pub fn transmissivity(&self) -> f64 {
        self.transmissivity
    }

    /// The splitter undoing this one: swapping the port labels reverses the
    /// sign of the reflection amplitude.
    pub fn inverse(&self) -> Self {
        Self {
            mode_a: self.mode_b,
            mode_b: self.mode_a,
            transmissivity: self.transmissivity,
        }
    }
}

/// Heralded single-photon source with preparation efficiency `η_|1⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceSpec {
    eta_one: f64,
}

impl SourceSpec {
    pub fn new(eta_one: f64) -> Result<Self> {
        check_unit_interval("eta_one", eta_one)?;
        Ok(Self { eta_one })
    }

    pub fn eta_one(&self) -> f64 {
        self.eta_one
    }
}

/// Beam-splitter operator on a two-mode truncated space, stored as its
/// photon-number-conserving blocks.
///
/// Block `s` acts on `{|m, s−m⟩ : m = 0..=s}`. Only blocks with
/// `s ≤ N_max` are complete; inputs with more photons are not represented
/// and map to zero.
#[derive(Debug, Clone)]
pub struct BeamSplitterMatrix {
    cutoff: usize,
    transmissivity: f64,
    /// `blocks[s][p * (s+1) + m] = ⟨p, s−p| B |m, s−m⟩`
    blocks: Vec<Vec<f64>>,
}

impl BeamSplitterMatrix {
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn transmissivity(&self) -> f64 {
        self.transmissivity
    }

    /// `⟨p, q| B |m, n⟩`.
    pub fn element(&self, out: (usize, usize), input: (usize, usize)) -> f64 {
        let s = input.0 + input.1;
        if out.0 + out.1 != s || s > self.cutoff {
            return 0.0;
        }
        self.blocks[s][out.0 * (s + 1) + input.0]
    }

    pub fn block(&self, total: usize) -> Option<&[f64]> {
        self.blocks.get(total).map(Vec::as_slice)
    }

    /// Full `(N+1)² × (N+1)²` matrix over `|m, n⟩`, row-major.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let local = self.cutoff + 1;
        let dim = local * local;
        let mut dense = vec![ZERO; dim * dim];
        for (s, block) in self.blocks.iter().enumerate() {
            for p in 0..=s {
                for m in 0..=s {
                    let row = p * local + (s - p);
                    let col = m * local + (s - m);
                    dense[row * dim + col] = Complex64::new(block[p * (s + 1) + m], 0.0);
                }
            }
        }
        dense
    }

    /// Applies the operator to each two-mode slice of a column-stacked
    /// buffer: `data` holds `ncols` columns of length `layout.dim()` in
    /// row-major order (`data[row * ncols + col]`).
    fn apply_left(
        &self,
        spec: &BeamSplitterSpec,
        layout: ModeLayout,
        data: &mut [Complex64],
        ncols: usize,
    ) {
        let (sa, sb) = (layout.stride(spec.mode_a), layout.stride(spec.mode_b));
        let mut scratch = vec![ZERO; (self.cutoff + 1) * ncols];
        for base in slice_bases(layout, spec.mode_a, spec.mode_b) {
            for (s, block) in self.blocks.iter().enumerate() {
                let width = s + 1;
                let rows: Vec<usize> = (0..=s).map(|m| base + m * sa + (s - m) * sb).collect();
                let out = &mut scratch[..width * ncols];
                out.fill(ZERO);
                for p in 0..width {
                    for m in 0..width {
                        let b = block[p * width + m];
                        if b == 0.0 {
                            continue;
                        }
                        let src = &data[rows[m] * ncols..(rows[m] + 1) * ncols];
                        for (o, x) in out[p * ncols..(p + 1) * ncols].iter_mut().zip(src) {
                            *o += x * b;
                        }
                    }
                }
                for (p, &row) in rows.iter().enumerate() {
                    data[row * ncols..(row + 1) * ncols]
                        .copy_from_slice(&out[p * ncols..(p + 1) * ncols]);
                }
            }
            // Blocks beyond the cutoff are not representable.
            let local = layout.local_dim();
            for m in 0..local {
                for n in (self.cutoff + 1).saturating_sub(m)..local {
                    if m + n > self.cutoff {
                        let row = base + m * sa + n * sb;
                        data[row * ncols..(row + 1) * ncols].fill(ZERO);
                    }
                }
            }
        }
    }
}

/// Indices with zero occupation in both target modes; every two-mode slice
/// is `base + m·stride_a + n·stride_b`.
fn slice_bases(layout: ModeLayout, mode_a: usize, mode_b: usize) -> Vec<usize> {
    (0..layout.dim())
        .filter(|&i| layout.occupation(i, mode_a) == 0 && layout.occupation(i, mode_b) == 0)
        .collect()
}

fn factorials(up_to: usize) -> Vec<f64> {
    let mut f = vec![1.0; up_to + 1];
    for n in 1..=up_to {
        f[n] = f[n - 1] * n as f64;
    }
    f
}

fn binomial(fact: &[f64], n: usize, k: usize) -> f64 {
    fact[n] / (fact[k] * fact[n - k])
}

pub fn beam_splitter_matrix(spec: &BeamSplitterSpec, layout: ModeLayout) -> Result<BeamSplitterMatrix> {
    if layout.mode_count() != 2 {
        return Err(Error::LayoutMismatch(format!(
            "beam splitter matrix needs a two-mode layout, got {} modes",
            layout.mode_count()
        )));
    }
    Ok(splitter_blocks(spec.transmissivity, layout.cutoff()))
}

fn splitter_blocks(transmissivity: f64, cutoff: usize) -> BeamSplitterMatrix {
    let t = transmissivity.sqrt();
    let r = (1.0 - transmissivity).sqrt();
    let fact = factorials(cutoff);
    let blocks = (0..=cutoff)
        .map(|s| {
            let width = s + 1;
            let mut block = vec![0.0; width * width];
            for m in 0..=s {
                let n = s - m;
                for j in 0..=m {
                    for k in 0..=n {
                        let p = j + k;
                        let norm = (fact[p] * fact[s - p] / (fact[m] * fact[n])).sqrt();
                        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                        let amp = norm
                            * binomial(&fact, m, j)
                            * binomial(&fact, n, k)
                            * sign
                            * t.powi((j + n - k) as i32)
                            * r.powi((m - j + k) as i32);
                        block[p * width + m] += amp;
                    }
                }
            }
            block
        })
        .collect();
    BeamSplitterMatrix {
        cutoff,
        transmissivity,
        blocks,
    }
}

fn check_targets(spec: &BeamSplitterSpec, layout: ModeLayout) -> Result<()> {
    layout.check_mode(spec.mode_a)?;
    layout.check_mode(spec.mode_b)
}

/// Weight of diagonal entries (or squared amplitudes) sitting in two-mode
/// blocks whose total photon number exceeds the cutoff.
fn overflow_weight(layout: ModeLayout, spec: &BeamSplitterSpec, weights: impl Fn(usize) -> f64) -> f64 {
    (0..layout.dim())
        .filter(|&i| layout.occupation(i, spec.mode_a) + layout.occupation(i, spec.mode_b) > layout.cutoff())
        .map(weights)
        .sum()
}

pub fn beam_splitter_apply(rho: &DensityMatrix, spec: &BeamSplitterSpec) -> Result<DensityMatrix> {
    beam_splitter_apply_with_bound(rho, spec, DEFAULT_TAIL_BOUND)
}

/// `B ρ B†` with `B` embedded on the spec's two modes.
pub fn beam_splitter_apply_with_bound(
    rho: &DensityMatrix,
    spec: &BeamSplitterSpec,
    tail_bound: f64,
) -> Result<DensityMatrix> {
    let layout = rho.layout();
    check_targets(spec, layout)?;
    let dim = layout.dim();
    let weight = overflow_weight(layout, spec, |i| rho.get(i, i).re.abs());
    if weight > tail_bound {
        return Err(Error::PhotonNumberOverflow {
            weight,
            bound: tail_bound,
        });
    }
    let matrix = splitter_blocks(spec.transmissivity, layout.cutoff());
    // X = B ρ, then B ρ B† = (B X†)†
    let mut buffer = rho.elements().to_vec();
    matrix.apply_left(spec, layout, &mut buffer, dim);
    let mut adjoint = DensityMatrix::new(layout, buffer)?.adjoint();
    matrix.apply_left(spec, layout, adjoint.elements_mut(), dim);
    Ok(adjoint.adjoint())
}

pub fn beam_splitter_apply_state(state: &FockState, spec: &BeamSplitterSpec) -> Result<FockState> {
    beam_splitter_apply_state_with_bound(state, spec, DEFAULT_TAIL_BOUND)
}

/// `B |ψ⟩` with `B` embedded on the spec's two modes.
pub fn beam_splitter_apply_state_with_bound(
    state: &FockState,
    spec: &BeamSplitterSpec,
    tail_bound: f64,
) -> Result<FockState> {
    let layout = state.layout();
    check_targets(spec, layout)?;
    let weight = overflow_weight(layout, spec, |i| state.amplitudes()[i].norm_sqr());
    if weight > tail_bound {
        return Err(Error::PhotonNumberOverflow {
            weight,
            bound: tail_bound,
        });
    }
    let matrix = splitter_blocks(spec.transmissivity, layout.cutoff());
    let mut out = state.clone();
    matrix.apply_left(spec, layout, out.amplitudes_mut(), 1);
    Ok(out)
}

/// `η|1⟩⟨1| + (1−η)|0⟩⟨0|`.
pub fn prepare_heralded_photon(spec: &SourceSpec, layout: ModeLayout) -> Result<DensityMatrix> {
    if layout.mode_count() != 1 {
        return Err(Error::LayoutMismatch(format!(
            "heralded photon lives in one mode, got {}",
            layout.mode_count()
        )));
    }
    DensityMatrix::from_diagonal(layout, &[1.0 - spec.eta_one, spec.eta_one])
}

/// Vacuum and heralded photon combined on a symmetric splitter:
/// `B (|0⟩⟨0| ⊗ ρ_|1⟩) B†` with the photon entering mode 1.
pub fn make_epr(spec: &SourceSpec, layout: ModeLayout) -> Result<DensityMatrix> {
    if layout.mode_count() != 2 {
        return Err(Error::LayoutMismatch(format!(
            "EPR pair needs a two-mode layout, got {} modes",
            layout.mode_count()
        )));
    }
    let single = ModeLayout::single(layout.cutoff())?;
    let vacuum = FockState::vacuum(single).to_density_matrix();
    let input = vacuum.tensor(&prepare_heralded_photon(spec, single)?)?;
    beam_splitter_apply(&input, &BeamSplitterSpec::symmetric(0, 1)?)
}

/// Generalized Bernoulli transformation on one mode: each photon survives
/// independently with probability `eta`.
pub fn loss_channel(rho: &DensityMatrix, eta: f64, mode: usize) -> Result<DensityMatrix> {
    check_unit_interval("eta", eta)?;
    rho.layout().check_mode(mode)?;
    Ok(bernoulli_map(rho, eta, mode))
}

/// `ρ′_{mn} = Σ_k √(C(m+k,k) C(n+k,k)) η^{(m+n)/2} (1−η)^k ρ_{m+k,n+k}` on
/// `mode`. The formula is analytic in `η`; `η > 1` gives the inverse map.
pub(crate) fn bernoulli_map(rho: &DensityMatrix, eta: f64, mode: usize) -> DensityMatrix {
    let layout = rho.layout();
    let cutoff = layout.cutoff();
    let stride = layout.stride(mode);
    let dim = layout.dim();
    let fact = factorials(2 * cutoff);
    let root_eta = eta.sqrt();
    let leak = 1.0 - eta;
    // coef[m][n][k] without the shared (1-η)^k factor split
    let coefficient = |m: usize, n: usize, k: usize| -> f64 {
        (binomial(&fact, m + k, k) * binomial(&fact, n + k, k)).sqrt()
            * root_eta.powi((m + n) as i32)
            * leak.powi(k as i32)
    };
    let local = cutoff + 1;
    let mut table = vec![0.0; local * local * local];
    for m in 0..local {
        for n in 0..local {
            for k in 0..local - m.max(n) {
                table[(m * local + n) * local + k] = coefficient(m, n, k);
            }
        }
    }
    let src = rho.elements();
    let mut out = DensityMatrix::zeros(layout);
    let dst = out.elements_mut();
    for row in 0..dim {
        let m = layout.occupation(row, mode);
        for col in 0..dim {
            let n = layout.occupation(col, mode);
            let mut sum = ZERO;
            for k in 0..local - m.max(n) {
                let value = src[(row + k * stride) * dim + col + k * stride];
                if value != ZERO {
                    sum += value * table[(m * local + n) * local + k];
                }
            }
            dst[row * dim + col] = sum;
        }
    }
    out
}
