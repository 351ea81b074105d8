//! Balanced homodyne statistics of a single mode and density-matrix
//! reconstruction from quadrature samples by pattern-function averaging.
//!
//! Quadratures are `x̂_θ = (â e^{−iθ} + â† e^{iθ})/√2`, so the vacuum has
//! variance 1/2 and `pr(x|θ) = Σ ρ_mn e^{i(n−m)θ} ψ_m(x) ψ_n(x)`.

use std::f64::consts::{PI, SQRT_2};
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, ModeLayout};
use crate::optics::bernoulli_map;

pub const CONVENTION: &str = "vacuum-variance-1/2";

/// Default spacing of the tabulation and sampling grids.
pub const DEFAULT_GRID_STEP: f64 = 1e-3;

/// Smallest efficiency [`loss_correct`] will invert by default.
pub const DEFAULT_LOSS_CORRECTION_FLOOR: f64 = 0.3;

/// Eigenvalue below which a loss-corrected estimate is flagged non-physical.
pub const NON_PHYSICAL_EIGENVALUE: f64 = -1e-3;

/// Half-width of the quadrature grid needed for photon numbers below `dim`.
pub fn grid_extent(dim: usize) -> f64 {
    (((2 * dim + 1) as f64).sqrt() + 4.0).max(6.0)
}

/// `ψ_0(x) … ψ_max(x)` by the three-term recurrence.
pub fn oscillator_wavefunctions(x: f64, max_n: usize) -> Vec<f64> {
    let mut psi = Vec::with_capacity(max_n + 1);
    psi.push(PI.powf(-0.25) * (-0.5 * x * x).exp());
    if max_n >= 1 {
        psi.push(SQRT_2 * x * psi[0]);
    }
    for n in 2..=max_n {
        let nf = n as f64;
        let next = ((2.0 / nf).sqrt()) * x * psi[n - 1] - ((nf - 1.0) / nf).sqrt() * psi[n - 2];
        psi.push(next);
    }
    psi
}

fn require_single(rho: &DensityMatrix) -> Result<()> {
    if rho.layout().mode_count() == 1 {
        Ok(())
    } else {
        Err(Error::LayoutMismatch(format!(
            "homodyne statistics need a single mode, got {}",
            rho.layout().mode_count()
        )))
    }
}

/// One past the highest photon number with any nonzero row or column.
fn support_dim(rho: &DensityMatrix) -> usize {
    let dim = rho.dim();
    (0..dim)
        .rev()
        .find(|&n| (0..dim).any(|k| rho.get(n, k).norm() > 0.0 || rho.get(k, n).norm() > 0.0))
        .map_or(1, |n| n + 1)
}

/// Phase-rotated coefficients `ρ_mn e^{i(n−m)θ}` restricted to the support.
struct RotatedState {
    dim: usize,
    coefficients: Vec<Complex64>,
}

impl RotatedState {
    fn new(rho: &DensityMatrix, theta: f64) -> Self {
        let dim = support_dim(rho);
        let mut coefficients = Vec::with_capacity(dim * dim);
        for m in 0..dim {
            for n in 0..dim {
                coefficients.push(rho.get(m, n) * Complex64::from_polar(1.0, (n as f64 - m as f64) * theta));
            }
        }
        Self { dim, coefficients }
    }

    fn pdf(&self, x: f64) -> f64 {
        let psi = oscillator_wavefunctions(x, self.dim - 1);
        let mut total = 0.0;
        for m in 0..self.dim {
            total += self.coefficients[m * self.dim + m].re * psi[m] * psi[m];
            for n in m + 1..self.dim {
                total += 2.0 * self.coefficients[m * self.dim + n].re * psi[m] * psi[n];
            }
        }
        total
    }
}

pub fn quadrature_pdf(rho: &DensityMatrix, theta: f64, x: f64) -> Result<f64> {
    require_single(rho)?;
    Ok(RotatedState::new(rho, theta).pdf(x))
}

/// `⟨â⟩`, `⟨â²⟩` and `⟨n̂⟩`.
fn ladder_moments(rho: &DensityMatrix) -> (Complex64, Complex64, f64) {
    let dim = rho.dim();
    let mut a = Complex64::new(0.0, 0.0);
    let mut a2 = Complex64::new(0.0, 0.0);
    let mut n = 0.0;
    for k in 0..dim {
        let kf = k as f64;
        n += kf * rho.get(k, k).re;
        if k >= 1 {
            a += rho.get(k, k - 1) * kf.sqrt();
        }
        if k >= 2 {
            a2 += rho.get(k, k - 2) * (kf * (kf - 1.0)).sqrt();
        }
    }
    (a, a2, n)
}

/// `⟨x̂_θ⟩ = √2 Re(⟨â⟩ e^{−iθ})`.
pub fn quadrature_mean(rho: &DensityMatrix, theta: f64) -> Result<f64> {
    require_single(rho)?;
    let (a, _, _) = ladder_moments(rho);
    Ok(SQRT_2 * (a * Complex64::from_polar(1.0, -theta)).re)
}

/// `⟨x̂_θ²⟩ = Re(⟨â²⟩ e^{−2iθ}) + ⟨n̂⟩ + 1/2`.
pub fn quadrature_second_moment(rho: &DensityMatrix, theta: f64) -> Result<f64> {
    require_single(rho)?;
    let (_, a2, n) = ladder_moments(rho);
    Ok((a2 * Complex64::from_polar(1.0, -2.0 * theta)).re + n + 0.5)
}

pub fn quadrature_variance(rho: &DensityMatrix, theta: f64) -> Result<f64> {
    let mean = quadrature_mean(rho, theta)?;
    Ok(quadrature_second_moment(rho, theta)? - mean * mean)
}

/// Probability mass of `x̂_θ` in each of `bins` equal bins over
/// `[-half_width, half_width]`, integrated by composite Simpson's rule.
pub fn quadrature_histogram(rho: &DensityMatrix, theta: f64, bins: usize, half_width: f64) -> Result<Vec<f64>> {
    require_single(rho)?;
    if bins == 0 {
        return Err(Error::Empty("histogram needs at least one bin"));
    }
    let state = RotatedState::new(rho, theta);
    let width = 2.0 * half_width / bins as f64;
    const PANELS: usize = 16;
    let h = width / PANELS as f64;
    Ok((0..bins)
        .map(|b| {
            let lo = -half_width + b as f64 * width;
            let mut sum = state.pdf(lo) + state.pdf(lo + width);
            for k in 1..PANELS {
                let weight = if k % 2 == 1 { 4.0 } else { 2.0 };
                sum += weight * state.pdf(lo + k as f64 * h);
            }
            sum * h / 3.0
        })
        .collect())
}

/// `count` local-oscillator phases evenly spaced over `[0, π)`.
pub fn default_theta_schedule(count: usize) -> Vec<f64> {
    (0..count).map(|k| PI * k as f64 / count as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSample {
    pub theta: f64,
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureDataset {
    pub samples: Vec<QuadratureSample>,
    pub source_seed: u64,
    pub convention: String,
}

impl QuadratureDataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Copy with every phase advanced by `delta`, wrapped into `[0, 2π)`.
    pub fn phase_shifted(&self, delta: f64) -> Self {
        Self {
            samples: self
                .samples
                .iter()
                .map(|s| QuadratureSample {
                    theta: (s.theta + delta).rem_euclid(2.0 * PI),
                    x: s.x,
                })
                .collect(),
            ..self.clone()
        }
    }

    /// Two-column `theta_radians,x` text with a `# seed=… convention=…` line.
    pub fn to_text(&self) -> String {
        let mut out = format!("# seed={} convention={}\ntheta_radians,x\n", self.source_seed, self.convention);
        for s in &self.samples {
            let _ = writeln!(out, "{},{}", s.theta, s.x);
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("missing header line".into()))?;
        let header = header
            .strip_prefix('#')
            .ok_or_else(|| Error::Parse(format!("header must start with '#': {header}")))?;
        let mut seed = None;
        let mut convention = None;
        for field in header.split_whitespace() {
            match field.split_once('=') {
                Some(("seed", v)) => {
                    seed = Some(v.parse::<u64>().map_err(|e| Error::Parse(format!("seed: {e}")))?)
                }
                Some(("convention", v)) => convention = Some(v.to_string()),
                _ => {}
            }
        }
        let convention = convention.ok_or_else(|| Error::Parse("header lacks convention".into()))?;
        if convention != CONVENTION {
            return Err(Error::Parse(format!("unsupported convention {convention}")));
        }
        let mut samples = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line == "theta_radians,x" {
                continue;
            }
            let (t, x) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("line {}: expected two columns", lineno + 2)))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))
            };
            let sample = QuadratureSample {
                theta: parse(t)?,
                x: parse(x)?,
            };
            if !(sample.x.is_finite() && (0.0..2.0 * PI).contains(&sample.theta)) {
                return Err(Error::Parse(format!("line {}: sample out of range", lineno + 2)));
            }
            samples.push(sample);
        }
        Ok(Self {
            samples,
            source_seed: seed.ok_or_else(|| Error::Parse("header lacks seed".into()))?,
            convention,
        })
    }
}

/// Tabulated cumulative distribution of `x̂_θ` for inverse-CDF sampling.
struct QuadratureCdf {
    x0: f64,
    step: f64,
    cdf: Vec<f64>,
}

impl QuadratureCdf {
    fn new(rho: &DensityMatrix, theta: f64, step: f64) -> Self {
        let state = RotatedState::new(rho, theta);
        let extent = grid_extent(state.dim);
        let half = (extent / step).ceil() as usize;
        let x0 = -(half as f64) * step;
        let pdf: Vec<f64> = (0..=2 * half)
            .map(|i| state.pdf(x0 + i as f64 * step).max(0.0))
            .collect();
        let mut cdf = Vec::with_capacity(pdf.len());
        cdf.push(0.0);
        for w in pdf.windows(2) {
            let last = *cdf.last().unwrap();
            cdf.push(last + 0.5 * (w[0] + w[1]) * step);
        }
        let total = *cdf.last().unwrap();
        for c in &mut cdf {
            *c /= total;
        }
        Self { x0, step, cdf }
    }

    fn invert(&self, u: f64) -> f64 {
        let i = self.cdf.partition_point(|&c| c < u).clamp(1, self.cdf.len() - 1);
        let (lo, hi) = (self.cdf[i - 1], self.cdf[i]);
        let frac = if hi > lo { (u - lo) / (hi - lo) } else { 0.5 };
        self.x0 + (i as f64 - 1.0 + frac) * self.step
    }
}

/// Draws `n_per_theta` quadratures at each phase of `thetas`.
pub fn sample_quadratures(rho: &DensityMatrix, thetas: &[f64], n_per_theta: usize, seed: u64) -> Result<QuadratureDataset> {
    if n_per_theta == 0 {
        return Err(Error::Empty("zero samples per phase"));
    }
    let counts: Vec<(f64, usize)> = thetas.iter().map(|&t| (t, n_per_theta)).collect();
    sample_with_counts(rho, &counts, seed)
}

/// Draws `total` quadratures spread as evenly as possible over `thetas`.
pub fn sample_quadratures_total(rho: &DensityMatrix, thetas: &[f64], total: usize, seed: u64) -> Result<QuadratureDataset> {
    if total == 0 {
        return Err(Error::Empty("zero samples requested"));
    }
    if thetas.is_empty() {
        return Err(Error::Empty("empty phase schedule"));
    }
    let k = thetas.len();
    let counts: Vec<(f64, usize)> = thetas
        .iter()
        .enumerate()
        .map(|(i, &t)| (t, total / k + usize::from(i < total % k)))
        .collect();
    sample_with_counts(rho, &counts, seed)
}

fn sample_with_counts(rho: &DensityMatrix, counts: &[(f64, usize)], seed: u64) -> Result<QuadratureDataset> {
    require_single(rho)?;
    if counts.is_empty() {
        return Err(Error::Empty("empty phase schedule"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(counts.iter().map(|c| c.1).sum());
    for &(theta, count) in counts {
        let theta = theta.rem_euclid(2.0 * PI);
        let cdf = QuadratureCdf::new(rho, theta, DEFAULT_GRID_STEP);
        for _ in 0..count {
            let u: f64 = rng.random();
            samples.push(QuadratureSample { theta, x: cdf.invert(u) });
        }
    }
    Ok(QuadratureDataset {
        samples,
        source_seed: seed,
        convention: CONVENTION.to_string(),
    })
}

/// Pattern functions `f_mn(x)` tabulated on a uniform grid.
///
/// `f_mn = d/dx [ψ_n(x) φ_m(x)]` for `m ≥ n`, symmetric in `m, n`, where
/// `φ_m` are the irregular oscillator solutions built from
/// `φ_0 = 2π^{1/4} e^{−x²/2} ∫₀ˣ e^{y²} dy` with the raising operator.
/// Averaging `f_mn(x) e^{i(m−n)θ}` over data with `θ` uniform on `[0, π)`
/// estimates `ρ_mn`.
#[derive(Debug, Clone)]
pub struct PatternFunctions {
    cutoff: usize,
    x0: f64,
    step: f64,
    points: usize,
    /// `values[pair * points + i]`, `pair` enumerating `m ≥ n`
    values: Vec<f64>,
}

fn pair_index(m: usize, n: usize) -> usize {
    let (hi, lo) = if m >= n { (m, n) } else { (n, m) };
    hi * (hi + 1) / 2 + lo
}

/// Dawson's integral `F(x) = e^{−x²} ∫₀ˣ e^{y²} dy` on `x0 + i·step`,
/// integrating `F′ = 1 − 2xF` outward from the grid point at zero.
fn dawson_on_grid(half: usize, step: f64) -> Vec<f64> {
    let mut values = vec![0.0; 2 * half + 1];
    let rhs = |x: f64, f: f64| 1.0 - 2.0 * x * f;
    for direction in [1.0f64, -1.0] {
        let mut f = 0.0;
        let mut x = 0.0;
        let h = direction * step;
        for i in 1..=half {
            let k1 = rhs(x, f);
            let k2 = rhs(x + h / 2.0, f + h * k1 / 2.0);
            let k3 = rhs(x + h / 2.0, f + h * k2 / 2.0);
            let k4 = rhs(x + h, f + h * k3);
            f += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
            x += h;
            let idx = if direction > 0.0 { half + i } else { half - i };
            values[idx] = f;
        }
    }
    values
}

impl PatternFunctions {
    pub fn new(cutoff: usize) -> Self {
        Self::with_grid(cutoff, grid_extent(cutoff + 1), DEFAULT_GRID_STEP)
    }

    pub fn with_grid(cutoff: usize, extent: f64, step: f64) -> Self {
        let half = (extent / step).ceil() as usize;
        let points = 2 * half + 1;
        let x0 = -(half as f64) * step;
        let dawson = dawson_on_grid(half, step);
        let pairs = pair_index(cutoff, cutoff) + 1;
        let mut values = vec![0.0; pairs * points];
        let scale = 2.0 * PI.powf(0.25);
        for i in 0..points {
            let x = x0 + i as f64 * step;
            let psi = oscillator_wavefunctions(x, cutoff + 1);
            let grow = (0.5 * x * x).exp();
            let mut phi = Vec::with_capacity(cutoff + 2);
            phi.push(scale * grow * dawson[i]);
            let phi0_prime = -x * phi[0] + scale * grow;
            phi.push((x * phi[0] - phi0_prime) / SQRT_2);
            for n in 1..=cutoff {
                let nf = n as f64;
                let next = (SQRT_2 * x * phi[n] - nf.sqrt() * phi[n - 1]) / (nf + 1.0).sqrt();
                phi.push(next);
            }
            let psi_prime = |n: usize| {
                let down = if n > 0 { (n as f64).sqrt() * psi[n - 1] } else { 0.0 };
                (down - ((n + 1) as f64).sqrt() * psi[n + 1]) / SQRT_2
            };
            let phi_prime = |n: usize| {
                if n == 0 {
                    phi0_prime
                } else {
                    ((n as f64).sqrt() * phi[n - 1] - ((n + 1) as f64).sqrt() * phi[n + 1]) / SQRT_2
                }
            };
            for m in 0..=cutoff {
                for n in 0..=m {
                    values[pair_index(m, n) * points + i] = psi_prime(n) * phi[m] + psi[n] * phi_prime(m);
                }
            }
        }
        Self {
            cutoff,
            x0,
            step,
            points,
            values,
        }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Linear interpolation of `f_mn(x)`; zero outside the tabulated range.
    pub fn eval(&self, m: usize, n: usize, x: f64) -> f64 {
        let pos = (x - self.x0) / self.step;
        if !(pos >= 0.0) || pos > (self.points - 1) as f64 {
            return 0.0;
        }
        let i = (pos.floor() as usize).min(self.points - 2);
        let frac = pos - i as f64;
        let row = &self.values[pair_index(m, n) * self.points..];
        row[i] * (1.0 - frac) + row[i + 1] * frac
    }

    /// Exact estimator expectation `(1/π) ∫₀^π dθ ∫ dx pr(x|θ) f_mn(x) e^{i(m−n)θ}`
    /// for a known state, by quadrature over the tabulation grid.
    pub fn expected_element(&self, rho: &DensityMatrix, m: usize, n: usize, phases: usize) -> Result<Complex64> {
        require_single(rho)?;
        let mut total = Complex64::new(0.0, 0.0);
        for theta in default_theta_schedule(phases) {
            let state = RotatedState::new(rho, theta);
            let mut inner = 0.0;
            for i in 0..self.points {
                let x = self.x0 + i as f64 * self.step;
                let w = if i == 0 || i == self.points - 1 { 0.5 } else { 1.0 };
                inner += w * state.pdf(x) * self.values[pair_index(m, n) * self.points + i];
            }
            total += Complex64::from_polar(inner * self.step, (m as f64 - n as f64) * theta);
        }
        Ok(total / phases as f64)
    }
}

/// Theta window `π − largest gap` of the phases folded onto `[0, π)`.
fn theta_window(samples: &[QuadratureSample]) -> f64 {
    let mut folded: Vec<f64> = samples.iter().map(|s| s.theta.rem_euclid(PI)).collect();
    folded.sort_by(f64::total_cmp);
    folded.dedup();
    if folded.len() < 2 {
        return 0.0;
    }
    let wrap = folded[0] + PI - folded[folded.len() - 1];
    let largest = folded
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(wrap, f64::max);
    PI - largest
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructedState {
    pub rho_hat: DensityMatrix,
    /// Standard error of each element, row-major like `rho_hat`.
    pub standard_errors: Vec<f64>,
    pub trace_standard_error: f64,
    pub samples: usize,
}

impl ReconstructedState {
    pub fn standard_error(&self, m: usize, n: usize) -> f64 {
        self.standard_errors[m * self.rho_hat.dim() + n]
    }
}

pub fn reconstruct(data: &QuadratureDataset, cutoff: usize) -> Result<ReconstructedState> {
    reconstruct_with(data, &PatternFunctions::new(cutoff))
}

/// Sample means of `f_mn(x) e^{i(m−n)θ}` with their standard errors.
pub fn reconstruct_with(data: &QuadratureDataset, patterns: &PatternFunctions) -> Result<ReconstructedState> {
    if data.is_empty() {
        return Err(Error::Empty("quadrature dataset"));
    }
    let window = theta_window(&data.samples);
    if window < PI / 8.0 {
        return Err(Error::DegenerateThetaCoverage { window });
    }
    let cutoff = patterns.cutoff();
    let local = cutoff + 1;
    if data.len() < 100 * local * local {
        log::warn!(
            "{} samples for a {}-dimensional reconstruction; at least {} recommended",
            data.len(),
            local,
            100 * local * local
        );
    }
    let pairs = pair_index(cutoff, cutoff) + 1;
    let mut sums = vec![Complex64::new(0.0, 0.0); pairs];
    let mut squares = vec![0.0; pairs];
    let (mut trace_sum, mut trace_square) = (0.0, 0.0);
    for s in &data.samples {
        let mut trace = 0.0;
        for m in 0..local {
            for n in 0..=m {
                let f = patterns.eval(m, n, s.x);
                let z = Complex64::from_polar(f, (m as f64 - n as f64) * s.theta);
                let p = pair_index(m, n);
                sums[p] += z;
                squares[p] += f * f;
                if m == n {
                    trace += f;
                }
            }
        }
        trace_sum += trace;
        trace_square += trace * trace;
    }
    let count = data.len() as f64;
    let std_err = |sum_abs2: f64, mean_abs2: f64| {
        if data.len() < 2 {
            f64::INFINITY
        } else {
            ((sum_abs2 / count - mean_abs2).max(0.0) / (count - 1.0)).sqrt()
        }
    };
    let layout = ModeLayout::single(cutoff)?;
    let mut rho = DensityMatrix::zeros(layout);
    let mut standard_errors = vec![0.0; local * local];
    for m in 0..local {
        for n in 0..=m {
            let p = pair_index(m, n);
            let mean = sums[p] / count;
            rho.set(m, n, mean);
            rho.set(n, m, mean.conj());
            let se = std_err(squares[p], mean.norm_sqr());
            standard_errors[m * local + n] = se;
            standard_errors[n * local + m] = se;
        }
    }
    let trace_mean = trace_sum / count;
    Ok(ReconstructedState {
        rho_hat: rho.hermitized(),
        standard_errors,
        trace_standard_error: std_err(trace_square, trace_mean * trace_mean),
        samples: data.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossCorrection {
    pub rho: DensityMatrix,
    pub min_eigenvalue: f64,
    /// False when an eigenvalue fell below [`NON_PHYSICAL_EIGENVALUE`].
    pub physical: bool,
}

pub fn loss_correct(rho_hat: &DensityMatrix, eta: f64) -> Result<LossCorrection> {
    loss_correct_with_floor(rho_hat, eta, DEFAULT_LOSS_CORRECTION_FLOOR)
}

/// Undoes a Bernoulli loss of efficiency `eta` (the same element map at
/// `1/η`). Negative eigenvalues are reported, not clipped.
pub fn loss_correct_with_floor(rho_hat: &DensityMatrix, eta: f64, floor: f64) -> Result<LossCorrection> {
    require_single(rho_hat)?;
    if !(eta >= floor && eta <= 1.0) {
        return Err(Error::ParameterOutOfRange {
            name: "eta",
            value: eta,
            range: "[loss-correction floor, 1]",
        });
    }
    let rho = bernoulli_map(rho_hat, eta.recip(), 0);
    let min_eigenvalue = rho.min_eigenvalue();
    Ok(LossCorrection {
        rho,
        min_eigenvalue,
        physical: min_eigenvalue >= NON_PHYSICAL_EIGENVALUE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state_with_bound, FockState};
    use crate::optics::loss_channel;

    fn layout(cutoff: usize) -> ModeLayout {
        ModeLayout::single(cutoff).unwrap()
    }

    fn vacuum(cutoff: usize) -> DensityMatrix {
        FockState::vacuum(layout(cutoff)).to_density_matrix()
    }

    fn number(n: usize, cutoff: usize) -> DensityMatrix {
        FockState::basis(layout(cutoff), &[n]).unwrap().to_density_matrix()
    }

    fn integrate(f: impl Fn(f64) -> f64) -> f64 {
        let h = 1e-3;
        (-12000..=12000).map(|i| f(i as f64 * h)).sum::<f64>() * h
    }

    #[test]
    fn wavefunctions_are_orthonormal() {
        for m in 0..6 {
            for n in 0..6 {
                let overlap = integrate(|x| {
                    let psi = oscillator_wavefunctions(x, 6);
                    psi[m] * psi[n]
                });
                let expected = if m == n { 1.0 } else { 0.0 };
                assert!((overlap - expected).abs() < 1e-10, "{m},{n}: {overlap}");
            }
        }
    }

    #[test]
    fn vacuum_distribution_is_gaussian() {
        let rho = vacuum(4);
        for theta in [0.0, 1.0, 2.5] {
            for x in [-1.3f64, 0.0, 0.7] {
                let expected = (-x * x).exp() / PI.sqrt();
                assert!((quadrature_pdf(&rho, theta, x).unwrap() - expected).abs() < 1e-14);
            }
        }
        assert!((quadrature_variance(&rho, 0.3).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn single_photon_distribution() {
        let rho = number(1, 3);
        assert_eq!(quadrature_pdf(&rho, 0.0, 0.0).unwrap(), 0.0);
        let x: f64 = 0.8;
        let expected = 2.0 * x * x * (-x * x).exp() / PI.sqrt();
        assert!((quadrature_pdf(&rho, 1.1, x).unwrap() - expected).abs() < 1e-14);
        assert!((quadrature_second_moment(&rho, 0.0).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn coherent_distribution_is_displaced_vacuum() {
        let alpha = 0.9;
        let rho = coherent_state_with_bound(Complex64::new(alpha, 0.0), layout(30), 1e-12)
            .unwrap()
            .state
            .to_density_matrix();
        for theta in [0.0f64, 0.6, 2.0] {
            let mean = SQRT_2 * alpha * theta.cos();
            for x in [-1.0, 0.2, 1.4] {
                let expected = (-(x - mean) * (x - mean)).exp() / PI.sqrt();
                let got = quadrature_pdf(&rho, theta, x).unwrap();
                assert!((got - expected).abs() < 1e-12, "{theta} {x}: {got} vs {expected}");
            }
            assert!((quadrature_mean(&rho, theta).unwrap() - mean).abs() < 1e-12);
            assert!((quadrature_variance(&rho, theta).unwrap() - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn pdf_normalization_and_moments_by_quadrature() {
        let psi = FockState::new(
            layout(3),
            vec![
                Complex64::new(0.5, 0.0),
                Complex64::new(0.3, 0.4),
                Complex64::new(0.0, -0.5),
                Complex64::new(0.2, 0.1),
            ],
        )
        .unwrap()
        .normalized()
        .unwrap();
        let rho = psi.to_density_matrix();
        for theta in [0.0, 0.9, 2.2] {
            let mass = integrate(|x| quadrature_pdf(&rho, theta, x).unwrap());
            let first = integrate(|x| x * quadrature_pdf(&rho, theta, x).unwrap());
            let second = integrate(|x| x * x * quadrature_pdf(&rho, theta, x).unwrap());
            assert!((mass - 1.0).abs() < 1e-6);
            assert!((first - quadrature_mean(&rho, theta).unwrap()).abs() < 1e-8);
            assert!((second - quadrature_second_moment(&rho, theta).unwrap()).abs() < 1e-8);
        }
        assert!(quadrature_pdf(&DensityMatrix::zeros(ModeLayout::new(2, 1).unwrap()), 0.0, 0.0).is_err());
    }

    #[test]
    fn histogram_sums_to_one() {
        let hist = quadrature_histogram(&number(1, 2), 0.0, 40, 5.0).unwrap();
        assert!((hist.iter().sum::<f64>() - 1.0).abs() < 1e-8);
        assert!(hist[19] < hist[14]);
    }

    #[test]
    fn vacuum_sampling_variance() {
        let data = sample_quadratures(&vacuum(3), &default_theta_schedule(10), 10_000, 7).unwrap();
        let n = data.len() as f64;
        let mean = data.samples.iter().map(|s| s.x).sum::<f64>() / n;
        let var = data.samples.iter().map(|s| (s.x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((var - 0.5).abs() < 0.01, "{var}");
    }

    #[test]
    fn single_photon_sampling_variance() {
        let data = sample_quadratures(&number(1, 3), &default_theta_schedule(10), 10_000, 11).unwrap();
        let n = data.len() as f64;
        let mean = data.samples.iter().map(|s| s.x).sum::<f64>() / n;
        let var = data.samples.iter().map(|s| (s.x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((var - 1.5).abs() < 0.02, "{var}");
        let abs_mean = data.samples.iter().map(|s| s.x.abs()).sum::<f64>() / n;
        // E|x| is 1/√π for vacuum and 2/√π for one photon
        assert!((abs_mean - 2.0 / PI.sqrt()).abs() < 0.01);
    }

    #[test]
    fn sampling_is_deterministic() {
        let rho = number(1, 2);
        let a = sample_quadratures(&rho, &default_theta_schedule(4), 100, 3).unwrap();
        let b = sample_quadratures(&rho, &default_theta_schedule(4), 100, 3).unwrap();
        assert_eq!(a, b);
        let c = sample_quadratures(&rho, &default_theta_schedule(4), 100, 4).unwrap();
        assert_ne!(a, c);
        assert!(sample_quadratures(&rho, &[0.0], 0, 3).is_err());
        assert_eq!(sample_quadratures_total(&rho, &default_theta_schedule(12), 20_000, 1).unwrap().len(), 20_000);
    }

    #[test]
    fn dataset_text_round_trip() {
        let data = sample_quadratures(&number(1, 2), &default_theta_schedule(3), 5, 9).unwrap();
        let text = data.to_text();
        assert!(text.starts_with("# seed=9 convention=vacuum-variance-1/2\n"));
        assert_eq!(QuadratureDataset::parse(&text).unwrap(), data);
        assert!(QuadratureDataset::parse("theta,x\n").is_err());
        assert!(QuadratureDataset::parse("# seed=1 convention=vacuum-variance-1/2\n0.1;0.2\n").is_err());
    }

    /// Integrating the estimator against the exact distribution must return
    /// the matrix element it targets.
    #[test]
    fn pattern_functions_recover_known_state() {
        let cutoff = 4;
        let psi = FockState::new(
            layout(cutoff),
            vec![
                Complex64::new(0.4, 0.0),
                Complex64::new(0.3, -0.3),
                Complex64::new(0.1, 0.5),
                Complex64::new(-0.2, 0.2),
                Complex64::new(0.3, 0.1),
            ],
        )
        .unwrap()
        .normalized()
        .unwrap();
        let mut rho = psi.to_density_matrix().scaled(0.8);
        rho.add_scaled(&number(2, cutoff), 0.2).unwrap();
        let patterns = PatternFunctions::new(cutoff);
        for m in 0..=cutoff {
            for n in 0..=cutoff {
                let estimate = patterns.expected_element(&rho, m, n, 24).unwrap();
                let err = (estimate - rho.get(m, n)).norm();
                assert!(err < 1e-6, "({m},{n}): {estimate} vs {}", rho.get(m, n));
            }
        }
    }

    #[test]
    fn vacuum_round_trip() {
        let data = sample_quadratures(&vacuum(2), &default_theta_schedule(12), 2_000, 5).unwrap();
        let rec = reconstruct(&data, 2).unwrap();
        for m in 0..3 {
            for n in 0..3 {
                let truth = if m == 0 && n == 0 { 1.0 } else { 0.0 };
                let dev = (rec.rho_hat.get(m, n) - truth).norm();
                assert!(dev <= 3.0 * rec.standard_error(m, n) + 1e-12, "({m},{n}) {dev}");
            }
        }
        assert!((rec.rho_hat.trace().re - 1.0).abs() <= 3.0 * rec.trace_standard_error);
    }

    #[test]
    fn phase_insensitive_mixture_has_no_coherence() {
        let rho = DensityMatrix::from_diagonal(layout(2), &[0.5, 0.5]).unwrap();
        let data = sample_quadratures(&rho, &default_theta_schedule(12), 2_000, 21).unwrap();
        let rec = reconstruct(&data, 2).unwrap();
        assert!(rec.rho_hat.get(0, 1).norm() <= 3.0 * rec.standard_error(0, 1));
    }

    #[test]
    fn reconstruction_rejects_bad_data() {
        let empty = QuadratureDataset {
            samples: vec![],
            source_seed: 0,
            convention: CONVENTION.into(),
        };
        assert!(matches!(reconstruct(&empty, 2), Err(Error::Empty(_))));
        let narrow = sample_quadratures(&vacuum(2), &[0.0, 0.1, 0.2], 100, 1).unwrap();
        assert!(matches!(
            reconstruct(&narrow, 2),
            Err(Error::DegenerateThetaCoverage { .. })
        ));
    }

    #[test]
    fn shifted_phases_rotate_the_estimate() {
        let psi = FockState::new(layout(2), vec![Complex64::new(0.8, 0.0), Complex64::new(0.0, 0.6), Complex64::new(0.0, 0.0)]).unwrap();
        let data = sample_quadratures(&psi.to_density_matrix(), &default_theta_schedule(12), 500, 2).unwrap();
        let delta = 0.7;
        let base = reconstruct(&data, 2).unwrap().rho_hat;
        let shifted = reconstruct(&data.phase_shifted(delta), 2).unwrap().rho_hat;
        for m in 0..3 {
            for n in 0..3 {
                let rotated = base.get(m, n) * Complex64::from_polar(1.0, (m as f64 - n as f64) * delta);
                assert!((shifted.get(m, n) - rotated).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn loss_correction_inverts_loss() {
        let eta = 0.54;
        let rho = DensityMatrix::from_diagonal(layout(4), &[0.3, 0.25, 0.2, 0.15, 0.1]).unwrap();
        let lossy = loss_channel(&rho, eta, 0).unwrap();
        let fixed = loss_correct(&lossy, eta).unwrap();
        assert!(fixed.rho.max_abs_diff(&rho).unwrap() < 1e-8);
        assert!(fixed.physical);
        assert_eq!(loss_correct(&rho, 1.0).unwrap().rho, rho);
        assert!(loss_correct(&rho, 0.2).is_err());
    }

    #[test]
    fn loss_correction_flags_unphysical_input() {
        // Too little vacuum for the assumed loss: inversion goes negative.
        let rho = DensityMatrix::from_diagonal(layout(2), &[0.2, 0.8]).unwrap();
        let fixed = loss_correct(&rho, 0.5).unwrap();
        assert!(!fixed.physical);
        assert!(fixed.min_eigenvalue < NON_PHYSICAL_EIGENVALUE);
    }
}
