//! Microcanonical and canonical phase-space ensembles.
//!
//! Every estimator here averages over states drawn from the Fubini–Study
//! measure, so its result is a deterministic function of the inputs and of
//! `(seed, chunks)`. Phase-space volumes use the convention
//! `V_n = (4 pi)^n / n!` for `CP^n`, which makes `CP^1` the unit sphere.
//! Only absolute partition functions and state densities depend on it.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::Spectrum;
use crate::linalg::{CMatrix, C64};
use crate::sampling::FsSampler;

mod bath;
mod canonical;
mod kernel;
mod microcanonical;
mod simplex;
mod thermo;

pub use bath::{bath_composition, convolve_state_densities, log_derivative, BathComposition};
pub use canonical::{
    canonical_density_matrix, canonical_partition, conventional_gibbs_dm, CanonicalEstimate,
    ESS_FLOOR,
};
pub use kernel::{canonical_energy_pdf, canonical_energy_pdf_on, epanechnikov, state_density};
pub use microcanonical::{
    microcanonical_dm, microcanonical_dm_via_volume, volume_below, MicrocanonicalEstimate,
    VolumeDerivative, SHELL_FLOOR,
};
pub use simplex::{
    simplex_exp_moment, simplex_state_density, simplex_volume_below, simplex_weighted_occupations,
};
pub use thermo::{thermodynamics, ThermoRow, ThermoSource};

/// Fubini–Study volume of `CP^n` for a `dim = n + 1` level system.
pub fn phase_space_volume(dim: usize) -> f64 {
    let n = dim.saturating_sub(1);
    (1..=n).fold(1.0, |acc, k| acc * 4.0 * PI / k as f64)
}

/// Monte Carlo controls shared by every estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McParams {
    pub samples: usize,
    pub seed: u64,
    pub chunks: usize,
    /// Width of the energy shell standing in for `delta(H - E)`; `None` means
    /// `0.01 * (E_max - E_min)`.
    pub shell_width: Option<f64>,
    /// Epanechnikov half-width for energy densities; `None` means
    /// `0.02 * (E_max - E_min)`.
    pub bandwidth: Option<f64>,
}

pub const MIN_SAMPLES: usize = 1_000;

impl McParams {
    pub fn new(samples: usize, seed: u64) -> Self {
        McParams {
            samples,
            seed,
            chunks: 8,
            shell_width: None,
            bandwidth: None,
        }
    }

    pub fn with_chunks(mut self, chunks: usize) -> Self {
        self.chunks = chunks;
        self
    }

    pub fn with_shell_width(mut self, width: f64) -> Self {
        self.shell_width = Some(width);
        self
    }

    pub fn with_bandwidth(mut self, bandwidth: f64) -> Self {
        self.bandwidth = Some(bandwidth);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < MIN_SAMPLES {
            return Err(Error::param("samples", "need at least 1000 samples"));
        }
        if self.chunks == 0 {
            return Err(Error::param("chunks", "must be at least 1"));
        }
        if let Some(w) = self.shell_width {
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::param("shell_width", "must be positive"));
            }
        }
        if let Some(b) = self.bandwidth {
            if !(b > 0.0) || !b.is_finite() {
                return Err(Error::param("bandwidth", "must be positive"));
            }
        }
        Ok(())
    }

    pub fn resolved_shell_width(&self, spectrum: &Spectrum) -> f64 {
        self.shell_width
            .unwrap_or_else(|| default_width(spectrum, 0.01))
    }

    pub fn resolved_bandwidth(&self, spectrum: &Spectrum) -> f64 {
        self.bandwidth
            .unwrap_or_else(|| default_width(spectrum, 0.02))
    }

    pub(crate) fn sampler(&self, dim: usize) -> Result<FsSampler> {
        self.validate()?;
        FsSampler::new(dim, self.samples, self.seed, self.chunks)
    }
}

fn default_width(spectrum: &Spectrum, frac: f64) -> f64 {
    let r = spectrum.range();
    if r > 0.0 {
        frac * r
    } else {
        frac * spectrum.max().abs().max(1.0)
    }
}

/// A Monte Carlo value with its standard error and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleEstimate<T> {
    pub value: T,
    pub std_error: T,
    pub samples_used: usize,
    pub seed: u64,
    pub chunks: usize,
}

impl EnsembleEstimate<f64> {
    /// `(value - reference) / std_error`; infinite when the error bar is zero
    /// and the values differ.
    pub fn z_score(&self, reference: f64) -> f64 {
        let d = self.value - reference;
        if self.std_error > 0.0 {
            d / self.std_error
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

pub(crate) fn estimate<T>(
    used: usize,
    mc: &McParams,
    value: T,
    std_error: T,
) -> EnsembleEstimate<T> {
    EnsembleEstimate {
        value,
        std_error,
        samples_used: used,
        seed: mc.seed,
        chunks: mc.chunks,
    }
}

/// Tabulated energy density (probability per unit energy, or an unnormalized
/// state density) on an increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyDensity {
    grid: Vec<f64>,
    density: Vec<f64>,
    std_error: Option<Vec<f64>>,
}

impl EnergyDensity {
    pub fn new(grid: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        if grid.len() != density.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: density.len(),
            });
        }
        if grid.len() < 2 {
            return Err(Error::param("grid", "need at least two points"));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("grid", "must be strictly increasing"));
        }
        if density.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
            return Err(Error::param("density", "must be finite and nonnegative"));
        }
        Ok(EnergyDensity {
            grid,
            density,
            std_error: None,
        })
    }

    /// Samples `f` on `points` evenly spaced nodes of `[lo, hi]`.
    pub fn tabulate(lo: f64, hi: f64, points: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let grid = uniform_grid(lo, hi, points)?;
        let density = grid.iter().map(|&e| f(e)).collect();
        Self::new(grid, density)
    }

    pub fn with_std_error(mut self, se: Vec<f64>) -> Result<Self> {
        if se.len() != self.grid.len() {
            return Err(Error::DimensionMismatch {
                expected: self.grid.len(),
                found: se.len(),
            });
        }
        self.std_error = Some(se);
        Ok(self)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn std_error(&self) -> Option<&[f64]> {
        self.std_error.as_deref()
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Trapezoidal integral of the density.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.grid, &self.density)
    }

    /// Trapezoidal integral of `E * density`.
    pub fn mean(&self) -> f64 {
        let w: Vec<f64> = self
            .grid
            .iter()
            .zip(&self.density)
            .map(|(e, d)| e * d)
            .collect();
        trapezoid(&self.grid, &w) / self.integral()
    }

    /// Rescales to unit trapezoidal integral (error bars scale along).
    pub fn normalized(mut self) -> Result<Self> {
        let total = self.integral();
        if !(total > 0.0) {
            return Err(Error::param("density", "has zero mass"));
        }
        self.density.iter_mut().for_each(|d| *d /= total);
        if let Some(se) = self.std_error.as_mut() {
            se.iter_mut().for_each(|s| *s /= total);
        }
        Ok(self)
    }

    /// Linear interpolation, zero outside the grid.
    pub fn at(&self, e: f64) -> f64 {
        let g = &self.grid;
        if e < g[0] || e > g[g.len() - 1] {
            return 0.0;
        }
        let i = g.partition_point(|&x| x <= e);
        if i == 0 {
            return self.density[0];
        }
        if i >= g.len() {
            return self.density[g.len() - 1];
        }
        let (x0, x1) = (g[i - 1], g[i]);
        let t = (e - x0) / (x1 - x0);
        self.density[i - 1] * (1.0 - t) + self.density[i] * t
    }

    /// Grid spacing if uniform to a relative `1e-9`, else `None`.
    pub fn uniform_spacing(&self) -> Option<f64> {
        let g = &self.grid;
        let h = (g[g.len() - 1] - g[0]) / (g.len() - 1) as f64;
        g.windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1e-300))
            .then_some(h)
    }
}

pub(crate) fn uniform_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(hi > lo) {
        return Err(Error::param("grid", "need hi > lo and at least two points"));
    }
    let h = (hi - lo) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| {
            if i + 1 == points {
                hi
            } else {
                lo + h * i as f64
            }
        })
        .collect())
}

pub(crate) fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// Weighted sums for self-normalized (ratio) estimators of feature means.
#[derive(Debug, Clone)]
pub(crate) struct WeightedMoments {
    pub count: usize,
    pub hits: usize,
    pub sum_w: f64,
    pub sum_w2: f64,
    pub sum_wf: Vec<f64>,
    pub sum_w2f: Vec<f64>,
    pub sum_w2f2: Vec<f64>,
}

impl WeightedMoments {
    pub fn new(features: usize) -> Self {
        WeightedMoments {
            count: 0,
            hits: 0,
            sum_w: 0.0,
            sum_w2: 0.0,
            sum_wf: vec![0.0; features],
            sum_w2f: vec![0.0; features],
            sum_w2f2: vec![0.0; features],
        }
    }

    #[inline]
    pub fn push(&mut self, w: f64, f: &[f64]) {
        self.count += 1;
        if w == 0.0 {
            return;
        }
        self.hits += 1;
        let w2 = w * w;
        self.sum_w += w;
        self.sum_w2 += w2;
        for (k, &fk) in f.iter().enumerate() {
            self.sum_wf[k] += w * fk;
            self.sum_w2f[k] += w2 * fk;
            self.sum_w2f2[k] += w2 * fk * fk;
        }
    }

    pub fn merge(&mut self, other: &WeightedMoments) {
        self.count += other.count;
        self.hits += other.hits;
        self.sum_w += other.sum_w;
        self.sum_w2 += other.sum_w2;
        for k in 0..self.sum_wf.len() {
            self.sum_wf[k] += other.sum_wf[k];
            self.sum_w2f[k] += other.sum_w2f[k];
            self.sum_w2f2[k] += other.sum_w2f2[k];
        }
    }

    pub fn reduce(parts: Vec<WeightedMoments>) -> WeightedMoments {
        let mut it = parts.into_iter();
        let mut acc = it.next().expect("at least one chunk");
        for p in it {
            acc.merge(&p);
        }
        acc
    }

    /// `(sum w)^2 / sum w^2`
    pub fn ess(&self) -> f64 {
        if self.sum_w2 > 0.0 {
            self.sum_w * self.sum_w / self.sum_w2
        } else {
            0.0
        }
    }

    /// Ratio-estimator means and delta-method standard errors.
    pub fn ratio_means(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.sum_wf.len();
        let mut mean = vec![0.0; n];
        let mut se = vec![0.0; n];
        if self.sum_w <= 0.0 {
            return (mean, se);
        }
        for k in 0..n {
            let m = self.sum_wf[k] / self.sum_w;
            let resid = self.sum_w2f2[k] - 2.0 * m * self.sum_w2f[k] + m * m * self.sum_w2;
            mean[k] = m;
            se[k] = resid.max(0.0).sqrt() / self.sum_w;
        }
        (mean, se)
    }
}

/// Features recorded per sample: `Re Pi_ij`, `Im Pi_ij` (row-major), the
/// eigen-occupations, and the energy `H(x)`.
pub(crate) struct FeatureLayout {
    pub dim: usize,
}

impl FeatureLayout {
    pub fn len(&self) -> usize {
        2 * self.dim * self.dim + self.dim + 1
    }

    pub fn occ_offset(&self) -> usize {
        2 * self.dim * self.dim
    }

    pub fn energy_index(&self) -> usize {
        self.len() - 1
    }

    /// Fills `out` and returns the energy.
    #[inline]
    pub fn fill(&self, spectrum: &Spectrum, x: &[C64], out: &mut [f64]) -> f64 {
        let d = self.dim;
        for i in 0..d {
            for j in 0..d {
                let p = x[i] * x[j].conj();
                out[i * d + j] = p.re;
                out[d * d + i * d + j] = p.im;
            }
        }
        let off = self.occ_offset();
        spectrum.occupations_into(x, &mut out[off..off + d]);
        let e: f64 = spectrum
            .eigenvalues()
            .iter()
            .zip(&out[off..off + d])
            .map(|(ek, pk)| ek * pk)
            .sum();
        out[off + d] = e;
        e
    }

    pub fn matrix(&self, values: &[f64]) -> CMatrix {
        let d = self.dim;
        let entries = (0..d * d)
            .map(|k| C64::new(values[k], values[d * d + k]))
            .collect();
        CMatrix::from_row_major(d, entries).expect("square layout")
    }

    pub fn occupations(&self, values: &[f64]) -> Vec<f64> {
        let off = self.occ_offset();
        values[off..off + self.dim].to_vec()
    }
}

/// Energy `sum_k E_k |<y_k|x>|^2` of a unit vector.
#[inline]
pub(crate) fn energy_of(spectrum: &Spectrum, x: &[C64], occ: &mut [f64]) -> f64 {
    spectrum.occupations_into(x, occ);
    spectrum
        .eigenvalues()
        .iter()
        .zip(occ.iter())
        .map(|(e, p)| e * p)
        .sum()
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if !beta.is_finite() {
        return Err(Error::param("beta", "must be finite"));
    }
    Ok(())
}
