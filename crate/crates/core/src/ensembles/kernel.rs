//! Kernel estimates of energy densities.
//!
//! Samples are reflected at both ends of the spectral range before
//! smoothing, so densities keep their full mass near `E_min` and `E_max`
//! instead of losing half a kernel there.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{
    check_beta, energy_of, phase_space_volume, uniform_grid, EnergyDensity, EnsembleEstimate,
    McParams, ESS_FLOOR,
};
use crate::error::{Error, Result};
use crate::geometry::HermitianObservable;

const DEFAULT_POINTS: usize = 201;

/// Epanechnikov kernel with half-width `bandwidth`, unit integral.
#[inline]
pub fn epanechnikov(u: f64, bandwidth: f64) -> f64 {
    let t = u / bandwidth;
    if t.abs() < 1.0 {
        0.75 * (1.0 - t * t) / bandwidth
    } else {
        0.0
    }
}

#[inline]
fn reflected(at: f64, e: f64, lo: f64, hi: f64, b: f64) -> f64 {
    epanechnikov(at - e, b)
        + epanechnikov(at - (2.0 * lo - e), b)
        + epanechnikov(at - (2.0 * hi - e), b)
}

/// `Omega(E) = int delta(H(x) - E) dV` with the delta replaced by an
/// Epanechnikov kernel. Zero, with zero error, outside the spectral range.
pub fn state_density(
    h: &HermitianObservable,
    energy: f64,
    mc: &McParams,
) -> Result<EnsembleEstimate<f64>> {
    Ok(state_density_multi(h, &[energy], mc)?.remove(0))
}

/// State densities at several energies from one sample stream.
pub(crate) fn state_density_multi(
    h: &HermitianObservable,
    energies: &[f64],
    mc: &McParams,
) -> Result<Vec<EnsembleEstimate<f64>>> {
    let sampler = mc.sampler(h.dim())?;
    if energies.iter().any(|e| e.is_nan()) {
        return Err(Error::param("energy", "must not be NaN"));
    }
    let spec = h.spectrum();
    let (lo, hi) = (spec.min(), spec.max());
    let b = mc.resolved_bandwidth(spec);
    let m = energies.len();
    let parts = sampler.fold_chunks(
        || (vec![0.0f64; 2 * m], vec![0.0; h.dim()]),
        |(s, occ), x| {
            let e = energy_of(spec, x, occ);
            for (j, &at) in energies.iter().enumerate() {
                let k = reflected(at, e, lo, hi, b);
                s[2 * j] += k;
                s[2 * j + 1] += k * k;
            }
        },
    );
    let n = mc.samples as f64;
    let v = phase_space_volume(h.dim());
    Ok(energies
        .iter()
        .enumerate()
        .map(|(j, &at)| {
            let (s, s2) = parts
                .iter()
                .fold((0.0, 0.0), |a, p| (a.0 + p.0[2 * j], a.1 + p.0[2 * j + 1]));
            let inside = at >= lo && at <= hi;
            let mean = if inside { s / n } else { 0.0 };
            let var = if inside {
                ((s2 / n - mean * mean) * n / (n - 1.0)).max(0.0)
            } else {
                0.0
            };
            EnsembleEstimate {
                value: v * mean,
                std_error: v * (var / n).sqrt(),
                samples_used: mc.samples,
                seed: mc.seed,
                chunks: mc.chunks,
            }
        })
        .collect())
}

/// Canonical energy density `p(E) = Omega(E) e^{-beta E} / Z` on 201 evenly
/// spaced points of the spectral range, normalized to unit trapezoidal
/// integral, with pointwise standard errors.
pub fn canonical_energy_pdf(
    h: &HermitianObservable,
    beta: f64,
    mc: &McParams,
) -> Result<EnergyDensity> {
    let spec = h.spectrum();
    if !(spec.range() > 0.0) {
        return Err(Error::param(
            "hamiltonian",
            "energy density needs a nonzero spectral range",
        ));
    }
    let grid = uniform_grid(spec.min(), spec.max(), DEFAULT_POINTS)?;
    canonical_energy_pdf_on(h, beta, mc, &grid)?.normalized()
}

/// Weighted kernel estimate of `p(E)` at the given energies (unnormalized
/// beyond the kernel's own unit mass).
pub fn canonical_energy_pdf_on(
    h: &HermitianObservable,
    beta: f64,
    mc: &McParams,
    grid: &[f64],
) -> Result<EnergyDensity> {
    check_beta(beta)?;
    let sampler = mc.sampler(h.dim())?;
    let spec = h.spectrum();
    let (lo, hi) = (spec.min(), spec.max());
    let b = mc.resolved_bandwidth(spec);
    if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.len() < 2 {
        return Err(Error::param(
            "grid",
            "must be strictly increasing with two or more points",
        ));
    }
    let shift = if beta >= 0.0 { lo } else { hi };
    let g = grid.len();

    struct Acc {
        sum_w: f64,
        sum_w2: f64,
        wf: Vec<f64>,
        w2f: Vec<f64>,
        w2f2: Vec<f64>,
        occ: Vec<f64>,
    }
    let parts = sampler.fold_chunks(
        || Acc {
            sum_w: 0.0,
            sum_w2: 0.0,
            wf: vec![0.0; g],
            w2f: vec![0.0; g],
            w2f2: vec![0.0; g],
            occ: vec![0.0; h.dim()],
        },
        |acc, x| {
            let e = energy_of(spec, x, &mut acc.occ);
            let w = (-beta * (e - shift)).exp();
            let w2 = w * w;
            acc.sum_w += w;
            acc.sum_w2 += w2;
            // Image centres are ordered, so their grid windows are too.
            let mut next = 0;
            for centre in [2.0 * lo - e, e, 2.0 * hi - e] {
                let a = grid.partition_point(|&t| t <= centre - b).max(next);
                let z = grid.partition_point(|&t| t < centre + b);
                for i in a..z {
                    let k = reflected(grid[i], e, lo, hi, b);
                    acc.wf[i] += w * k;
                    acc.w2f[i] += w2 * k;
                    acc.w2f2[i] += w2 * k * k;
                }
                next = next.max(z);
            }
        },
    );
    let mut tot = Acc {
        sum_w: 0.0,
        sum_w2: 0.0,
        wf: vec![0.0; g],
        w2f: vec![0.0; g],
        w2f2: vec![0.0; g],
        occ: Vec::new(),
    };
    for p in &parts {
        tot.sum_w += p.sum_w;
        tot.sum_w2 += p.sum_w2;
        for i in 0..g {
            tot.wf[i] += p.wf[i];
            tot.w2f[i] += p.w2f[i];
            tot.w2f2[i] += p.w2f2[i];
        }
    }
    let ess = tot.sum_w * tot.sum_w / tot.sum_w2;
    if !(ess >= ESS_FLOOR) {
        return Err(Error::EffectiveSampleSize {
            ess,
            floor: ESS_FLOOR,
        });
    }
    let mut density = vec![0.0; g];
    let mut se = vec![0.0; g];
    for i in 0..g {
        let m = tot.wf[i] / tot.sum_w;
        let resid = tot.w2f2[i] - 2.0 * m * tot.w2f[i] + m * m * tot.sum_w2;
        density[i] = m.max(0.0);
        se[i] = resid.max(0.0).sqrt() / tot.sum_w;
    }
    EnergyDensity::new(grid.to_vec(), density)?.with_std_error(se)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn kernel_has_unit_mass() {
        let b = 0.3;
        let m = 10_000;
        let total: f64 = (0..m)
            .map(|i| epanechnikov(-b + (i as f64 + 0.5) * 2.0 * b / m as f64, b))
            .sum::<f64>()
            * 2.0
            * b
            / m as f64;
        assert!((total - 1.0).abs() < 1e-7);
        assert_eq!(epanechnikov(0.3, 0.3), 0.0);
    }

    #[test]
    fn spin_state_density_is_flat() {
        let h = HermitianObservable::from_levels(&[-1.0, 1.0]).unwrap();
        let mc = McParams::new(200_000, 8);
        for e in [-1.0, -0.6, 0.0, 0.35, 1.0] {
            let est = state_density(&h, e, &mc).unwrap();
            assert!(est.z_score(2.0 * PI).abs() < 3.0, "E={e}: {est:?}");
        }
        let out = state_density(&h, 2.0, &mc).unwrap();
        assert_eq!((out.value, out.std_error), (0.0, 0.0));
    }

    #[test]
    fn state_density_symmetry() {
        let h = HermitianObservable::from_levels(&[0.0, 1.0, 2.0]).unwrap();
        let mc = McParams::new(400_000, 2);
        let a = state_density(&h, 0.7, &mc).unwrap();
        let b = state_density(&h, 1.3, &mc).unwrap();
        let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
        assert!((a.value - b.value).abs() < 3.0 * se);
    }

    #[test]
    fn canonical_pdf_matches_closed_form() {
        let h = HermitianObservable::from_levels(&[-1.0, 1.0]).unwrap();
        let mc = McParams::new(400_000, 4);
        let pdf = canonical_energy_pdf(&h, 1.0, &mc).unwrap();
        assert!((pdf.integral() - 1.0).abs() < 1e-12);
        let want = 1.0 / (2.0 * 1.0f64.sinh());
        let i = 100;
        assert!(pdf.grid()[i].abs() < 1e-12);
        let z = (pdf.density()[i] - want) / pdf.std_error().unwrap()[i];
        assert!(z.abs() < 3.0, "z = {z}");

        let flat = canonical_energy_pdf(&h, 0.0, &mc).unwrap();
        let d = flat.density();
        let s = flat.std_error().unwrap();
        assert!((0..d.len()).all(|i| (d[i] - 0.5).abs() < 3.0 * s[i] + 1e-3));
    }
}
