use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{
    energy_of, estimate, phase_space_volume, EnsembleEstimate, FeatureLayout, McParams,
    WeightedMoments,
};
use crate::error::{Error, Result};
use crate::geometry::{DensityMatrix, HermitianObservable};
use crate::linalg::{CMatrix, C64};

/// Shell estimates resting on fewer samples than this are refused.
pub const SHELL_FLOOR: usize = 100;

/// Microcanonical density matrix from a hard energy shell.
#[derive(Debug, Clone)]
pub struct MicrocanonicalEstimate {
    pub density: DensityMatrix,
    /// Shell average of `Pi(x)` before projection.
    pub raw: EnsembleEstimate<CMatrix>,
    pub populations: EnsembleEstimate<Vec<f64>>,
    /// Mean energy of the shell samples.
    pub energy: EnsembleEstimate<f64>,
    pub shell_width: f64,
    pub hits: usize,
}

/// Density matrix from derivatives of the volume function `W(E)`.
#[derive(Debug, Clone)]
pub struct VolumeDerivative {
    pub density: DensityMatrix,
    /// `(dW/d shift)^{-1} dW/dH` before projection.
    pub raw: CMatrix,
    /// Derivative of `W(E)` under `H -> H + s I` at `s = 0`; equals `-Omega(E)`.
    pub dw_dshift: EnsembleEstimate<f64>,
    pub h_step: f64,
    /// Samples whose indicator changed under at least one perturbation.
    pub hits: usize,
}

/// `W(E)`: phase-space volume of `{x : H(x) <= E}`, estimated as `V_n` times
/// the fraction of samples below `E`. Exact outside the spectral range.
pub fn volume_below(
    h: &HermitianObservable,
    energy: f64,
    mc: &McParams,
) -> Result<EnsembleEstimate<f64>> {
    let sampler = mc.sampler(h.dim())?;
    if energy.is_nan() {
        return Err(Error::param("energy", "must not be NaN"));
    }
    let spec = h.spectrum();
    let v = phase_space_volume(h.dim());
    let exact = |value| EnsembleEstimate {
        value,
        std_error: 0.0,
        samples_used: mc.samples,
        seed: mc.seed,
        chunks: mc.chunks,
    };
    if energy < spec.min() {
        return Ok(exact(0.0));
    }
    if energy >= spec.max() {
        return Ok(exact(v));
    }
    let counts = sampler.fold_chunks(
        || (0usize, vec![0.0; h.dim()]),
        |(below, occ), x| {
            if energy_of(spec, x, occ) <= energy {
                *below += 1;
            }
        },
    );
    let below: usize = counts.iter().map(|c| c.0).sum();
    let n = mc.samples as f64;
    let p = below as f64 / n;
    Ok(EnsembleEstimate {
        value: v * p,
        std_error: v * (p * (1.0 - p) / n).sqrt(),
        samples_used: mc.samples,
        seed: mc.seed,
        chunks: mc.chunks,
    })
}

/// Average of `Pi(x)` over samples with `|H(x) - E| <= shell_width / 2`,
/// projected onto the nearest density matrix.
pub fn microcanonical_dm(
    h: &HermitianObservable,
    energy: f64,
    mc: &McParams,
) -> Result<MicrocanonicalEstimate> {
    let sampler = mc.sampler(h.dim())?;
    let spec = h.spectrum();
    let width = mc.resolved_shell_width(spec);
    let (lo, hi) = (energy - 0.5 * width, energy + 0.5 * width);
    if !(hi >= spec.min() && lo <= spec.max()) {
        return Err(Error::param(
            "energy",
            format!(
                "shell [{lo}, {hi}] misses the spectral range [{}, {}]",
                spec.min(),
                spec.max()
            ),
        ));
    }
    let layout = FeatureLayout { dim: h.dim() };
    let parts = sampler.fold_chunks(
        || (WeightedMoments::new(layout.len()), vec![0.0; layout.len()]),
        |(acc, buf), x| {
            let e = layout.fill(spec, x, buf);
            let w = if e >= lo && e <= hi { 1.0 } else { 0.0 };
            acc.push(w, buf);
        },
    );
    let m = WeightedMoments::reduce(parts.into_iter().map(|p| p.0).collect());
    if m.hits < SHELL_FLOOR {
        return Err(Error::SparseShell {
            hits: m.hits,
            floor: SHELL_FLOOR,
        });
    }
    let (mean, se) = m.ratio_means();
    let raw = layout.matrix(&mean);
    let density = DensityMatrix::nearest(&raw)?;
    Ok(MicrocanonicalEstimate {
        density,
        raw: estimate(m.hits, mc, raw, layout.matrix(&se)),
        populations: estimate(
            m.hits,
            mc,
            layout.occupations(&mean),
            layout.occupations(&se),
        ),
        energy: EnsembleEstimate {
            value: mean[layout.energy_index()],
            std_error: se[layout.energy_index()],
            samples_used: m.hits,
            seed: mc.seed,
            chunks: mc.chunks,
        },
        shell_width: width,
        hits: m.hits,
    })
}

/// Microcanonical density matrix as `(dW/dHbar)^{-1} dW/dH`.
///
/// Every derivative is a central difference of `W(E)` with step `h_step`,
/// all evaluated on the same samples. `H(x)` is linear in `H`, so the
/// perturbed energies are `H(x) +- h_step tr(D Pi(x))` for each direction
/// `D` of the Hermitian basis (diagonal units, symmetric and antisymmetric
/// off-diagonal pairs). `Hbar` is realized as a uniform eigenvalue shift.
pub fn microcanonical_dm_via_volume(
    h: &HermitianObservable,
    energy: f64,
    mc: &McParams,
    h_step: f64,
) -> Result<VolumeDerivative> {
    let sampler = mc.sampler(h.dim())?;
    if !(h_step > 0.0) || !h_step.is_finite() {
        return Err(Error::param("h_step", "must be positive"));
    }
    if !energy.is_finite() {
        return Err(Error::param("energy", "must be finite"));
    }
    let spec = h.spectrum();
    if let Some((i, j)) = spec.degenerate_pair(1e-10) {
        return Err(Error::DegenerateSpectrum(i, j));
    }
    let d = h.dim();
    let layout = FeatureLayout { dim: d };
    // Direction order: d*d entries of Pi-derived coefficients, then the shift.
    let dirs = d * d + 1;
    let step_of = |c: f64, e: f64| -> f64 {
        let up = (e + h_step * c <= energy) as i32 as f64;
        let dn = (e - h_step * c <= energy) as i32 as f64;
        up - dn
    };
    let parts = sampler.fold_chunks(
        || {
            (
                vec![0.0f64; 2 * dirs],
                0usize,
                vec![0.0; layout.len()],
                vec![0.0; dirs],
            )
        },
        |(sums, hits, buf, coef), x| {
            let e = layout.fill(spec, x, buf);
            if (e - energy).abs() > 2.0 * h_step {
                // |tr(D Pi)| <= 1 for every basis direction, so nothing flips.
                return;
            }
            for j in 0..d {
                coef[j * d + j] = buf[j * d + j];
                for k in (j + 1)..d {
                    coef[j * d + k] = 2.0 * buf[j * d + k];
                    coef[k * d + j] = 2.0 * buf[d * d + j * d + k];
                }
            }
            coef[d * d] = 1.0;
            let mut any = false;
            for (q, &c) in coef.iter().enumerate() {
                let s = step_of(c, e);
                if s != 0.0 {
                    any = true;
                    sums[2 * q] += s;
                    sums[2 * q + 1] += s * s;
                }
            }
            *hits += any as usize;
        },
    );
    let mut sums = vec![0.0; 2 * dirs];
    let mut hits = 0;
    for (s, k, _, _) in &parts {
        for (a, b) in sums.iter_mut().zip(s) {
            *a += b;
        }
        hits += k;
    }
    let n = mc.samples as f64;
    let scale = phase_space_volume(d) / (2.0 * h_step);
    let deriv: Vec<f64> = (0..dirs).map(|q| scale * sums[2 * q] / n).collect();
    let shift = deriv[d * d];
    if shift == 0.0 {
        return Err(Error::param(
            "energy",
            "no samples near the energy surface; widen h_step or add samples",
        ));
    }
    let shift_var = (sums[2 * d * d + 1] / n - (sums[2 * d * d] / n).powi(2)).max(0.0);
    let shift_se = scale * (shift_var / n).sqrt();

    // dW/dH_jj, and the symmetric/antisymmetric pairs give 2 Re, 2 Im of the
    // off-diagonal entries.
    let mut raw = CMatrix::zeros(d);
    for j in 0..d {
        raw[(j, j)] = C64::new(deriv[j * d + j] / shift, 0.0);
        for k in (j + 1)..d {
            let re = 0.5 * deriv[j * d + k] / shift;
            let im = 0.5 * deriv[k * d + j] / shift;
            raw[(j, k)] = C64::new(re, im);
            raw[(k, j)] = C64::new(re, -im);
        }
    }
    let tr = raw.trace().re;
    if !(tr > 0.0) {
        return Err(Error::NotDensityMatrix(
            "volume derivative has no positive trace",
        ));
    }
    let raw = raw.scale(1.0 / tr);
    let density = DensityMatrix::nearest(&raw)?;
    Ok(VolumeDerivative {
        density,
        raw,
        dw_dshift: EnsembleEstimate {
            value: shift,
            std_error: shift_se,
            samples_used: mc.samples,
            seed: mc.seed,
            chunks: mc.chunks,
        },
        h_step,
        hits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn spin() -> HermitianObservable {
        HermitianObservable::from_levels(&[-1.0, 1.0]).unwrap()
    }

    #[test]
    fn volume_examples() {
        let h = spin();
        let mc = McParams::new(200_000, 5);
        assert_eq!(volume_below(&h, -1.5, &mc).unwrap().value, 0.0);
        assert_eq!(volume_below(&h, 1.0, &mc).unwrap().value, 4.0 * PI);
        let w = volume_below(&h, 0.0, &mc).unwrap();
        assert!(w.z_score(2.0 * PI).abs() < 3.0);
        let h3 = HermitianObservable::from_levels(&[0.0, 1.0, 2.0]).unwrap();
        let w3 = volume_below(&h3, 1.0, &mc).unwrap();
        assert!(w3.z_score(4.0 * PI * PI).abs() < 3.0);
    }

    #[test]
    fn shell_populations_follow_latitude() {
        let h = spin();
        let mc = McParams::new(400_000, 17);
        for e in [-0.5, 0.0, 0.5] {
            let est = microcanonical_dm(&h, e, &mc).unwrap();
            let want = [(1.0 - e) / 2.0, (1.0 + e) / 2.0];
            for k in 0..2 {
                let z = (est.populations.value[k] - want[k]) / est.populations.std_error[k];
                assert!(z.abs() < 3.0, "E={e} k={k} z={z}");
            }
        }
    }

    #[test]
    fn sparse_shell_is_refused() {
        let h = spin();
        let mc = McParams::new(1_000, 1).with_shell_width(1e-4);
        assert!(matches!(
            microcanonical_dm(&h, 0.0, &mc),
            Err(Error::SparseShell { .. })
        ));
        assert!(microcanonical_dm(&h, 3.0, &mc).is_err());
    }

    #[test]
    fn volume_derivative_matches_shell() {
        let h = spin();
        let mc = McParams::new(2_000_000, 23);
        let v = microcanonical_dm_via_volume(&h, 0.5, &mc, 1e-3).unwrap();
        let p = v.density.populations(h.spectrum()).unwrap();
        assert!((p[0] - 0.25).abs() < 0.05 * 0.25, "{p:?}");
        // Omega = 2 pi for spin-1/2 at unit splitting.
        assert!((v.dw_dshift.value / (-2.0 * PI) - 1.0).abs() < 0.05);
    }

    #[test]
    fn volume_derivative_refuses_degenerate() {
        let h = HermitianObservable::from_levels(&[0.0, 0.0, 1.0]).unwrap();
        let mc = McParams::new(1_000, 1);
        assert!(matches!(
            microcanonical_dm_via_volume(&h, 0.5, &mc, 1e-3),
            Err(Error::DegenerateSpectrum(..))
        ));
    }
}
