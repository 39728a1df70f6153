use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{
    check_beta, energy_of, estimate, phase_space_volume, EnsembleEstimate, FeatureLayout, McParams,
    WeightedMoments,
};
use crate::error::{Error, Result};
use crate::geometry::{DensityMatrix, HermitianObservable};
use crate::linalg::{CMatrix, C64};

/// Importance-sampling estimates below this effective sample size are refused.
pub const ESS_FLOOR: f64 = 100.0;

/// Canonical Gamma-ensemble estimate at one inverse temperature.
#[derive(Debug, Clone)]
pub struct CanonicalEstimate {
    /// Nearest exact density matrix to the raw estimate.
    pub density: DensityMatrix,
    /// Self-normalized estimate of `int Pi(x) rho_beta(x) dV` before projection.
    pub raw: EnsembleEstimate<CMatrix>,
    /// Eigen-occupations in ascending level order.
    pub populations: EnsembleEstimate<Vec<f64>>,
    pub energy: EnsembleEstimate<f64>,
    pub partition: EnsembleEstimate<f64>,
    pub effective_sample_size: f64,
}

// Largest exponent is zero, so weights stay in (0, 1].
fn weight_shift(h: &HermitianObservable, beta: f64) -> f64 {
    if beta >= 0.0 {
        h.spectrum().min()
    } else {
        h.spectrum().max()
    }
}

fn partition_from(
    m: &WeightedMoments,
    beta: f64,
    shift: f64,
    dim: usize,
    mc: &McParams,
) -> EnsembleEstimate<f64> {
    let n = m.count as f64;
    let mean = m.sum_w / n;
    let var = ((m.sum_w2 / n - mean * mean) * n / (n - 1.0)).max(0.0);
    let scale = phase_space_volume(dim) * (-beta * shift).exp();
    EnsembleEstimate {
        value: scale * mean,
        std_error: scale * (var / n).sqrt(),
        samples_used: m.count,
        seed: mc.seed,
        chunks: mc.chunks,
    }
}

/// `Z(beta) = int exp(-beta H(x)) dV`, estimated as `V_n` times the sample
/// mean of `exp(-beta H(x_i))` over Fubini–Study draws.
pub fn canonical_partition(
    h: &HermitianObservable,
    beta: f64,
    mc: &McParams,
) -> Result<EnsembleEstimate<f64>> {
    Ok(partition_multi(h, &[beta], mc)?.remove(0))
}

/// Partition functions at several inverse temperatures from one sample stream.
pub(crate) fn partition_multi(
    h: &HermitianObservable,
    betas: &[f64],
    mc: &McParams,
) -> Result<Vec<EnsembleEstimate<f64>>> {
    for &b in betas {
        check_beta(b)?;
    }
    let sampler = mc.sampler(h.dim())?;
    let spec = h.spectrum();
    let shifts: Vec<f64> = betas.iter().map(|&b| weight_shift(h, b)).collect();
    let parts = sampler.fold_chunks(
        || {
            (
                vec![WeightedMoments::new(0); betas.len()],
                vec![0.0; h.dim()],
            )
        },
        |(acc, occ), x| {
            let e = energy_of(spec, x, occ);
            for ((a, &b), &s) in acc.iter_mut().zip(betas).zip(&shifts) {
                a.push((-b * (e - s)).exp(), &[]);
            }
        },
    );
    let mut per_beta: Vec<Vec<WeightedMoments>> = (0..betas.len()).map(|_| Vec::new()).collect();
    for (acc, _) in parts {
        for (j, m) in acc.into_iter().enumerate() {
            per_beta[j].push(m);
        }
    }
    Ok(per_beta
        .into_iter()
        .enumerate()
        .map(|(j, ms)| {
            let m = WeightedMoments::reduce(ms);
            partition_from(&m, betas[j], shifts[j], h.dim(), mc)
        })
        .collect())
}

/// Density matrix of the canonical Gamma-distribution `exp(-beta H(x)) / Z`:
/// the self-normalized average `sum_i w_i Pi(x_i) / sum_i w_i` with
/// `w_i = exp(-beta H(x_i))`, projected onto the nearest density matrix.
pub fn canonical_density_matrix(
    h: &HermitianObservable,
    beta: f64,
    mc: &McParams,
) -> Result<CanonicalEstimate> {
    check_beta(beta)?;
    let sampler = mc.sampler(h.dim())?;
    let spec = h.spectrum();
    let layout = FeatureLayout { dim: h.dim() };
    let shift = weight_shift(h, beta);
    let parts = sampler.fold_chunks(
        || (WeightedMoments::new(layout.len()), vec![0.0; layout.len()]),
        |(acc, buf), x| {
            let e = layout.fill(spec, x, buf);
            acc.push((-beta * (e - shift)).exp(), buf);
        },
    );
    let m = WeightedMoments::reduce(parts.into_iter().map(|p| p.0).collect());
    let ess = m.ess();
    if !(ess >= ESS_FLOOR) {
        return Err(Error::EffectiveSampleSize {
            ess,
            floor: ESS_FLOOR,
        });
    }
    let (mean, se) = m.ratio_means();
    let raw_matrix = layout.matrix(&mean);
    let density = DensityMatrix::nearest(&raw_matrix)?;
    Ok(CanonicalEstimate {
        density,
        raw: estimate(m.count, mc, raw_matrix, layout.matrix(&se)),
        populations: estimate(
            m.count,
            mc,
            layout.occupations(&mean),
            layout.occupations(&se),
        ),
        energy: EnsembleEstimate {
            value: mean[layout.energy_index()],
            std_error: se[layout.energy_index()],
            samples_used: m.count,
            seed: mc.seed,
            chunks: mc.chunks,
        },
        partition: partition_from(&m, beta, shift, h.dim(), mc),
        effective_sample_size: ess,
    })
}

/// Conventional density matrix `exp(-beta H) / tr exp(-beta H)`, a Boltzmann
/// mixture of eigenstate projectors.
pub fn conventional_gibbs_dm(h: &HermitianObservable, beta: f64) -> Result<DensityMatrix> {
    check_beta(beta)?;
    let spec = h.spectrum();
    let shift = weight_shift(h, beta);
    let mut weights: Vec<f64> = spec
        .eigenvalues()
        .iter()
        .map(|e| (-beta * (e - shift)).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let m = CMatrix::from_spectral(&weights, spec.eigenvectors())?.hermitized();
    // Trace exactly one: absorb rounding into the diagonal.
    let tr = m.trace().re;
    let mut m = m;
    let d = h.dim();
    let fix = (1.0 - tr) / d as f64;
    for i in 0..d {
        m[(i, i)] += C64::new(fix, 0.0);
    }
    DensityMatrix::new(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PureState;
    use core::f64::consts::PI;

    fn spin() -> HermitianObservable {
        HermitianObservable::from_levels(&[-1.0, 1.0]).unwrap()
    }

    #[test]
    fn gibbs_examples() {
        let h = HermitianObservable::from_levels(&[0.0, 1.0, 2.5]).unwrap();
        let r0 = conventional_gibbs_dm(&h, 0.0).unwrap();
        assert!(
            r0.matrix()
                .max_abs_diff(&CMatrix::identity(3).scale(1.0 / 3.0))
                < 1e-15
        );

        let r = conventional_gibbs_dm(&spin(), 1.0).unwrap();
        let e = 1.0f64.exp();
        assert!((r.matrix()[(0, 0)].re - e / (e + 1.0 / e)).abs() < 1e-15);
        assert!((r.matrix()[(0, 0)].re - 0.880797).abs() < 5e-7);
        assert!((r.matrix()[(1, 1)].re - 0.119203).abs() < 5e-7);
        assert_eq!(r.matrix().trace().re, 1.0);

        let cold = conventional_gibbs_dm(&h, 100.0).unwrap();
        let ground = crate::geometry::projector(&PureState::basis(3, 0).unwrap());
        assert!(cold.matrix().max_abs_diff(ground.matrix()) < 1e-10);
        assert!(conventional_gibbs_dm(&h, f64::NAN).is_err());
    }

    #[test]
    fn infinite_temperature_is_maximally_mixed() {
        let h = HermitianObservable::from_levels(&[0.0, 1.0, 2.0]).unwrap();
        let mc = McParams::new(100_000, 11);
        let est = canonical_density_matrix(&h, 0.0, &mc).unwrap();
        for k in 0..3 {
            let p = est.populations.value[k];
            assert!((p - 1.0 / 3.0).abs() <= 3.0 * est.populations.std_error[k]);
        }
        let z = canonical_partition(&h, 0.0, &mc).unwrap();
        assert!((z.value - 8.0 * PI * PI).abs() < 1e-9);
        assert_eq!(z.std_error, 0.0);
    }

    #[test]
    fn ess_floor_is_enforced() {
        let h = spin();
        let mc = McParams::new(1_000, 3);
        let err = canonical_density_matrix(&h, 1e4, &mc).unwrap_err();
        assert!(matches!(err, Error::EffectiveSampleSize { .. }));
    }

    #[test]
    fn deterministic_for_fixed_seed_and_chunks() {
        let h = spin();
        let mc = McParams::new(5_000, 99).with_chunks(3);
        let a = canonical_density_matrix(&h, 1.0, &mc).unwrap();
        let b = canonical_density_matrix(&h, 1.0, &mc).unwrap();
        assert_eq!(a.raw.value, b.raw.value);
        assert_eq!(a.partition, b.partition);
    }
}
