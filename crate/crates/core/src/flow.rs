//! Schrödinger evolution as a Hamiltonian flow on phase space.
//!
//! The sign convention is `dZ = +i H Z dt`, so an eigenvector of energy `E`
//! picks up the phase `e^{+iEt}`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::{
    observable_variance, overlap_sqr, wrap_angle, HermitianObservable, PureState,
};
use crate::linalg::{inner, norm_sqr, CMatrix, C64};

/// A sampled solution curve of the projective Schrödinger equation.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<PureState>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<PureState>) -> Result<Self> {
        if times.len() != states.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                found: states.len(),
            });
        }
        if times.is_empty() {
            return Err(Error::param("times", "trajectory must be nonempty"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("times", "must be strictly increasing"));
        }
        let dim = states[0].dim();
        if let Some(bad) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        Ok(Trajectory { times, states })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn last(&self) -> &PureState {
        &self.states[self.states.len() - 1]
    }
}

fn check_dim(h: &HermitianObservable, x: &PureState) -> Result<()> {
    if h.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: x.dim(),
        });
    }
    Ok(())
}

/// `exp(i t H) x0` through the spectral decomposition of `H`.
pub fn evolve_exact(h: &HermitianObservable, x0: &PureState, t: f64) -> Result<PureState> {
    check_dim(h, x0)?;
    if t == 0.0 {
        return Ok(x0.clone());
    }
    let spec = h.spectrum();
    let vecs = spec.eigenvectors();
    let n = h.dim();
    let mut out = vec![C64::new(0.0, 0.0); n];
    for (k, &e) in spec.eigenvalues().iter().enumerate() {
        let y = vecs.column(k);
        let c = inner(&y, x0.amplitudes()) * C64::from_polar(1.0, e * t);
        for (o, yi) in out.iter_mut().zip(&y) {
            *o += c * yi;
        }
    }
    PureState::new(out)
}

/// Samples the exact flow at `times`.
pub fn exact_trajectory(
    h: &HermitianObservable,
    x0: &PureState,
    times: &[f64],
) -> Result<Trajectory> {
    let states = times
        .iter()
        .map(|&t| evolve_exact(h, x0, t))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(times.to_vec(), states)
}

/// Classical fourth-order Runge–Kutta on `dZ/dt = i H Z`, renormalized after
/// every step. The step is shrunk slightly so that an integer number of steps
/// lands exactly on `t`; every step is recorded.
pub fn evolve_numeric(
    h: &HermitianObservable,
    x0: &PureState,
    t: f64,
    dt: f64,
) -> Result<Trajectory> {
    check_dim(h, x0)?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::param("dt", "step must be positive"));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::param("t", "final time must be positive"));
    }
    let steps = (t / dt).ceil().max(1.0) as usize;
    let step = t / steps as f64;
    let m = h.matrix();
    let n = h.dim();
    let i_unit = C64::new(0.0, 1.0);
    let rhs = |z: &[C64]| -> Vec<C64> {
        let hz = m.mul_vec(z).expect("dimension checked");
        hz.into_iter().map(|v| i_unit * v).collect()
    };

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(x0.clone());
    let mut z = x0.amplitudes().to_vec();
    let mut tmp = vec![C64::new(0.0, 0.0); n];
    for s in 1..=steps {
        let k1 = rhs(&z);
        for i in 0..n {
            tmp[i] = z[i] + k1[i] * (0.5 * step);
        }
        let k2 = rhs(&tmp);
        for i in 0..n {
            tmp[i] = z[i] + k2[i] * (0.5 * step);
        }
        let k3 = rhs(&tmp);
        for i in 0..n {
            tmp[i] = z[i] + k3[i] * step;
        }
        let k4 = rhs(&tmp);
        for i in 0..n {
            z[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (step / 6.0);
        }
        let inv = 1.0 / norm_sqr(&z).sqrt();
        z.iter_mut().for_each(|v| *v *= inv);
        times.push(step * s as f64);
        states.push(PureState::from_unit(z.clone()));
    }
    Trajectory::new(times, states)
}

/// Fubini–Study speed `ds/dt = 2 sqrt(Var H)` of the flow through `x`.
pub fn phase_speed(h: &HermitianObservable, x: &PureState) -> Result<f64> {
    Ok(2.0 * observable_variance(h, x)?.sqrt())
}

/// Worst deviation of each eigen-occupation `|<y_k|x(t)>|^2` from its value at
/// the start of the trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapReport {
    pub drifts: Vec<f64>,
}

impl OverlapReport {
    pub fn max_drift(&self) -> f64 {
        self.drifts.iter().copied().fold(0.0, f64::max)
    }
}

/// The unitary flow only moves the phases of the eigen-amplitudes; the
/// occupations (the angular parameters of the energy surface) stay fixed.
pub fn overlap_invariants(h: &HermitianObservable, traj: &Trajectory) -> Result<OverlapReport> {
    if traj.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: traj.dim(),
        });
    }
    let spec = h.spectrum();
    let initial = spec.occupations(&traj.states()[0]);
    let mut drifts = vec![0.0; h.dim()];
    let mut occ = vec![0.0; h.dim()];
    for s in traj.states() {
        spec.occupations_into(s.amplitudes(), &mut occ);
        for k in 0..occ.len() {
            drifts[k] = drifts[k].max((occ[k] - initial[k]).abs());
        }
    }
    Ok(OverlapReport { drifts })
}

/// Largest change of `H(x(t))` along the trajectory.
pub fn energy_drift(h: &HermitianObservable, traj: &Trajectory) -> Result<f64> {
    let e0 = crate::geometry::expectation(h, &traj.states()[0])?;
    traj.states().iter().try_fold(0.0, |acc: f64, s| {
        Ok(acc.max((crate::geometry::expectation(h, s)? - e0).abs()))
    })
}

/// Largest change of any pairwise Fubini–Study distance in a co-evolved
/// family of trajectories sampled at common times.
pub fn pairwise_distance_drift(trajectories: &[Trajectory]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for a in 0..trajectories.len() {
        for b in a + 1..trajectories.len() {
            let (ta, tb) = (&trajectories[a], &trajectories[b]);
            if ta.len() != tb.len() {
                return Err(Error::DimensionMismatch {
                    expected: ta.len(),
                    found: tb.len(),
                });
            }
            let d0 = crate::geometry::fs_angle(&ta.states()[0], &tb.states()[0])?;
            for (x, y) in ta.states().iter().zip(tb.states()) {
                worst = worst.max((crate::geometry::fs_angle(x, y)? - d0).abs());
            }
        }
    }
    Ok(worst)
}

/// Relative phases `arg<y_k|x> - arg<y_0|x>` in `[0, 2 pi)` for `k >= 1`;
/// these are the torus coordinates on a fixed set of occupations.
pub fn relative_phases(h: &HermitianObservable, x: &PureState) -> Result<Vec<f64>> {
    check_dim(h, x)?;
    let vecs = h.spectrum().eigenvectors();
    let amps: Vec<C64> = (0..h.dim())
        .map(|k| inner(&vecs.column(k), x.amplitudes()))
        .collect();
    let ref_arg = amps[0].arg();
    Ok(amps[1..]
        .iter()
        .map(|a| wrap_angle(a.arg() - ref_arg))
        .collect())
}

/// Fraction of the `bins^(dim-1)` cells of the phase torus visited by the
/// trajectory. Grows towards 1 when the winding is nonperiodic.
pub fn torus_coverage(h: &HermitianObservable, traj: &Trajectory, bins: usize) -> Result<f64> {
    if bins == 0 {
        return Err(Error::param("bins", "must be positive"));
    }
    let axes = h.dim() - 1;
    let cells = bins
        .checked_pow(axes as u32)
        .filter(|&c| c <= 1 << 24)
        .ok_or_else(|| Error::param("bins", "too many torus cells"))?;
    let mut seen = vec![false; cells];
    for s in traj.states() {
        let phases = relative_phases(h, s)?;
        let idx = phases.iter().fold(0usize, |acc, p| {
            let b = ((p / TAU) * bins as f64) as usize;
            acc * bins + b.min(bins - 1)
        });
        seen[idx] = true;
    }
    Ok(seen.iter().filter(|&&v| v).count() as f64 / cells as f64)
}

/// Largest empty arc left by a set of angles on the circle.
pub fn max_circle_gap(angles: &[f64]) -> f64 {
    if angles.is_empty() {
        return TAU;
    }
    let mut a: Vec<f64> = angles.iter().map(|x| wrap_angle(*x)).collect();
    a.sort_by(f64::total_cmp);
    let wrap = a[0] + TAU - a[a.len() - 1];
    a.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::max)
}

/// Metric and symplectic form of `CP^1` in the `(theta, phi)` chart, where the
/// Fubini–Study metric is that of the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartGeometry {
    theta: f64,
}

impl ChartGeometry {
    pub fn at(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < PI) || theta.sin() < 1e-6 {
            return Err(Error::ChartSingularity(theta));
        }
        Ok(ChartGeometry { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `g_ab` with index order `(theta, phi)`.
    pub fn metric(&self) -> [[f64; 2]; 2] {
        let s = self.theta.sin();
        [[1.0, 0.0], [0.0, s * s]]
    }

    pub fn inverse_metric(&self) -> [[f64; 2]; 2] {
        let s = self.theta.sin();
        [[1.0, 0.0], [0.0, 1.0 / (s * s)]]
    }

    /// `Omega_ab`, with `Omega_{theta phi} = sin(theta)`.
    pub fn symplectic(&self) -> [[f64; 2]; 2] {
        let s = self.theta.sin();
        [[0.0, s], [-s, 0.0]]
    }

    /// `Omega^ab = g^ac g^bd Omega_cd`
    pub fn symplectic_raised(&self) -> [[f64; 2]; 2] {
        let gi = self.inverse_metric();
        let w = self.symplectic();
        let mut out = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        out[a][b] += gi[a][c] * gi[b][d] * w[c][d];
                    }
                }
            }
        }
        out
    }

    /// Largest entry of `g^ab Omega_ac Omega_bd - g_cd`.
    pub fn compatibility_residual(&self) -> f64 {
        let g = self.metric();
        let gi = self.inverse_metric();
        let w = self.symplectic();
        let mut worst: f64 = 0.0;
        for c in 0..2 {
            for d in 0..2 {
                let mut acc = 0.0;
                for a in 0..2 {
                    for b in 0..2 {
                        acc += gi[a][b] * w[a][c] * w[b][d];
                    }
                }
                worst = worst.max((acc - g[c][d]).abs());
            }
        }
        worst
    }
}

/// Residuals of the two Killing-field identities on `CP^1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KillingResiduals {
    /// Largest component of the symmetrized covariant derivative of `xi_a`.
    pub killing: f64,
    /// `Omega^ab nabla_a xi_b`, evaluated by finite differences.
    pub divergence_lhs: f64,
    /// `2 (n + 1) (H - mean eigenvalue)` with `n = 1`.
    pub potential_rhs: f64,
    pub potential: f64,
}

const CHART_STEP: f64 = 1e-5;

/// Checks in the `(theta, phi)` chart that the flow `xi^a = 2 Omega^ab d_b H`
/// of `H = h cos(theta)` is Killing and that `Omega^ab nabla_a xi_b` recovers
/// `2 (n + 1) (H - H_bar)`. Derivatives of the lowered field and of the metric
/// are central differences with step `1e-5`.
pub fn killing_identity_residual_cp1(h: f64, theta: f64) -> Result<KillingResiduals> {
    if h == 0.0 || !h.is_finite() {
        return Err(Error::param("h", "must be nonzero and finite"));
    }
    let chart = ChartGeometry::at(theta)?;
    if !(theta - CHART_STEP > 0.0 && theta + CHART_STEP < PI) {
        return Err(Error::ChartSingularity(theta));
    }

    // H depends on theta only, so d_phi H = 0 and xi^theta = 0, xi^phi = 2h.
    let xi_up = |th: f64| -> [f64; 2] {
        let c = ChartGeometry { theta: th };
        let w = c.symplectic_raised();
        let dh = [-h * th.sin(), 0.0];
        [
            2.0 * (w[0][0] * dh[0] + w[0][1] * dh[1]),
            2.0 * (w[1][0] * dh[0] + w[1][1] * dh[1]),
        ]
    };
    let xi_down = |th: f64| -> [f64; 2] {
        let g = ChartGeometry { theta: th }.metric();
        let up = xi_up(th);
        [
            g[0][0] * up[0] + g[0][1] * up[1],
            g[1][0] * up[0] + g[1][1] * up[1],
        ]
    };
    let metric_at = |th: f64| ChartGeometry { theta: th }.metric();

    // Partial derivatives d_a of xi_b and g_bc; nothing depends on phi.
    let mut d_xi = [[0.0; 2]; 2];
    let (xp, xm) = (xi_down(theta + CHART_STEP), xi_down(theta - CHART_STEP));
    for b in 0..2 {
        d_xi[0][b] = (xp[b] - xm[b]) / (2.0 * CHART_STEP);
    }
    let mut d_g = [[[0.0; 2]; 2]; 2];
    let (gp, gm) = (metric_at(theta + CHART_STEP), metric_at(theta - CHART_STEP));
    for b in 0..2 {
        for c in 0..2 {
            d_g[0][b][c] = (gp[b][c] - gm[b][c]) / (2.0 * CHART_STEP);
        }
    }

    // Gamma^c_ab = g^cd (d_a g_db + d_b g_da - d_d g_ab) / 2
    let gi = chart.inverse_metric();
    let mut gamma = [[[0.0; 2]; 2]; 2];
    for c in 0..2 {
        for a in 0..2 {
            for b in 0..2 {
                let mut acc = 0.0;
                for d in 0..2 {
                    acc += gi[c][d] * (d_g[a][d][b] + d_g[b][d][a] - d_g[d][a][b]);
                }
                gamma[c][a][b] = 0.5 * acc;
            }
        }
    }

    let xi = xi_down(theta);
    let mut cov = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let corr: f64 = (0..2).map(|c| gamma[c][a][b] * xi[c]).sum();
            cov[a][b] = d_xi[a][b] - corr;
        }
    }
    let mut killing: f64 = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            killing = killing.max((0.5 * (cov[a][b] + cov[b][a])).abs());
        }
    }

    let w_up = chart.symplectic_raised();
    let mut lhs = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            lhs += w_up[a][b] * cov[a][b];
        }
    }
    // Spectrum {-h, h}: mean eigenvalue 0, n = 1.
    let rhs = 2.0 * 2.0 * (h * theta.cos() - 0.0);
    Ok(KillingResiduals {
        killing,
        divergence_lhs: lhs,
        potential_rhs: rhs,
        potential: (lhs - rhs).abs(),
    })
}

/// Time after which every state of a two-level flow returns to its starting
/// point: `2 pi / (E_1 - E_0)`, which is `pi / h` for levels `-h, h`.
pub fn two_level_period(h: &HermitianObservable) -> Result<f64> {
    if h.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: h.dim(),
        });
    }
    let gap = h.spectrum().range();
    if gap <= 0.0 {
        return Err(Error::DegenerateSpectrum(0, 1));
    }
    Ok(TAU / gap)
}

/// `|<x|y>|^2` shorthand used by trajectory checks.
pub fn overlap(x: &PureState, y: &PureState) -> f64 {
    overlap_sqr(x.amplitudes(), y.amplitudes())
}

/// Unitary `exp(i t H)`.
pub fn propagator(h: &HermitianObservable, t: f64) -> CMatrix {
    let spec = h.spectrum();
    let n = h.dim();
    let vecs = spec.eigenvectors();
    let mut u = CMatrix::zeros(n);
    for (k, &e) in spec.eigenvalues().iter().enumerate() {
        let ph = C64::from_polar(1.0, e * t);
        for i in 0..n {
            for j in 0..n {
                u[(i, j)] += vecs[(i, k)] * ph * vecs[(j, k)].conj();
            }
        }
    }
    u
}
