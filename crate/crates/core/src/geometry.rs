//! Points of `CP^n`, observables, and the Fubini–Study geometry between them.

use alloc::vec::Vec;
use core::cmp::Ordering;

// Shadowed by inherent methods whenever std is in the build graph.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{inner, jacobi_eigh, norm_sqr, CMatrix, C64};

/// Reduces an angle to `[0, 2 pi)`.
pub(crate) fn wrap_angle(a: f64) -> f64 {
    let r = a % core::f64::consts::TAU;
    let r = if r < 0.0 {
        r + core::f64::consts::TAU
    } else {
        r
    };
    // A tiny negative input rounds up to exactly 2 pi.
    if r >= core::f64::consts::TAU {
        0.0
    } else {
        r
    }
}

/// Tolerance for construction invariants (normalization, hermiticity).
pub const CONSTRUCTION_TOL: f64 = 1e-12;
/// Tolerance for spectral residuals and density-matrix checks.
pub const SPECTRAL_TOL: f64 = 1e-10;

/// A point of `CP^n`, held as a unit amplitude vector.
///
/// The global phase is carried along but has no physical meaning; every
/// operation in this crate is invariant under it.
#[derive(Debug, Clone)]
pub struct PureState {
    amps: Vec<C64>,
}

impl PureState {
    /// Normalizes `amps` and wraps it.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if amps.len() < 2 {
            return Err(Error::DimensionTooSmall(amps.len()));
        }
        let n2 = norm_sqr(&amps);
        if !n2.is_finite() || n2 == 0.0 {
            return Err(Error::NotNormalizable);
        }
        let inv = 1.0 / n2.sqrt();
        Ok(PureState {
            amps: amps.into_iter().map(|z| z * inv).collect(),
        })
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::new(amps.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// The `k`-th standard basis vector of a `dim`-level system.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::param("k", "basis index out of range"));
        }
        let mut amps = alloc::vec![C64::new(0.0, 0.0); dim];
        amps[k] = C64::new(1.0, 0.0);
        Self::new(amps)
    }

    // Caller guarantees unit norm up to rounding.
    pub(crate) fn from_unit(amps: Vec<C64>) -> Self {
        PureState { amps }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    #[inline]
    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    /// Multiplies by a global phase `e^{i phase}` (same phase-space point).
    pub fn with_phase(&self, phase: f64) -> Self {
        let u = C64::from_polar(1.0, phase);
        PureState {
            amps: self.amps.iter().map(|z| z * u).collect(),
        }
    }

    /// Normal form with the first non-negligible amplitude real and positive.
    pub fn canonical_phase(&self) -> Self {
        let scale = self.amps.iter().map(|z| z.norm()).fold(0.0, f64::max);
        match self.amps.iter().find(|z| z.norm() > 1e-12 * scale) {
            Some(lead) => {
                let u = lead.conj() / lead.norm();
                PureState {
                    amps: self.amps.iter().map(|z| z * u).collect(),
                }
            }
            None => self.clone(),
        }
    }

    /// Whether both represent the same point of phase space.
    pub fn same_point(&self, other: &PureState, tol: f64) -> bool {
        self.dim() == other.dim() && (1.0 - overlap_sqr(&self.amps, &other.amps)).abs() <= tol
    }

    pub fn apply(&self, unitary: &CMatrix) -> Result<Self> {
        Self::new(unitary.mul_vec(&self.amps)?)
    }
}

/// A Hermitian operator together with its spectral decomposition.
#[derive(Debug, Clone)]
pub struct HermitianObservable {
    matrix: CMatrix,
    spectrum: Spectrum,
}

impl HermitianObservable {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.dim() < 2 {
            return Err(Error::DimensionTooSmall(matrix.dim()));
        }
        let residual = matrix.hermitian_residual();
        if !(residual <= CONSTRUCTION_TOL * matrix.max_abs().max(1.0)) {
            return Err(Error::NotHermitian { residual });
        }
        let matrix = matrix.hermitized();
        let spectrum = eigen_sorted(&matrix)?;
        Ok(HermitianObservable { matrix, spectrum })
    }

    /// Diagonal observable with the given levels in the standard basis.
    pub fn from_levels(levels: &[f64]) -> Result<Self> {
        Self::new(CMatrix::from_real_diagonal(levels))
    }

    #[inline]
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    #[inline]
    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `H + shift * I`
    pub fn shifted(&self, shift: f64) -> Result<Self> {
        Self::new(
            self.matrix
                .add(&CMatrix::identity(self.dim()).scale(shift))?,
        )
    }
}

/// Sorted eigenvalues with their orthonormal eigenvectors (as columns).
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
    mean_eigenvalue: f64,
}

impl Spectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, k: usize) -> PureState {
        PureState::from_unit(self.eigenvectors.column(k))
    }

    pub fn mean_eigenvalue(&self) -> f64 {
        self.mean_eigenvalue
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    pub fn range(&self) -> f64 {
        self.max() - self.min()
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// First pair of levels closer than `rel_tol` times the spectral scale.
    pub fn degenerate_pair(&self, rel_tol: f64) -> Option<(usize, usize)> {
        let scale = self
            .eigenvalues
            .iter()
            .map(|e| e.abs())
            .fold(self.range(), f64::max)
            .max(f64::MIN_POSITIVE);
        self.eigenvalues
            .windows(2)
            .position(|w| w[1] - w[0] <= rel_tol * scale)
            .map(|i| (i, i + 1))
    }

    /// Occupation probabilities `|<y_k|x>|^2` of a state in this eigenbasis.
    pub fn occupations_into(&self, x: &[C64], out: &mut [f64]) {
        let n = self.eigenvalues.len();
        for (k, o) in out.iter_mut().enumerate().take(n) {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..n {
                acc += self.eigenvectors[(i, k)].conj() * x[i];
            }
            *o = acc.norm_sqr();
        }
    }

    pub fn occupations(&self, x: &PureState) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.dim()];
        self.occupations_into(x.amplitudes(), &mut out);
        out
    }
}

/// A Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates the density-matrix invariants.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.hermitian_residual() > CONSTRUCTION_TOL {
            return Err(Error::NotDensityMatrix("not Hermitian"));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > SPECTRAL_TOL || tr.im.abs() > SPECTRAL_TOL {
            return Err(Error::NotDensityMatrix("trace is not 1"));
        }
        let (vals, _) = jacobi_eigh(&matrix)?;
        if vals.iter().any(|&v| v < -SPECTRAL_TOL) {
            return Err(Error::NotDensityMatrix("negative eigenvalue"));
        }
        Ok(DensityMatrix {
            matrix: matrix.hermitized(),
        })
    }

    /// Closest density matrix to an arbitrary square matrix: Hermitian part,
    /// negative eigenvalues clipped to zero, trace renormalized.
    pub fn nearest(matrix: &CMatrix) -> Result<Self> {
        let (mut vals, vecs) = jacobi_eigh(&matrix.hermitized())?;
        vals.iter_mut().for_each(|v| *v = v.max(0.0));
        let total: f64 = vals.iter().sum();
        if !(total > 0.0) {
            return Err(Error::NotDensityMatrix("no positive spectral weight"));
        }
        vals.iter_mut().for_each(|v| *v /= total);
        let m = CMatrix::from_spectral(&vals, &vecs)?;
        Ok(DensityMatrix {
            matrix: m.hermitized(),
        })
    }

    /// `I / dim`
    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix {
            matrix: CMatrix::identity(dim).scale(1.0 / dim as f64),
        }
    }

    pub(crate) fn from_trusted(matrix: CMatrix) -> Self {
        DensityMatrix { matrix }
    }

    #[inline]
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Diagonal `<y_k|rho|y_k>` in the eigenbasis of `spectrum`.
    pub fn populations(&self, spectrum: &Spectrum) -> Result<Vec<f64>> {
        check_dim(self.dim(), spectrum.dim())?;
        Ok((0..spectrum.dim())
            .map(|k| {
                let y = spectrum.eigenvectors().column(k);
                let ry = self.matrix.mul_vec(&y).expect("dimension checked");
                inner(&y, &ry).re
            })
            .collect())
    }

    /// `tr(A rho)`
    pub fn expectation(&self, observable: &HermitianObservable) -> Result<f64> {
        check_dim(self.dim(), observable.dim())?;
        Ok(observable.matrix().matmul(&self.matrix)?.trace().re)
    }

    /// Largest modulus of `[H, rho]`.
    pub fn commutator_norm(&self, observable: &HermitianObservable) -> Result<f64> {
        let hr = observable.matrix().matmul(&self.matrix)?;
        let rh = self.matrix.matmul(observable.matrix())?;
        Ok(hr.sub(&rh)?.max_abs())
    }
}

fn check_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch {
            expected: a,
            found: b,
        });
    }
    Ok(())
}

#[inline]
pub(crate) fn overlap_sqr(x: &[C64], y: &[C64]) -> f64 {
    inner(x, y).norm_sqr()
}

/// Transition probability `|<x|y>|^2 / (<x|x><y|y>)`, the cross ratio of the
/// two points.
pub fn transition_probability(x: &PureState, y: &PureState) -> Result<f64> {
    check_dim(x.dim(), y.dim())?;
    let k = overlap_sqr(&x.amps, &y.amps) / (norm_sqr(&x.amps) * norm_sqr(&y.amps));
    Ok(k.clamp(0.0, 1.0))
}

/// Fubini–Study angle `theta` with `kappa = cos^2(theta / 2)`. Orthogonal
/// states are `pi` apart.
pub fn fs_angle(x: &PureState, y: &PureState) -> Result<f64> {
    check_dim(x.dim(), y.dim())?;
    // atan2 of the parallel and perpendicular parts keeps small angles exact,
    // where acos of the overlap would lose half the digits.
    let c = inner(&x.amps, &y.amps);
    let perp: f64 = x
        .amps
        .iter()
        .zip(&y.amps)
        .map(|(a, b)| (b - a * c).norm_sqr())
        .sum();
    Ok(2.0 * perp.sqrt().atan2(c.norm()))
}

/// Rank-one projector onto `x`.
pub fn projector(x: &PureState) -> DensityMatrix {
    DensityMatrix::from_trusted(CMatrix::outer(&x.amps))
}

/// `<x|A|x>`, the phase-space function generated by `A`.
pub fn expectation(a: &HermitianObservable, x: &PureState) -> Result<f64> {
    check_dim(a.dim(), x.dim())?;
    Ok(quadratic_form(a.matrix(), &x.amps))
}

#[inline]
pub(crate) fn quadratic_form(a: &CMatrix, x: &[C64]) -> f64 {
    let n = x.len();
    let mut acc = 0.0;
    for i in 0..n {
        let mut row = C64::new(0.0, 0.0);
        for j in 0..n {
            row += a[(i, j)] * x[j];
        }
        acc += (x[i].conj() * row).re;
    }
    acc
}

/// `<x|A^2|x> - <x|A|x>^2`, clamped at zero.
pub fn observable_variance(a: &HermitianObservable, x: &PureState) -> Result<f64> {
    check_dim(a.dim(), x.dim())?;
    let ax = a.matrix().mul_vec(&x.amps)?;
    let second = norm_sqr(&ax);
    let first = inner(&x.amps, &ax).re;
    Ok((second - first * first).max(0.0))
}

/// Sorted eigen-decomposition of a Hermitian matrix.
///
/// Eigenvalues ascend. Each eigenvector is put in canonical phase, and exact
/// ties are ordered lexicographically by the `(re, im)` parts of their entries.
pub fn eigendecompose(a: &CMatrix) -> Result<Spectrum> {
    let residual = a.hermitian_residual();
    if !(residual <= CONSTRUCTION_TOL * a.max_abs().max(1.0)) {
        return Err(Error::NotHermitian { residual });
    }
    eigen_sorted(a)
}

fn eigen_sorted(a: &CMatrix) -> Result<Spectrum> {
    let n = a.dim();
    let (vals, vecs) = jacobi_eigh(a)?;
    let mut pairs: Vec<(f64, Vec<C64>)> = (0..n)
        .map(|k| {
            let col = PureState::from_unit(vecs.column(k)).canonical_phase();
            (vals[k], col.amps)
        })
        .collect();
    pairs.sort_by(|a, b| match a.0.partial_cmp(&b.0) {
        Some(Ordering::Equal) | None => lexicographic(&a.1, &b.1),
        Some(ord) => ord,
    });

    let mut eigenvectors = CMatrix::zeros(n);
    for (k, (_, v)) in pairs.iter().enumerate() {
        for i in 0..n {
            eigenvectors[(i, k)] = v[i];
        }
    }
    let eigenvalues: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mean_eigenvalue = eigenvalues.iter().sum::<f64>() / n as f64;
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
        mean_eigenvalue,
    })
}

fn lexicographic(a: &[C64], b: &[C64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let ord = x.re.total_cmp(&y.re).then_with(|| x.im.total_cmp(&y.im));
        if ord != Ordering::Equal {
            return ord;
        }
    }
    Ordering::Equal
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::{FRAC_1_SQRT_2, PI};

    fn st(re: &[f64]) -> PureState {
        PureState::from_real(re).unwrap()
    }

    #[test]
    fn fs_angle_examples() {
        let x = st(&[1.0, 0.0]);
        let y = st(&[0.0, 1.0]);
        assert_eq!(fs_angle(&x, &x).unwrap(), 0.0);
        assert!((fs_angle(&x, &y).unwrap() - PI).abs() < 1e-15);
        let d = st(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
        assert!((fs_angle(&x, &d).unwrap() - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn transition_probability_examples() {
        let x = st(&[1.0, 0.0]);
        assert!((transition_probability(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(transition_probability(&x, &st(&[0.0, 1.0])).unwrap(), 0.0);
        let theta = PI / 3.0;
        let y = PureState::new(vec![
            C64::new((theta / 2.0).cos(), 0.0),
            C64::from_polar((theta / 2.0).sin(), 0.7),
        ])
        .unwrap();
        let k = transition_probability(&x, &y).unwrap();
        assert!((k - 0.75).abs() < 1e-12);
        let a = fs_angle(&x, &y).unwrap();
        assert!((k - (a / 2.0).cos().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let x = st(&[1.0, 0.0]);
        let y = st(&[1.0, 0.0, 0.0]);
        assert!(matches!(
            fs_angle(&x, &y),
            Err(Error::DimensionMismatch { .. })
        ));
        let h = HermitianObservable::from_levels(&[0.0, 1.0, 2.0]).unwrap();
        assert!(expectation(&h, &x).is_err());
        assert!(observable_variance(&h, &x).is_err());
    }

    #[test]
    fn state_construction_errors() {
        assert_eq!(
            PureState::from_real(&[1.0]).unwrap_err(),
            Error::DimensionTooSmall(1)
        );
        assert_eq!(
            PureState::from_real(&[0.0, 0.0]).unwrap_err(),
            Error::NotNormalizable
        );
        let s = st(&[3.0, 4.0]);
        assert!((norm_sqr(s.amplitudes()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projector_examples() {
        let p = projector(&st(&[1.0, 0.0]));
        assert_eq!(p.matrix(), &CMatrix::from_real_diagonal(&[1.0, 0.0]));
        let d = projector(&st(&[1.0, 1.0]));
        for z in d.matrix().as_slice() {
            assert!((z - C64::new(0.5, 0.0)).norm() < 1e-15);
        }
        let x = PureState::new(vec![C64::new(0.3, 0.1), C64::new(-0.2, 0.9)]).unwrap();
        let px = projector(&x);
        let py = projector(&x.with_phase(1.234));
        assert!(px.matrix().max_abs_diff(py.matrix()) < 1e-15);
        let sq = px.matrix().matmul(px.matrix()).unwrap();
        assert!(sq.max_abs_diff(px.matrix()) < 1e-10);
        assert!((px.matrix().trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expectation_and_variance_examples() {
        let h = HermitianObservable::from_levels(&[-1.0, 1.0]).unwrap();
        assert_eq!(expectation(&h, &st(&[1.0, 0.0])).unwrap(), -1.0);
        assert_eq!(observable_variance(&h, &st(&[1.0, 0.0])).unwrap(), 0.0);
        // North pole is the +1 level; theta measured from it.
        let at = |theta: f64| st(&[(theta / 2.0).sin(), (theta / 2.0).cos()]);
        assert!(expectation(&h, &at(PI / 2.0)).unwrap().abs() < 1e-15);
        assert!((expectation(&h, &at(PI / 3.0)).unwrap() - 0.5).abs() < 1e-15);
        assert!((observable_variance(&h, &at(PI / 2.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!((observable_variance(&h, &at(PI / 3.0)).unwrap() - 0.75).abs() < 1e-12);
        let id = HermitianObservable::new(CMatrix::identity(3)).unwrap();
        let x = st(&[0.3, -0.4, 0.5]);
        assert!((expectation(&id, &x).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eigendecompose_examples() {
        let s = eigendecompose(&CMatrix::from_real_diagonal(&[1.0, -1.0])).unwrap();
        assert_eq!(s.eigenvalues(), &[-1.0, 1.0]);
        assert_eq!(
            s.eigenvectors(),
            &CMatrix::from_rows(&[
                vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
                vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            ])
            .unwrap()
        );

        let id = eigendecompose(&CMatrix::identity(3)).unwrap();
        assert_eq!(id.eigenvalues(), &[1.0, 1.0, 1.0]);
        let back = CMatrix::from_spectral(id.eigenvalues(), id.eigenvectors()).unwrap();
        assert!(back.max_abs_diff(&CMatrix::identity(3)) < 1e-10);

        let x = CMatrix::from_rows(&[
            vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        ])
        .unwrap();
        let sx = eigendecompose(&x).unwrap();
        assert!((sx.eigenvalues()[0] + 1.0).abs() < 1e-15);
        assert!((sx.eigenvalues()[1] - 1.0).abs() < 1e-15);
        assert_eq!(sx.mean_eigenvalue(), 0.0);
    }

    #[test]
    fn eigendecompose_rejects_non_hermitian() {
        let m = CMatrix::from_rows(&[
            vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
        ])
        .unwrap();
        assert!(matches!(
            eigendecompose(&m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(CMatrix::from_real_diagonal(&[0.5, 0.5])).is_ok());
        assert!(DensityMatrix::new(CMatrix::from_real_diagonal(&[0.6, 0.5])).is_err());
        assert!(DensityMatrix::new(CMatrix::from_real_diagonal(&[1.5, -0.5])).is_err());
        let near = DensityMatrix::nearest(&CMatrix::from_real_diagonal(&[1.5, -0.5])).unwrap();
        assert!(
            near.matrix()
                .max_abs_diff(&CMatrix::from_real_diagonal(&[1.0, 0.0]))
                < 1e-15
        );
    }

    #[test]
    fn canonical_phase_is_optional_normal_form() {
        let x = PureState::new(vec![C64::new(0.0, 0.6), C64::new(0.8, 0.0)]).unwrap();
        let c = x.canonical_phase();
        assert!(c.amplitudes()[0].im.abs() < 1e-15 && c.amplitudes()[0].re > 0.0);
        assert!(c.same_point(&x, 1e-12));
        assert!(x.amplitudes()[0].im > 0.5);
    }
}
