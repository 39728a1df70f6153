//! Closed forms for a two-level system (spin one-half in a field).
//!
//! Phase space is the Bloch sphere. The excited level `E_1` sits at the north
//! pole `P`, the ground level `E_0` at the antipode
//! `P_bar^a = eps^{ab} conj(P_b)`, and `h = (E_1 - E_0) / 2`. Populations are
//! always reported as `[ground, excited]`.

use alloc::vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::{projector, wrap_angle, DensityMatrix, HermitianObservable, PureState};
use crate::linalg::{CMatrix, C64};

/// Below this `|beta (E_1 - E_0)|` the closed forms switch to their series.
const SERIES_CUTOFF: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct TwoLevelSystem {
    e0: f64,
    e1: f64,
    pole: PureState,
    antipole: PureState,
}

/// `eps^{ab} conj(z_b)` for the antisymmetric unit `eps^{01} = 1`.
pub fn spinor_antipode(p: &PureState) -> Result<PureState> {
    if p.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: p.dim(),
        });
    }
    let a = p.amplitudes();
    PureState::new(vec![a[1].conj(), -a[0].conj()])
}

impl TwoLevelSystem {
    pub fn new(e0: f64, e1: f64, pole: PureState) -> Result<Self> {
        if !(e1 >= e0) || !e0.is_finite() || !e1.is_finite() {
            return Err(Error::param("e1", "levels must be finite with e1 >= e0"));
        }
        let antipole = spinor_antipode(&pole)?;
        Ok(TwoLevelSystem {
            e0,
            e1,
            pole,
            antipole,
        })
    }

    /// Levels in the standard basis, ground first: pole `(0, 1)`, antipode
    /// `(1, 0)`, so the Hamiltonian is `diag(e0, e1)`.
    pub fn standard(e0: f64, e1: f64) -> Result<Self> {
        Self::new(e0, e1, PureState::basis(2, 1)?)
    }

    /// Spin one-half with levels `-h, h` in the standard basis.
    pub fn spin(h: f64) -> Result<Self> {
        if !(h >= 0.0) {
            return Err(Error::param("h", "must be non-negative"));
        }
        Self::standard(-h, h)
    }

    pub fn e0(&self) -> f64 {
        self.e0
    }

    pub fn e1(&self) -> f64 {
        self.e1
    }

    /// Half the level splitting.
    pub fn h(&self) -> f64 {
        0.5 * (self.e1 - self.e0)
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.e0 + self.e1)
    }

    pub fn pole(&self) -> &PureState {
        &self.pole
    }

    pub fn antipole(&self) -> &PureState {
        &self.antipole
    }

    /// `midpoint * I + h (2 Pi_P - I)`
    pub fn hamiltonian(&self) -> Result<HermitianObservable> {
        let core = spin_hamiltonian(self.h(), &self.pole)?;
        core.shifted(self.midpoint())
    }

    /// State at Bloch coordinates, colatitude measured from the pole.
    pub fn state_at(&self, coords: BlochCoords) -> PureState {
        let (s, c) = (coords.theta / 2.0).sin_cos();
        let p = self.pole.amplitudes();
        let q = self.antipole.amplitudes();
        let ph = C64::from_polar(s, coords.phi);
        PureState::from_unit(vec![p[0] * c + q[0] * ph, p[1] * c + q[1] * ph])
    }

    pub fn coords_of(&self, x: &PureState) -> Result<BlochCoords> {
        if x.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: x.dim(),
            });
        }
        let a = crate::linalg::inner(self.pole.amplitudes(), x.amplitudes());
        let b = crate::linalg::inner(self.antipole.amplitudes(), x.amplitudes());
        let theta = 2.0 * b.norm().atan2(a.norm());
        let phi = if a.norm() == 0.0 || b.norm() == 0.0 {
            0.0
        } else {
            wrap_angle(b.arg() - a.arg())
        };
        BlochCoords::new(theta, phi)
    }

    /// Trajectory through `(theta, phi)` at `t = 0`:
    /// `cos(theta/2) e^{i(h t + phi)} P + sin(theta/2) e^{-i(h t + phi)} P_bar`.
    ///
    /// Here `phi` is the phase parameter of the solution, so the azimuth of the
    /// state is `-2 (h t + phi)`; the latitude circle is swept at angular
    /// velocity `2h`.
    pub fn trajectory_point(&self, theta: f64, phi: f64, t: f64) -> PureState {
        let h = self.h();
        let w = h * t + phi;
        let p = self.pole.amplitudes();
        let q = self.antipole.amplitudes();
        let a = C64::from_polar((theta / 2.0).cos(), w);
        let b = C64::from_polar((theta / 2.0).sin(), -w);
        PureState::from_unit(vec![p[0] * a + q[0] * b, p[1] * a + q[1] * b])
    }

    /// Canonical phase-space (Gamma) ensemble in closed form.
    pub fn gamma_closed_forms(&self, beta: f64) -> ClosedForms {
        let h = self.h();
        let mid = self.midpoint();
        let x = beta * h;
        let (excited, ground) = if h == 0.0 {
            (0.5, 0.5)
        } else {
            let excited = gamma_excited_population(2.0 * x);
            (excited, 1.0 - excited)
        };
        // Z = 4 pi e^{-beta mid} sinh(beta h) / (beta h)
        let partition = 4.0 * PI * (-beta * mid).exp() * sinhc(x);
        let energy = mid + h * langevin_shifted(x);
        let heat_capacity = gamma_heat_capacity(x);
        ClosedForms {
            partition,
            energy,
            heat_capacity,
            populations: [ground, excited],
            density: self.mixture(ground, excited),
        }
    }

    /// Conventional Gibbs state over the two eigenstates in closed form.
    pub fn conventional_closed_forms(&self, beta: f64) -> ClosedForms {
        let h = self.h();
        let mid = self.midpoint();
        let x = beta * h;
        // Weights e^{+x}, e^{-x} relative to the midpoint.
        let excited = 0.5 * (1.0 - x.tanh());
        let ground = 0.5 * (1.0 + x.tanh());
        let partition = 2.0 * (-beta * mid).exp() * x.cosh();
        let energy = mid - h * x.tanh();
        let c = x.cosh();
        let heat_capacity = if c.is_finite() { x * x / (c * c) } else { 0.0 };
        ClosedForms {
            partition,
            energy,
            heat_capacity,
            populations: [ground, excited],
            density: self.mixture(ground, excited),
        }
    }

    /// Canonical energy density on `[E_0, E_1]`.
    pub fn gamma_energy_pdf(&self, beta: f64, e: f64) -> f64 {
        let h = self.h();
        spin_energy_pdf(h, beta, e - self.midpoint())
    }

    fn mixture(&self, ground: f64, excited: f64) -> DensityMatrix {
        let pg = projector(&self.antipole);
        let pe = projector(&self.pole);
        let m = pg
            .matrix()
            .scale(ground)
            .add(&pe.matrix().scale(excited))
            .expect("both 2x2");
        DensityMatrix::from_trusted(m.hermitized())
    }
}

/// Bloch-sphere coordinates: colatitude from the pole and azimuth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochCoords {
    pub theta: f64,
    pub phi: f64,
}

impl BlochCoords {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::param("theta", "must lie in [0, pi]"));
        }
        if !phi.is_finite() {
            return Err(Error::param("phi", "must be finite"));
        }
        Ok(BlochCoords {
            theta,
            phi: wrap_angle(phi),
        })
    }
}

/// Results shared by the Gamma-ensemble and conventional closed forms, in
/// units with `k = 1`.
#[derive(Debug, Clone)]
pub struct ClosedForms {
    pub partition: f64,
    pub energy: f64,
    pub heat_capacity: f64,
    /// `[ground, excited]`
    pub populations: [f64; 2],
    pub density: DensityMatrix,
}

/// `h (2 Pi_P - I)`: eigenvalues exactly `+h` (on `pole`) and `-h`.
pub fn spin_hamiltonian(h: f64, pole: &PureState) -> Result<HermitianObservable> {
    if pole.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: pole.dim(),
        });
    }
    let p = projector(pole);
    let m = p
        .matrix()
        .scale(2.0 * h)
        .sub(&CMatrix::identity(2).scale(h))?;
    HermitianObservable::new(m)
}

/// Evolution of a spin in the standard basis, levels `-h, h`.
pub fn bloch_trajectory(theta: f64, phi: f64, h: f64, t: f64) -> Result<PureState> {
    BlochCoords::new(theta, phi)?;
    Ok(TwoLevelSystem::spin(h.abs())?.trajectory_point(theta, phi, t))
}

pub fn spin_gamma_closed_forms(h: f64, beta: f64) -> Result<ClosedForms> {
    Ok(TwoLevelSystem::spin(h)?.gamma_closed_forms(beta))
}

pub fn spin_conventional_closed_forms(h: f64, beta: f64) -> Result<ClosedForms> {
    Ok(TwoLevelSystem::spin(h)?.conventional_closed_forms(beta))
}

/// Canonical energy density of a spin with levels `-h, h`:
/// `beta e^{-beta E} / (2 sinh(beta h))` on `[-h, h]`, zero outside.
pub fn spin_energy_pdf(h: f64, beta: f64, e: f64) -> f64 {
    if !(h > 0.0) || e.abs() > h {
        return 0.0;
    }
    let x = beta * h;
    if x.abs() < SERIES_CUTOFF {
        return (-beta * e).exp() / (2.0 * h * sinhc(x));
    }
    if beta > 0.0 {
        // e^{-beta(E + h)} / (1 - e^{-2 beta h}) keeps large beta finite.
        beta * (-beta * (e + h)).exp() / -(-2.0 * x).exp_m1()
    } else {
        beta * (-beta * (e - h)).exp() / (2.0 * x).exp_m1()
    }
}

/// Excited population of the Gamma ensemble, `1/u - 1/(e^u - 1)` with
/// `u = beta (E_1 - E_0)`.
fn gamma_excited_population(u: f64) -> f64 {
    if u.abs() < SERIES_CUTOFF {
        let u2 = u * u;
        0.5 - u / 12.0 + u * u2 / 720.0 - u * u2 * u2 / 30240.0
    } else if u > 700.0 {
        1.0 / u
    } else {
        1.0 / u - 1.0 / u.exp_m1()
    }
}

/// `sinh(x) / x`
fn sinhc(x: f64) -> f64 {
    if x.abs() < SERIES_CUTOFF {
        1.0 + x * x / 6.0
    } else {
        x.sinh() / x
    }
}

/// `1/x - coth(x)`, the Gamma-ensemble energy in units of `h`.
fn langevin_shifted(x: f64) -> f64 {
    if x.abs() < SERIES_CUTOFF {
        -x / 3.0 + x * x * x / 45.0
    } else {
        1.0 / x - 1.0 / x.tanh()
    }
}

/// `1 - x^2 / sinh^2(x)`
fn gamma_heat_capacity(x: f64) -> f64 {
    if x.abs() < SERIES_CUTOFF {
        let x2 = x * x;
        x2 / 3.0 - x2 * x2 / 15.0
    } else {
        let s = x.sinh();
        if s.is_finite() {
            1.0 - (x / s) * (x / s)
        } else {
            1.0
        }
    }
}
