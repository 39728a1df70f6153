use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::canonical::partition_multi;
use super::kernel::state_density_multi;
use super::{phase_space_volume, simplex_exp_moment, simplex_state_density, McParams};
use crate::error::{Error, Result};
use crate::geometry::HermitianObservable;

/// Where `ln Z` and `Omega` come from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThermoSource {
    /// Simplex closed forms; needs a nondegenerate spectrum.
    ClosedForm,
    /// Monte Carlo with one sample stream shared by every stencil point.
    MonteCarlo(McParams),
}

/// One row of the thermodynamic table (units with `k = 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoRow {
    pub beta: f64,
    pub partition: f64,
    /// `-d ln Z / d beta`
    pub energy: f64,
    /// `dE/dT = beta^2 d^2 ln Z / d beta^2`
    pub heat_capacity: f64,
    /// `ln(Omega(E) delta_e)` at `E = energy`.
    pub entropy: f64,
    /// `dS/dE` at `E = energy`.
    pub beta_check: f64,
    pub delta_e: f64,
}

const STENCIL: [f64; 5] = [-2.0, -1.0, 0.0, 1.0, 2.0];
const REL_STEP: f64 = 1e-2;

fn first(f: &[f64; 5], d: f64) -> f64 {
    (f[0] - 8.0 * f[1] + 8.0 * f[3] - f[4]) / (12.0 * d)
}

fn second(f: &[f64; 5], d: f64) -> f64 {
    (-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / (12.0 * d * d)
}

/// Canonical Gamma-ensemble thermodynamics on a grid of inverse temperatures.
///
/// Derivatives of `ln Z` use five-point stencils with step `0.01 beta` about
/// each grid point. The entropy `S(E) = ln(Omega(E) delta_e)` depends on the
/// arbitrary width `delta_e` (the shell width of the Monte Carlo parameters,
/// or `0.01 (E_max - E_min)` for closed forms); its derivative does not.
pub fn thermodynamics(
    h: &HermitianObservable,
    beta_grid: &[f64],
    source: ThermoSource,
) -> Result<Vec<ThermoRow>> {
    if beta_grid.is_empty() {
        return Err(Error::param("beta_grid", "must not be empty"));
    }
    if beta_grid.iter().any(|b| !(*b > 0.0) || !b.is_finite()) {
        return Err(Error::param(
            "beta_grid",
            "values must be positive and finite",
        ));
    }
    for w in beta_grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::param("beta_grid", "must be strictly increasing"));
        }
        if w[1] - w[0] > 0.1 * w[0] {
            return Err(Error::param(
                "beta_grid",
                "spacing exceeds 0.1 beta; refine the grid",
            ));
        }
    }
    let spec = h.spectrum();
    let levels = spec.eigenvalues();
    let delta_e = match source {
        ThermoSource::ClosedForm => 0.01 * spec.range(),
        ThermoSource::MonteCarlo(mc) => mc.resolved_shell_width(spec),
    };
    let v = phase_space_volume(h.dim());
    let mut rows = Vec::with_capacity(beta_grid.len());
    for &beta in beta_grid {
        let d = REL_STEP * beta;
        let betas = STENCIL.map(|s| beta + s * d);
        let ln_z: [f64; 5] = match source {
            ThermoSource::ClosedForm => {
                let mut out = [0.0; 5];
                for (o, &b) in out.iter_mut().zip(&betas) {
                    *o = (v * simplex_exp_moment(levels, b)?).ln();
                }
                out
            }
            ThermoSource::MonteCarlo(mc) => {
                let z = partition_multi(h, &betas, &mc)?;
                core::array::from_fn(|i| z[i].value.ln())
            }
        };
        let energy = -first(&ln_z, d);
        let heat_capacity = beta * beta * second(&ln_z, d);

        // Entropy slope from Omega one small step either side of E.
        let de = match source {
            ThermoSource::ClosedForm => 1e-4 * spec.range(),
            ThermoSource::MonteCarlo(mc) => mc.resolved_bandwidth(spec),
        };
        let at = [energy - de, energy, energy + de];
        let omega: [f64; 3] = match source {
            ThermoSource::ClosedForm => {
                let mut out = [0.0; 3];
                for (o, &e) in out.iter_mut().zip(&at) {
                    *o = simplex_state_density(levels, e)?;
                }
                out
            }
            ThermoSource::MonteCarlo(mc) => {
                let s = state_density_multi(h, &at, &mc)?;
                core::array::from_fn(|i| s[i].value)
            }
        };
        let entropy = (omega[1] * delta_e).ln();
        let beta_check = (omega[2].ln() - omega[0].ln()) / (2.0 * de);
        rows.push(ThermoRow {
            beta,
            partition: ln_z[2].exp(),
            energy,
            heat_capacity,
            entropy,
            beta_check,
            delta_e,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn spin_half_closed_form_rows() {
        let h = HermitianObservable::from_levels(&[-1.0, 1.0]).unwrap();
        let rows = thermodynamics(&h, &[1.0], ThermoSource::ClosedForm).unwrap();
        let r = rows[0];
        assert!((r.energy - (1.0 - 1.0 / 1.0f64.tanh())).abs() < 1e-9);
        assert!((r.energy + 0.313035).abs() < 5e-7);
        assert!((r.partition - 4.0 * PI * 1.0f64.sinh()).abs() < 1e-12);
        let x2 = 1.0 / 1.0f64.sinh().powi(2);
        assert!((r.heat_capacity - (1.0 - x2)).abs() < 1e-8);
        // Flat state density: the Boltzmann-entropy slope is zero here.
        assert!(r.beta_check.abs() < 1e-9);
        assert!((r.entropy - (2.0 * PI * 0.02).ln()).abs() < 1e-12);
    }

    #[test]
    fn cold_heat_capacity_stays_at_one() {
        let h = HermitianObservable::from_levels(&[-1.0, 1.0]).unwrap();
        let r = thermodynamics(&h, &[20.0], ThermoSource::ClosedForm).unwrap()[0];
        assert!((r.heat_capacity - 1.0).abs() < 1e-6, "{}", r.heat_capacity);
    }

    #[test]
    fn three_level_beta_check_from_triangle() {
        // Omega is linear below the middle level, so dS/dE = 1/(E - E_min).
        let h = HermitianObservable::from_levels(&[0.0, 1.0, 2.0]).unwrap();
        let r = thermodynamics(&h, &[2.0], ThermoSource::ClosedForm).unwrap()[0];
        assert!(r.energy < 1.0);
        assert!((r.beta_check - 1.0 / r.energy).abs() < 1e-6);
    }

    #[test]
    fn coarse_grid_is_refused() {
        let h = HermitianObservable::from_levels(&[-1.0, 1.0]).unwrap();
        assert!(thermodynamics(&h, &[1.0, 2.0], ThermoSource::ClosedForm).is_err());
        assert!(thermodynamics(&h, &[1.0, 1.05, 1.1], ThermoSource::ClosedForm).is_ok());
        assert!(thermodynamics(&h, &[-1.0], ThermoSource::ClosedForm).is_err());
    }

    #[test]
    fn monte_carlo_energy_tracks_closed_form() {
        let h = HermitianObservable::from_levels(&[-1.0, 1.0]).unwrap();
        let mc = McParams::new(200_000, 31);
        let r = thermodynamics(&h, &[1.0], ThermoSource::MonteCarlo(mc)).unwrap()[0];
        assert!((r.energy + 0.313035).abs() < 0.01, "{}", r.energy);
    }
}
