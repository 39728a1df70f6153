use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{trapezoid, EnergyDensity};
use crate::error::{Error, Result};

/// Joint state density of two weakly coupled systems at a fixed total energy.
#[derive(Debug, Clone)]
pub struct BathComposition {
    /// `Omega_{1.2}(E_total) = int Omega_1(E_total - e) Omega_2(e) de`.
    pub omega_total: f64,
    /// Conditional density of the second system's energy, on its own grid.
    pub conditional: EnergyDensity,
}

fn common_spacing(a: &EnergyDensity, b: &EnergyDensity) -> Result<f64> {
    let ha = a
        .uniform_spacing()
        .ok_or(Error::IncompatibleGrids("first grid is not evenly spaced"))?;
    let hb = b
        .uniform_spacing()
        .ok_or(Error::IncompatibleGrids("second grid is not evenly spaced"))?;
    if (ha - hb).abs() > 1e-9 * ha.max(hb) {
        return Err(Error::IncompatibleGrids("grid spacings differ"));
    }
    Ok(ha)
}

/// Trapezoidal convolution of two state densities tabulated with the same
/// spacing. The result lives on `g1[0] + g2[0] + k h`.
pub fn convolve_state_densities(
    omega1: &EnergyDensity,
    omega2: &EnergyDensity,
) -> Result<EnergyDensity> {
    let h = common_spacing(omega1, omega2)?;
    let (a, b) = (omega1.density(), omega2.density());
    let (n1, n2) = (a.len(), b.len());
    let len = n1 + n2 - 1;
    let start = omega1.grid()[0] + omega2.grid()[0];
    let mut grid = Vec::with_capacity(len);
    let mut out = Vec::with_capacity(len);
    for m in 0..len {
        grid.push(start + h * m as f64);
        let j0 = m.saturating_sub(n1 - 1);
        let j1 = m.min(n2 - 1);
        if j1 == j0 {
            out.push(0.0);
            continue;
        }
        let f = |j: usize| a[m - j] * b[j];
        let inner: f64 = (j0..=j1).map(f).sum();
        out.push(h * (inner - 0.5 * (f(j0) + f(j1))));
    }
    EnergyDensity::new(grid, out)
}

/// `Omega_{1.2}(E_total)` and `p(E_2) = Omega_1(E_total - E_2) Omega_2(E_2) /
/// Omega_{1.2}(E_total)` on the second system's grid. `Omega_1` is read by
/// linear interpolation.
pub fn bath_composition(
    omega1: &EnergyDensity,
    omega2: &EnergyDensity,
    e_total: f64,
) -> Result<BathComposition> {
    common_spacing(omega1, omega2)?;
    if !e_total.is_finite() {
        return Err(Error::param("e_total", "must be finite"));
    }
    let g2 = omega2.grid();
    let integrand: Vec<f64> = g2
        .iter()
        .zip(omega2.density())
        .map(|(&e2, &o2)| omega1.at(e_total - e2) * o2)
        .collect();
    let total = trapezoid(g2, &integrand);
    if !(total > 0.0) {
        return Err(Error::param(
            "e_total",
            "joint state density vanishes at this total energy",
        ));
    }
    let conditional =
        EnergyDensity::new(g2.to_vec(), integrand.iter().map(|v| v / total).collect())?;
    Ok(BathComposition {
        omega_total: total,
        conditional,
    })
}

/// `d ln Omega / dE` at `energy` by a central difference of one grid step.
pub fn log_derivative(omega: &EnergyDensity, energy: f64) -> Result<f64> {
    let g = omega.grid();
    let h = (g[g.len() - 1] - g[0]) / (g.len() - 1) as f64;
    let (lo, hi) = (omega.at(energy - h), omega.at(energy + h));
    if !(lo > 0.0 && hi > 0.0) {
        return Err(Error::param(
            "energy",
            "state density must be positive one step either side",
        ));
    }
    Ok((hi.ln() - lo.ln()) / (2.0 * h))
}
