//! Closed forms from the simplex pushforward.
//!
//! Under the Fubini–Study measure the eigen-occupations `(|<y_k|x>|^2)_k` are
//! uniform on the probability simplex, and `H(x) = sum_k p_k E_k`. Averages
//! of `e^{-beta H}` are therefore divided differences of the exponential at
//! the nodes `-beta E_k`, and the law of `H` is a B-spline with knots at the
//! eigenvalues. Divided differences are evaluated as the corner entry of the
//! exponential of a bidiagonal matrix, which stays accurate when nodes are
//! close together.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::phase_space_volume;
use crate::error::{Error, Result};
use crate::linalg::expm_real;

const DEGENERACY_TOL: f64 = 1e-12;
const SERIES_SPREAD: f64 = 1e-8;

fn sorted_checked(levels: &[f64]) -> Result<Vec<f64>> {
    if levels.len() < 2 {
        return Err(Error::DimensionTooSmall(levels.len()));
    }
    if levels.iter().any(|e| !e.is_finite()) {
        return Err(Error::param("levels", "must be finite"));
    }
    let mut e = levels.to_vec();
    e.sort_by(f64::total_cmp);
    let scale = e
        .iter()
        .map(|x| x.abs())
        .fold(e[e.len() - 1] - e[0], f64::max)
        .max(f64::MIN_POSITIVE);
    if let Some(i) = e
        .windows(2)
        .position(|w| w[1] - w[0] <= DEGENERACY_TOL * scale)
    {
        return Err(Error::DegenerateSpectrum(i, i + 1));
    }
    Ok(e)
}

/// `exp[z_0, ..., z_m]` as `(mantissa, shift)` with value `mantissa * e^shift`.
fn exp_divided_difference(z: &[f64]) -> (f64, f64) {
    let m = z.len();
    let shift = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut a = vec![0.0; m * m];
    for i in 0..m {
        a[i * m + i] = z[i] - shift;
        if i + 1 < m {
            a[i * m + i + 1] = 1.0;
        }
    }
    let e = expm_real(m, &a);
    (e[m - 1], shift)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Mean of `exp(-beta sum_k p_k E_k)` over the uniform simplex,
/// `n! sum_k e^{-beta E_k} / prod_{j != k} beta (E_j - E_k)`.
///
/// Refuses degenerate spectra (the Monte Carlo estimators have no such
/// restriction). Returns exactly 1 at `beta = 0`.
pub fn simplex_exp_moment(levels: &[f64], beta: f64) -> Result<f64> {
    super::check_beta(beta)?;
    let e = sorted_checked(levels)?;
    if beta == 0.0 {
        return Ok(1.0);
    }
    let n = e.len() - 1;
    let spread = e[n] - e[0];
    if beta.abs() * spread < SERIES_SPREAD {
        // Second-order expansion about the mean level; the occupations of a
        // uniform simplex have E[p_j p_k] = (1 + delta_jk) / ((n+1)(n+2)).
        let mean = e.iter().sum::<f64>() / (n + 1) as f64;
        let var =
            e.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / ((n + 1) * (n + 2)) as f64;
        return Ok((-beta * mean).exp() * (1.0 + 0.5 * beta * beta * var));
    }
    let z: Vec<f64> = e.iter().map(|x| -beta * x).collect();
    let (mant, shift) = exp_divided_difference(&z);
    Ok(factorial(n) * mant * shift.exp())
}

/// Canonical Gamma-ensemble occupations `E[p_k e^{-beta H}] / E[e^{-beta H}]`.
///
/// Weighting by `p_k` turns the uniform simplex into a Dirichlet law with one
/// doubled parameter, i.e. the same divided difference with node `k`
/// repeated. Levels are returned in ascending order.
pub fn simplex_weighted_occupations(levels: &[f64], beta: f64) -> Result<Vec<f64>> {
    super::check_beta(beta)?;
    let e = sorted_checked(levels)?;
    let n1 = e.len();
    if beta == 0.0 {
        return Ok(vec![1.0 / n1 as f64; n1]);
    }
    let z: Vec<f64> = e.iter().map(|x| -beta * x).collect();
    let (base, shift) = exp_divided_difference(&z);
    let mut out: Vec<f64> = (0..n1)
        .map(|k| {
            let mut zk = z.clone();
            zk.insert(k + 1, z[k]);
            let (num, s2) = exp_divided_difference(&zk);
            num / base * (s2 - shift).exp()
        })
        .collect();
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|p| *p /= total);
    Ok(out)
}

/// Closed-form state density `Omega(E) = V_n * n sum_k (E_k - E)_+^{n-1} /
/// prod_{j != k} (E_k - E_j)`.
pub fn simplex_state_density(levels: &[f64], energy: f64) -> Result<f64> {
    let e = sorted_checked(levels)?;
    let n = e.len() - 1;
    if energy <= e[0] || energy >= e[n] {
        return Ok(0.0);
    }
    let mut acc = 0.0;
    for k in 0..=n {
        let d = e[k] - energy;
        if d <= 0.0 {
            continue;
        }
        let denom: f64 = (0..=n).filter(|&j| j != k).map(|j| e[k] - e[j]).product();
        acc += d.powi(n as i32 - 1) / denom;
    }
    Ok(phase_space_volume(n + 1) * n as f64 * acc.max(0.0))
}

/// Closed-form `W(E)`, the volume where `H(x) <= E`.
pub fn simplex_volume_below(levels: &[f64], energy: f64) -> Result<f64> {
    let e = sorted_checked(levels)?;
    let n = e.len() - 1;
    let v = phase_space_volume(n + 1);
    if energy <= e[0] {
        return Ok(0.0);
    }
    if energy >= e[n] {
        return Ok(v);
    }
    let mut tail = 0.0;
    for k in 0..=n {
        let d = e[k] - energy;
        if d <= 0.0 {
            continue;
        }
        let denom: f64 = (0..=n).filter(|&j| j != k).map(|j| e[k] - e[j]).product();
        tail += d.powi(n as i32) / denom;
    }
    Ok(v * (1.0 - tail).clamp(0.0, 1.0))
}
