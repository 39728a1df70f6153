//! CSV and JSON writers. Everything is deterministic: no timestamps, no
//! hash-ordered maps, `\n` line endings.

use std::fs;
use std::io::Write;
use std::path::Path;

use qphase_core::ensembles::{EnergyDensity, EnsembleEstimate};
use qphase_core::{CMatrix, C64};
use serde::Serialize;

use crate::error::{CliError, Result};

/// Nine significant digits in the style of C's `%.9g`.
pub fn g9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    // Round first, then read the decimal exponent of the rounded value.
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (8 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// CSV table with a header row.
pub struct Csv {
    buf: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv {
            buf: format!("{}\n", header.join(",")),
            columns: header.len(),
        }
    }

    pub fn row(&mut self, values: &[f64]) {
        debug_assert_eq!(values.len(), self.columns);
        let cells: Vec<String> = values.iter().map(|&v| g9(v)).collect();
        self.buf.push_str(&cells.join(","));
        self.buf.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.buf
    }
}

pub fn energy_density_csv(d: &EnergyDensity) -> Csv {
    let mut csv = Csv::new(&["energy", "density", "std_error"]);
    for (i, (&e, &p)) in d.grid().iter().zip(d.density()).enumerate() {
        let se = d.std_error().map_or(0.0, |s| s[i]);
        csv.row(&[e, p, se]);
    }
    csv
}

/// Writes `text` to `path`, or to standard output when `path` is `None`.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

/// Square complex matrix as a row-major list of `[re, im]` pairs.
#[derive(Debug, Clone, Serialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        MatrixJson {
            dim: m.dim(),
            entries: m.as_slice().iter().map(|z: &C64| [z.re, z.im]).collect(),
        }
    }
}

/// An estimate with its error bar and the stream that produced it.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateJson<T> {
    pub value: T,
    pub std_error: T,
    pub samples: usize,
    pub seed: u64,
    pub chunks: usize,
}

impl From<&EnsembleEstimate<f64>> for EstimateJson<f64> {
    fn from(e: &EnsembleEstimate<f64>) -> Self {
        EstimateJson {
            value: e.value,
            std_error: e.std_error,
            samples: e.samples_used,
            seed: e.seed,
            chunks: e.chunks,
        }
    }
}

impl From<&EnsembleEstimate<Vec<f64>>> for EstimateJson<Vec<f64>> {
    fn from(e: &EnsembleEstimate<Vec<f64>>) -> Self {
        EstimateJson {
            value: e.value.clone(),
            std_error: e.std_error.clone(),
            samples: e.samples_used,
            seed: e.seed,
            chunks: e.chunks,
        }
    }
}

impl From<&EnsembleEstimate<CMatrix>> for EstimateJson<MatrixJson> {
    fn from(e: &EnsembleEstimate<CMatrix>) -> Self {
        EstimateJson {
            value: (&e.value).into(),
            std_error: (&e.std_error).into(),
            samples: e.samples_used,
            seed: e.seed,
            chunks: e.chunks,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(g9(-0.313035106), "-0.313035106");
        assert_eq!(g9(-1.0), "-1");
        assert_eq!(g9(1.0 / 3.0), "0.333333333");
        assert_eq!(g9(14.768013745765), "14.7680137");
        assert_eq!(g9(123456789.4), "123456789");
        assert_eq!(g9(1234567894.0), "1.23456789e+09");
        assert_eq!(g9(0.0001), "0.0001");
        assert_eq!(g9(0.00001234), "1.234e-05");
        assert_eq!(g9(9.9999999999), "10");
        assert_eq!(g9(0.0), "0");
        assert_eq!(g9(2e-300), "2e-300");
        assert_eq!(g9(f64::NAN), "nan");
    }

    #[test]
    fn csv_layout() {
        let mut c = Csv::new(&["a", "b"]);
        c.row(&[1.0, 0.5]);
        assert_eq!(c.as_str(), "a,b\n1,0.5\n");
    }
}
