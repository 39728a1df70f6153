//! Plain-text Hamiltonian files.
//!
//! Matrix form: the dimension on the first line, then one line per row with
//! `re,im` entries separated by whitespace:
//!
//! ```text
//! 2
//! 1,0 0,0.5
//! 0,-0.5 -1,0
//! ```
//!
//! Spectral form: the word `spectrum`, then the eigenvalues on one line. The
//! eigenbasis is the standard basis.
//!
//! Blank trailing lines are ignored; anything else out of place is an error
//! naming its line.

use std::fs;
use std::path::Path;

use qphase_core::{CMatrix, HermitianObservable, C64};

use crate::error::{CliError, Result};

pub fn read_hamiltonian(path: &Path) -> Result<HermitianObservable> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_hamiltonian(&text, &path.display().to_string())
}

pub fn parse_hamiltonian(text: &str, origin: &str) -> Result<HermitianObservable> {
    let err = |line: usize, message: String| CliError::Parse {
        path: origin.to_string(),
        line,
        message,
    };
    let lines: Vec<&str> = text.split('\n').map(|l| l.trim_end_matches('\r')).collect();
    let last = lines
        .iter()
        .rposition(|l| !l.trim().is_empty())
        .ok_or_else(|| err(1, "file is empty".into()))?;
    let body = &lines[..=last];
    let head = body[0].trim();

    if head == "spectrum" {
        if body.len() != 2 {
            return Err(err(
                body.len().min(3),
                "spectral form takes exactly one line of eigenvalues".into(),
            ));
        }
        let levels = body[1]
            .split_whitespace()
            .map(|tok| parse_real(tok).map_err(|m| err(2, m)))
            .collect::<Result<Vec<f64>>>()?;
        if levels.len() < 2 {
            return Err(err(2, "need at least two eigenvalues".into()));
        }
        return HermitianObservable::from_levels(&levels).map_err(|e| err(2, e.to_string()));
    }

    let dim: usize = head.parse().map_err(|_| {
        err(
            1,
            format!("expected a dimension or `spectrum`, found `{head}`"),
        )
    })?;
    if dim < 2 {
        return Err(err(1, format!("dimension must be at least 2, got {dim}")));
    }
    if body.len() != dim + 1 {
        return Err(err(
            body.len().min(dim + 2),
            format!("expected {dim} matrix rows, found {}", body.len() - 1),
        ));
    }
    let mut rows = Vec::with_capacity(dim);
    for (i, line) in body[1..].iter().enumerate() {
        let lineno = i + 2;
        let row = line
            .split_whitespace()
            .map(|tok| parse_complex(tok).map_err(|m| err(lineno, m)))
            .collect::<Result<Vec<C64>>>()?;
        if row.len() != dim {
            return Err(err(
                lineno,
                format!("expected {dim} entries, found {}", row.len()),
            ));
        }
        rows.push(row);
    }
    let m = CMatrix::from_rows(&rows).map_err(|e| err(2, e.to_string()))?;
    HermitianObservable::new(m).map_err(|e| err(2, format!("matrix rejected: {e}")))
}

fn parse_real(tok: &str) -> std::result::Result<f64, String> {
    let v: f64 = tok
        .parse()
        .map_err(|_| format!("`{tok}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("`{tok}` is not finite"));
    }
    Ok(v)
}

fn parse_complex(tok: &str) -> std::result::Result<C64, String> {
    let (re, im) = tok
        .split_once(',')
        .ok_or_else(|| format!("`{tok}` is not a `re,im` pair"))?;
    Ok(C64::new(parse_real(re)?, parse_real(im)?))
}

/// Parses a `--levels` list such as `-1,1` or `0, 1, 2`.
pub fn parse_levels(list: &str) -> Result<HermitianObservable> {
    let levels = list
        .split(',')
        .map(|t| parse_real(t.trim()).map_err(|m| CliError::Usage(format!("--levels: {m}"))))
        .collect::<Result<Vec<f64>>>()?;
    if levels.len() < 2 {
        return Err(CliError::Usage("--levels needs at least two values".into()));
    }
    Ok(HermitianObservable::from_levels(&levels)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_of(e: CliError) -> usize {
        match e {
            CliError::Parse { line, .. } => line,
            other => panic!("not a parse error: {other}"),
        }
    }

    #[test]
    fn matrix_form() {
        let h = parse_hamiltonian("2\n1,0 0,0.5\n0,-0.5 -1,0\n\n", "t").unwrap();
        assert_eq!(h.dim(), 2);
        assert!((h.matrix()[(0, 1)].im - 0.5).abs() < 1e-15);
        let s = 1.25f64.sqrt();
        assert!((h.spectrum().eigenvalues()[1] - s).abs() < 1e-12);
    }

    #[test]
    fn spectral_form() {
        let h = parse_hamiltonian("spectrum\n-1 1\n", "t").unwrap();
        assert_eq!(h.spectrum().eigenvalues(), &[-1.0, 1.0]);
    }

    #[test]
    fn diagnostics_name_the_line() {
        assert_eq!(
            line_of(parse_hamiltonian("2\n1,0 0,0\n0,0 x,0\n", "t").unwrap_err()),
            3
        );
        assert_eq!(
            line_of(parse_hamiltonian("2\n1,0 0,0\n0,0\n", "t").unwrap_err()),
            3
        );
        assert_eq!(line_of(parse_hamiltonian("two\n", "t").unwrap_err()), 1);
        assert_eq!(
            line_of(parse_hamiltonian("spectrum\n1 nan\n", "t").unwrap_err()),
            2
        );
        assert_eq!(line_of(parse_hamiltonian("", "t").unwrap_err()), 1);
        // Not Hermitian.
        assert!(parse_hamiltonian("2\n1,0 1,0\n0,0 1,0\n", "t").is_err());
        let msg = parse_hamiltonian("2\n1,0 0,0\n", "h.txt")
            .unwrap_err()
            .to_string();
        assert!(msg.starts_with("h.txt:"), "{msg}");
    }

    #[test]
    fn level_lists() {
        assert_eq!(parse_levels("-1, 1").unwrap().dim(), 2);
        assert!(parse_levels("1").is_err());
        assert!(parse_levels("1,a").is_err());
    }
}
