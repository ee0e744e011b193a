//! JSON matrix files: {"rows": N, "cols": M, "re": [[...]], "im": [[...]]}.
//!
//! Entries are JSON numbers or strings holding a decimal ("0.25") or a
//! rational ("-1/3").

use plyap_core::{Complex64, ComplexMatrix};
use serde::{Deserialize, Serialize};

#[derive(Deserialize)]
#[serde(untagged)]
enum Entry {
    Number(f64),
    Text(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    rows: usize,
    cols: usize,
    re: Vec<Vec<Entry>>,
    #[serde(default)]
    im: Option<Vec<Vec<Entry>>>,
}

/// Serialized form used in reports.
#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        let part = |f: fn(Complex64) -> f64| {
            (0..m.rows()).map(|i| (0..m.cols()).map(|j| f(m.as_dmatrix()[(i, j)])).collect()).collect()
        };
        Self { rows: m.rows(), cols: m.cols(), re: part(|z| z.re), im: part(|z| z.im) }
    }
}

fn parse_number(text: &str) -> Result<f64, String> {
    let text = text.trim();
    let value = match text.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| format!("bad numerator in {text:?}"))?;
            let q: f64 = q.trim().parse().map_err(|_| format!("bad denominator in {text:?}"))?;
            if q == 0.0 {
                return Err(format!("zero denominator in {text:?}"));
            }
            p / q
        }
        None => text.parse().map_err(|_| format!("{text:?} is not a number"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("{text:?} is not finite"))
    }
}

fn grid(part: &str, entries: &[Vec<Entry>], rows: usize, cols: usize) -> Result<Vec<f64>, String> {
    if entries.len() != rows {
        return Err(format!("\"{part}\" has {} rows, expected {rows}", entries.len()));
    }
    let mut out = Vec::with_capacity(rows * cols);
    for (i, row) in entries.iter().enumerate() {
        if row.len() != cols {
            return Err(format!("\"{part}\" row {i} has {} entries, expected {cols}", row.len()));
        }
        for (j, e) in row.iter().enumerate() {
            let v = match e {
                Entry::Number(x) => *x,
                Entry::Text(s) => parse_number(s).map_err(|e| format!("\"{part}\"[{i}][{j}]: {e}"))?,
            };
            out.push(v);
        }
    }
    Ok(out)
}

pub fn parse_matrix(json: &str) -> Result<ComplexMatrix, String> {
    let file: MatrixFile = serde_json::from_str(json).map_err(|e| e.to_string())?;
    if file.rows == 0 || file.cols == 0 {
        return Err("matrix dimensions must be positive".into());
    }
    let re = grid("re", &file.re, file.rows, file.cols)?;
    let im = match &file.im {
        Some(im) => grid("im", im, file.rows, file.cols)?,
        None => vec![0.0; re.len()],
    };
    let entries: Vec<Complex64> = re.iter().zip(&im).map(|(&r, &i)| Complex64::new(r, i)).collect();
    ComplexMatrix::from_row_slice(file.rows, file.cols, &entries).map_err(|e| e.to_string())
}

/// A vector is a matrix file with a single row or a single column.
pub fn parse_vector(json: &str) -> Result<Vec<Complex64>, String> {
    let m = parse_matrix(json)?;
    if m.cols() == 1 {
        Ok(m.column_vec(0))
    } else if m.rows() == 1 {
        Ok(m.transpose().column_vec(0))
    } else {
        Err(format!("expected a vector, got a {}x{} matrix", m.rows(), m.cols()))
    }
}
