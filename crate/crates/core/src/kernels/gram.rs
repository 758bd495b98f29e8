use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use super::KernelError;
use crate::io::DataError;

/// Symmetric matrix of pairwise kernel values over a list of example ids.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    values: DMatrix<f64>,
}

impl GramMatrix {
    /// Wraps a matrix, rejecting it unless it is square, sized to `ids`, and exactly symmetric.
    pub fn new(ids: Vec<String>, values: DMatrix<f64>) -> Result<Self, KernelError> {
        let n = ids.len();
        if values.nrows() != n || values.ncols() != n {
            return Err(KernelError::Shape {
                expected: n,
                rows: values.nrows(),
                cols: values.ncols(),
            });
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if values[(i, j)] != values[(j, i)] {
                    return Err(KernelError::NotSymmetric { row: i, col: j });
                }
            }
        }
        let index = index_of(&ids)?;
        Ok(GramMatrix { ids, index, values })
    }

    /// Evaluates `f(i, j)` on the upper triangle (in parallel) and mirrors it.
    pub fn from_fn<F>(ids: Vec<String>, f: F) -> Result<Self, KernelError>
    where
        F: Fn(usize, usize) -> f64 + Sync,
    {
        let n = ids.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| (i..n).map(|j| f(i, j)).collect())
            .collect();
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in rows.into_iter().enumerate() {
            for (off, v) in row.into_iter().enumerate() {
                let j = i + off;
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        let index = index_of(&ids)?;
        Ok(GramMatrix {
            ids,
            index,
            values: m,
        })
    }

    pub fn identity(ids: Vec<String>) -> Result<Self, KernelError> {
        let n = ids.len();
        Self::new(ids, DMatrix::identity(n, n))
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn trace(&self) -> f64 {
        self.values.trace()
    }

    /// Cosine-normalized copy with unit diagonal. Rows with zero
    /// self-similarity get 0 off the diagonal.
    pub fn normalized(&self) -> GramMatrix {
        let diag: Vec<f64> = (0..self.len()).map(|i| self.values[(i, i)]).collect();
        let zero_rows = diag.iter().filter(|d| **d <= 0.0).count();
        if zero_rows > 0 {
            log::warn!("{zero_rows} examples have zero self-similarity; normalized rows set to 0");
        }
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
            for j in (i + 1)..n {
                let v = super::normalize_kernel(self.values[(i, j)], diag[i], diag[j]);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        GramMatrix {
            ids: self.ids.clone(),
            index: self.index.clone(),
            values: m,
        }
    }

    /// Restricts to the given ids, in the given order.
    pub fn select(&self, ids: &[String]) -> Result<GramMatrix, KernelError> {
        let pos: Vec<usize> = ids
            .iter()
            .map(|id| {
                self.position(id)
                    .ok_or_else(|| KernelError::MissingFeature {
                        id: id.clone(),
                        feature: "gram row",
                    })
            })
            .collect::<Result<_, _>>()?;
        let n = pos.len();
        let m = DMatrix::from_fn(n, n, |i, j| self.values[(pos[i], pos[j])]);
        GramMatrix::new(ids.to_vec(), m)
    }

    /// CSV: header row of ids, then one row of values per example.
    pub fn to_csv(&self) -> String {
        let mut out = self.ids.join(",");
        out.push('\n');
        for i in 0..self.len() {
            for j in 0..self.len() {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}", self.values[(i, j)]);
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<GramMatrix, KernelError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| DataError::at(1, "empty gram file"))?;
        let ids: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        let n = ids.len();
        let mut m = DMatrix::zeros(n, n);
        let mut row = 0;
        for (line_no, line) in lines {
            if row == n {
                return Err(DataError::at(line_no, "more rows than ids").into());
            }
            let vals: Vec<&str> = line.split(',').collect();
            if vals.len() != n {
                return Err(DataError::at(
                    line_no,
                    format!("expected {n} values, found {}", vals.len()),
                )
                .into());
            }
            for (j, v) in vals.iter().enumerate() {
                m[(row, j)] = v
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| DataError::at(line_no, format!("bad number `{v}`")))?;
            }
            row += 1;
        }
        if row != n {
            return Err(DataError::at(0, format!("expected {n} rows, found {row}")).into());
        }
        GramMatrix::new(ids, m)
    }
}

fn index_of(ids: &[String]) -> Result<HashMap<String, usize>, KernelError> {
    let mut index = HashMap::with_capacity(ids.len());
    for (i, id) in ids.iter().enumerate() {
        if index.insert(id.clone(), i).is_some() {
            return Err(KernelError::DuplicateId(id.clone()));
        }
    }
    Ok(index)
}

/// Result of a positive semi-definiteness check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdReport {
    pub passed: bool,
    pub min_eigenvalue: f64,
}

/// Passes when the smallest eigenvalue is at least `-tol * trace / n`.
/// Failing matrices are reported, never repaired.
pub fn psd_check(gram: &GramMatrix, tol: f64) -> PsdReport {
    if gram.is_empty() {
        return PsdReport {
            passed: true,
            min_eigenvalue: 0.0,
        };
    }
    let eig = SymmetricEigen::new(gram.matrix().clone());
    let min_eigenvalue = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let scale = (gram.trace() / gram.len() as f64).abs();
    PsdReport {
        passed: min_eigenvalue >= -tol * scale,
        min_eigenvalue,
    }
}
