use super::LinearOperator;
use crate::error::{Result, TmapError};

/// Compressed sparse row matrix with 0-based, strictly increasing column
/// indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRowMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseRowMatrix {
    /// Builds a matrix from per-row `(column, value)` lists.
    pub fn from_rows(cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let nnz = rows.iter().map(Vec::len).sum();
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        indptr.push(0);
        for (r, row) in rows.iter().enumerate() {
            let mut prev: Option<usize> = None;
            for &(j, v) in row {
                if j >= cols {
                    return Err(TmapError::Data(format!(
                        "row {r}: column {j} out of range for {cols} columns"
                    )));
                }
                if prev.is_some_and(|p| j <= p) {
                    return Err(TmapError::Data(format!(
                        "row {r}: column indices not strictly increasing at {j}"
                    )));
                }
                if !v.is_finite() {
                    return Err(TmapError::Data(format!("row {r}: non-finite value")));
                }
                prev = Some(j);
                indices.push(j);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            indptr,
            indices,
            values,
        })
    }

    /// Dense row-major data converted to sparse form, dropping exact zeros.
    pub fn from_dense(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(TmapError::Dimension {
                expected: rows * cols,
                found: data.len(),
            });
        }
        let lists = (0..rows)
            .map(|i| {
                data[i * cols..(i + 1) * cols]
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(j, v)| (j, *v))
                    .collect()
            })
            .collect();
        Self::from_rows(cols, lists)
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[s..e], &self.values[s..e])
    }

    pub fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        let (idx, val) = self.row(i);
        idx.iter().zip(val).map(|(&j, &v)| v * x[j]).sum()
    }
}

impl LinearOperator for SparseRowMatrix {
    fn rows(&self) -> usize {
        self.rows
    }
    fn cols(&self) -> usize {
        self.cols
    }
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row_dot(i, x);
        }
    }
    fn adjoint(&self, y: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (i, &yi) in y.iter().enumerate() {
            if yi == 0.0 {
                continue;
            }
            let (idx, val) = self.row(i);
            for (&j, &v) in idx.iter().zip(val) {
                out[j] += v * yi;
            }
        }
    }
}
