//! Point matrices: the `n x d` input whose rows are points.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::error::{dim_mismatch, Error, Result};

/// Compressed sparse row storage.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted = triplets.to_vec();
        for &(r, c, v) in &sorted {
            if r >= nrows || c >= ncols {
                return Err(Error::Dimension(format!(
                    "entry ({r}, {c}) outside {nrows}x{ncols}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::Parameter(format!("non-finite entry at ({r}, {c})")));
            }
        }
        sorted.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            indices.push(c);
            values.push(v);
            indptr[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        Ok(Self { nrows, ncols, indptr, indices, values })
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut trip = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)] != 0.0 {
                    trip.push((i, j, m[(i, j)]));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), &trip).expect("dense entries are in range")
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values stored in row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[r.clone()], &self.values[r])
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            let (idx, val) = self.row(i);
            for (&j, &v) in idx.iter().zip(val) {
                m[(i, j)] += v;
            }
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PointMatrix {
    Dense(DMatrix<f64>),
    Sparse(CsrMatrix),
}

impl From<DMatrix<f64>> for PointMatrix {
    fn from(m: DMatrix<f64>) -> Self {
        PointMatrix::Dense(m)
    }
}

impl From<CsrMatrix> for PointMatrix {
    fn from(m: CsrMatrix) -> Self {
        PointMatrix::Sparse(m)
    }
}

impl PointMatrix {
    pub fn nrows(&self) -> usize {
        match self {
            PointMatrix::Dense(m) => m.nrows(),
            PointMatrix::Sparse(m) => m.nrows,
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            PointMatrix::Dense(m) => m.ncols(),
            PointMatrix::Sparse(m) => m.ncols,
        }
    }

    pub fn nnz(&self) -> usize {
        match self {
            PointMatrix::Dense(m) => m.iter().filter(|v| **v != 0.0).count(),
            PointMatrix::Sparse(m) => m.nnz(),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, PointMatrix::Sparse(_))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            PointMatrix::Dense(m) => m.clone(),
            PointMatrix::Sparse(m) => m.to_dense(),
        }
    }

    pub fn row(&self, i: usize) -> DVector<f64> {
        match self {
            PointMatrix::Dense(m) => m.row(i).transpose(),
            PointMatrix::Sparse(m) => {
                let mut v = DVector::zeros(m.ncols);
                let (idx, val) = m.row(i);
                for (&j, &x) in idx.iter().zip(val) {
                    v[j] = x;
                }
                v
            }
        }
    }

    /// Calls `f(col, value)` for every stored entry of row `i`.
    pub fn for_each_in_row(&self, i: usize, mut f: impl FnMut(usize, f64)) {
        match self {
            PointMatrix::Dense(m) => {
                for j in 0..m.ncols() {
                    let v = m[(i, j)];
                    if v != 0.0 {
                        f(j, v);
                    }
                }
            }
            PointMatrix::Sparse(m) => {
                let (idx, val) = m.row(i);
                for (&j, &v) in idx.iter().zip(val) {
                    f(j, v);
                }
            }
        }
    }

    pub fn row_norm(&self, i: usize) -> f64 {
        let mut s = 0.0;
        self.for_each_in_row(i, |_, v| s += v * v);
        s.sqrt()
    }

    /// Dense copy of the selected rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(rows.len(), self.ncols());
        for (r, &i) in rows.iter().enumerate() {
            self.for_each_in_row(i, |j, v| out[(r, j)] = v);
        }
        out
    }

    /// `A * m`.
    pub fn mul(&self, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if m.nrows() != self.ncols() {
            return Err(dim_mismatch("A * M inner dimension", self.ncols(), m.nrows()));
        }
        Ok(match self {
            PointMatrix::Dense(a) => a * m,
            PointMatrix::Sparse(a) => {
                let mut out = DMatrix::zeros(a.nrows, m.ncols());
                for i in 0..a.nrows {
                    let (idx, val) = a.row(i);
                    for c in 0..m.ncols() {
                        let mut s = 0.0;
                        for (&j, &v) in idx.iter().zip(val) {
                            s += v * m[(j, c)];
                        }
                        out[(i, c)] = s;
                    }
                }
                out
            }
        })
    }

    /// `A^T * m`.
    pub fn tr_mul(&self, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if m.nrows() != self.nrows() {
            return Err(dim_mismatch("A^T * M inner dimension", self.nrows(), m.nrows()));
        }
        Ok(match self {
            PointMatrix::Dense(a) => a.tr_mul(m),
            PointMatrix::Sparse(a) => {
                let mut out = DMatrix::zeros(a.ncols, m.ncols());
                for i in 0..a.nrows {
                    let (idx, val) = a.row(i);
                    for c in 0..m.ncols() {
                        let w = m[(i, c)];
                        if w == 0.0 {
                            continue;
                        }
                        for (&j, &v) in idx.iter().zip(val) {
                            out[(j, c)] += v * w;
                        }
                    }
                }
                out
            }
        })
    }

    /// `s * A[rows, :]` where `s` has `rows.len()` columns.
    pub fn left_mul_rows(&self, s: &DMatrix<f64>, rows: Range<usize>) -> Result<DMatrix<f64>> {
        if rows.end > self.nrows() || s.ncols() != rows.len() {
            return Err(dim_mismatch("sketch columns vs row block", rows.len(), s.ncols()));
        }
        Ok(match self {
            PointMatrix::Dense(a) => s * a.rows(rows.start, rows.len()),
            PointMatrix::Sparse(_) => {
                let mut out = DMatrix::zeros(s.nrows(), self.ncols());
                for (local, i) in rows.enumerate() {
                    self.for_each_in_row(i, |j, v| {
                        for r in 0..s.nrows() {
                            out[(r, j)] += s[(r, local)] * v;
                        }
                    });
                }
                out
            }
        })
    }
}
