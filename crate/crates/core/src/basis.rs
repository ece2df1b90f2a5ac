use nalgebra::{DMatrix, DVector};

use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{orthonormalize, RANK_TOL};

/// Orthonormality tolerance enforced on every constructed basis.
pub const ORTHO_TOL: f64 = 1e-8;

/// A `d x c` matrix with orthonormal columns. `c = 0` is the empty basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    cols: DMatrix<f64>,
}

impl Basis {
    pub fn empty(dim_ambient: usize) -> Self {
        Self { cols: DMatrix::zeros(dim_ambient, 0) }
    }

    /// Wraps a matrix whose columns are already orthonormal.
    pub fn from_orthonormal(cols: DMatrix<f64>) -> Result<Self> {
        if cols.ncols() > cols.nrows() {
            return Err(Error::Dimension(format!(
                "basis has {} columns in dimension {}",
                cols.ncols(),
                cols.nrows()
            )));
        }
        let b = Self { cols };
        let err = b.orthonormality_error();
        if err > ORTHO_TOL {
            return Err(Error::Parameter(format!("columns not orthonormal (error {err:.2e})")));
        }
        Ok(b)
    }

    /// Orthonormal basis of the column span of `m`.
    pub fn spanning(m: &DMatrix<f64>) -> Self {
        Self { cols: orthonormalize(m, None, RANK_TOL) }
    }

    pub fn identity(d: usize) -> Self {
        Self { cols: DMatrix::identity(d, d) }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.cols
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.cols
    }

    pub fn dim_ambient(&self) -> usize {
        self.cols.nrows()
    }

    pub fn dim_sub(&self) -> usize {
        self.cols.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.cols.ncols() == 0
    }

    /// `max |B^T B - I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let c = self.dim_sub();
        (self.cols.tr_mul(&self.cols) - DMatrix::<f64>::identity(c, c))
            .iter()
            .fold(0.0, |a, v| a.max(v.abs()))
    }

    /// The first `m` columns.
    pub fn truncate(&self, m: usize) -> Basis {
        let m = m.min(self.dim_sub());
        Basis { cols: self.cols.columns(0, m).into_owned() }
    }

    /// `[self | other]`; `other` must be orthogonal to `self`.
    pub fn concat(&self, other: &Basis) -> Result<Basis> {
        if other.dim_ambient() != self.dim_ambient() {
            return Err(dim_mismatch("basis ambient dimension", self.dim_ambient(), other.dim_ambient()));
        }
        let c = self.dim_sub();
        let mut cols = DMatrix::zeros(self.dim_ambient(), c + other.dim_sub());
        cols.columns_mut(0, c).copy_from(&self.cols);
        cols.columns_mut(c, other.dim_sub()).copy_from(&other.cols);
        Basis::from_orthonormal(cols)
    }

    /// Coordinates `B^T v`.
    pub fn coords(&self, v: &DVector<f64>) -> DVector<f64> {
        self.cols.tr_mul(v)
    }

    /// `v - B B^T v`.
    pub fn residual(&self, v: &DVector<f64>) -> DVector<f64> {
        if self.is_empty() {
            return v.clone();
        }
        v - &self.cols * self.cols.tr_mul(v)
    }

    pub fn distance(&self, v: &DVector<f64>) -> f64 {
        self.residual(v).norm()
    }

    /// `B x`.
    pub fn lift(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.cols * x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_orthonormal() {
        let m = DMatrix::from_column_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]);
        assert!(Basis::from_orthonormal(m.clone()).is_err());
        let b = Basis::spanning(&m);
        assert_eq!(b.dim_sub(), 2);
        assert!(b.orthonormality_error() < 1e-12);
    }

    #[test]
    fn distance_to_axis() {
        let b = Basis::from_orthonormal(DMatrix::from_column_slice(2, 1, &[1.0, 0.0])).unwrap();
        assert!((b.distance(&DVector::from_vec(vec![3.0, 4.0])) - 4.0).abs() < 1e-15);
        assert_eq!(Basis::empty(2).distance(&DVector::from_vec(vec![3.0, 4.0])), 5.0);
    }
}
