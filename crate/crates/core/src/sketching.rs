//! Random sketches and the norm estimators built on them.
//!
//! Cauchy variables are generated as the ratio of two independent standard
//! normals, which is exactly standard Cauchy distributed.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::median;
use crate::matrix::PointMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SketchKind {
    Gaussian { scale: f64 },
    Cauchy { scale: f64 },
}

/// A dense random matrix with i.i.d. entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSketch {
    kind: SketchKind,
    entries: DMatrix<f64>,
}

fn check_dims(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::Dimension(format!("sketch dimensions must be positive, got {rows}x{cols}")));
    }
    Ok(())
}

pub fn gaussian_sketch<R: Rng + ?Sized>(rows: usize, cols: usize, scale: f64, rng: &mut R) -> Result<DenseSketch> {
    check_dims(rows, cols)?;
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Parameter(format!("gaussian scale must be positive, got {scale}")));
    }
    let entries = DMatrix::from_fn(rows, cols, |_, _| scale * rng.sample::<f64, _>(StandardNormal));
    Ok(DenseSketch { kind: SketchKind::Gaussian { scale }, entries })
}

pub fn standard_cauchy<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let den: f64 = rng.sample(StandardNormal);
        if den != 0.0 {
            let num: f64 = rng.sample(StandardNormal);
            return num / den;
        }
    }
}

pub fn cauchy_sketch<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Result<DenseSketch> {
    check_dims(rows, cols)?;
    let entries = DMatrix::from_fn(rows, cols, |_, _| standard_cauchy(rng));
    Ok(DenseSketch { kind: SketchKind::Cauchy { scale: 1.0 }, entries })
}

impl DenseSketch {
    pub fn kind(&self) -> SketchKind {
        self.kind
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    /// `S x`.
    pub fn apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.cols() {
            return Err(dim_mismatch("sketch columns vs vector length", self.cols(), x.len()));
        }
        Ok(&self.entries * x)
    }

    /// `x^T S`, returned as a column vector.
    pub fn apply_left(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.rows() {
            return Err(dim_mismatch("sketch rows vs vector length", self.rows(), x.len()));
        }
        Ok(self.entries.tr_mul(x))
    }
}

/// CountSketch: input coordinate `i` lands in bucket `hash[i]` with sign `sign[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountSketch {
    rows: usize,
    hash: Vec<usize>,
    sign: Vec<f64>,
}

impl CountSketch {
    pub fn new<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Result<Self> {
        check_dims(rows, cols)?;
        let hash = (0..cols).map(|_| rng.random_range(0..rows)).collect();
        let sign = (0..cols).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        Ok(Self { rows, hash, sign })
    }

    pub fn from_parts(rows: usize, hash: Vec<usize>, sign: Vec<f64>) -> Result<Self> {
        if hash.len() != sign.len() {
            return Err(dim_mismatch("hash/sign length", hash.len(), sign.len()));
        }
        if let Some(&h) = hash.iter().find(|&&h| h >= rows) {
            return Err(Error::Parameter(format!("bucket {h} out of range for {rows} rows")));
        }
        if sign.iter().any(|s| s.abs() != 1.0) {
            return Err(Error::Parameter("signs must be +1 or -1".into()));
        }
        Ok(Self { rows, hash, sign })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.hash.len()
    }

    pub fn bucket(&self, i: usize) -> (usize, f64) {
        (self.hash[i], self.sign[i])
    }

    /// Buckets that receive at least one input coordinate, ascending.
    pub fn used_buckets(&self) -> Vec<usize> {
        let mut b = self.hash.clone();
        b.sort_unstable();
        b.dedup();
        b
    }

    /// `S M`. Touches each entry of `M` once.
    pub fn apply(&self, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if m.nrows() != self.cols() {
            return Err(dim_mismatch("countsketch columns vs matrix rows", self.cols(), m.nrows()));
        }
        let mut out = DMatrix::zeros(self.rows, m.ncols());
        for c in 0..m.ncols() {
            for i in 0..m.nrows() {
                let v = m[(i, c)];
                if v != 0.0 {
                    out[(self.hash[i], c)] += self.sign[i] * v;
                }
            }
        }
        Ok(out)
    }
}

/// Convenience wrapper around [`CountSketch::apply`].
pub fn countsketch_apply(sk: &CountSketch, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    sk.apply(m)
}

/// `median_j |(C x)_j|`, an estimate of `||x||_1` for a standard Cauchy `C`.
pub fn median_abs_l1(c: &DenseSketch, x: &DVector<f64>) -> Result<f64> {
    let y = c.apply(x)?;
    let mut abs: Vec<f64> = y.iter().map(|v| v.abs()).collect();
    Ok(median(&mut abs))
}

/// `||x^T G||_2`; with `G ~ N(0, 1/t)^{m x t}` this concentrates at `||x||_2`.
pub fn gaussian_l2_estimate(g: &DenseSketch, x: &DVector<f64>) -> Result<f64> {
    Ok(g.apply_left(x)?.norm())
}

/// `sqrt(pi/2) / t * ||x^T G||_1` for a standard Gaussian `G` with `t` columns.
pub fn gaussian_l1_to_l2(g: &DenseSketch, x: &DVector<f64>, t: usize) -> Result<f64> {
    if g.cols() != t {
        return Err(dim_mismatch("gaussian columns", t, g.cols()));
    }
    let y = g.apply_left(x)?;
    Ok(FRAC_PI_2.sqrt() / t as f64 * y.iter().map(|v| v.abs()).sum::<f64>())
}

/// `(sum_i ||M_i||_2^p)^(1/p)`.
pub fn norm_p2(m: &DMatrix<f64>, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Parameter(format!("p must be at least 1, got {p}")));
    }
    if p == 1.0 {
        return Ok(m.row_iter().map(|r| r.norm()).sum());
    }
    Ok(m.row_iter().map(|r| r.norm().powf(p)).sum::<f64>().powf(1.0 / p))
}

/// (1,2)-norm of a point matrix.
pub fn point_norm_12(a: &PointMatrix) -> f64 {
    (0..a.nrows()).map(|i| a.row_norm(i)).sum()
}
