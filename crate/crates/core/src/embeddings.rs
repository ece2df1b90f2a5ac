//! l1 Lewis weights, l1 leverage scores, and sampling-based l1 subspace embeddings.

use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::Constants;
use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{independent_columns, leverage_scores, RANK_TOL};
use crate::matrix::PointMatrix;
use crate::sketching::{cauchy_sketch, DenseSketch};

/// A sampling-and-scaling matrix: row `j` of `L M` is `scale_j * M[index_j, :]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingMatrix {
    picks: Vec<(usize, f64)>,
    source_rows: usize,
}

impl SamplingMatrix {
    pub fn new(picks: Vec<(usize, f64)>, source_rows: usize) -> Result<Self> {
        for &(i, s) in &picks {
            if i >= source_rows {
                return Err(Error::Dimension(format!("pick {i} outside {source_rows} rows")));
            }
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::Parameter(format!("scale {s} for row {i} must be positive and finite")));
            }
        }
        Ok(Self { picks, source_rows })
    }

    pub fn picks(&self) -> &[(usize, f64)] {
        &self.picks
    }

    pub fn len(&self) -> usize {
        self.picks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.picks.is_empty()
    }

    pub fn source_rows(&self) -> usize {
        self.source_rows
    }

    /// Sorted, deduplicated row indices.
    pub fn distinct_rows(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.picks.iter().map(|p| p.0).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn apply(&self, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if m.nrows() != self.source_rows {
            return Err(dim_mismatch("sampling source rows", self.source_rows, m.nrows()));
        }
        let mut out = DMatrix::zeros(self.picks.len(), m.ncols());
        for (r, &(i, s)) in self.picks.iter().enumerate() {
            out.set_row(r, &(m.row(i) * s));
        }
        Ok(out)
    }

    pub fn apply_points(&self, a: &PointMatrix) -> Result<DMatrix<f64>> {
        if a.nrows() != self.source_rows {
            return Err(dim_mismatch("sampling source rows", self.source_rows, a.nrows()));
        }
        let mut out = DMatrix::zeros(self.picks.len(), a.ncols());
        for (r, &(i, s)) in self.picks.iter().enumerate() {
            a.for_each_in_row(i, |j, v| out[(r, j)] = s * v);
        }
        Ok(out)
    }

    /// `||L M||_{1,2}` without materializing `L M`.
    pub fn norm_12(&self, m: &DMatrix<f64>) -> f64 {
        self.picks.iter().map(|&(i, s)| s * m.row(i).norm()).sum()
    }
}

/// Draws `count` i.i.d. rows with probability proportional to `weights` and
/// scales each pick by `1 / (count * p_i)`.
pub fn sample_proportional<R: Rng + ?Sized>(weights: &[f64], count: usize, rng: &mut R) -> Result<SamplingMatrix> {
    if count == 0 {
        return Err(Error::Parameter("sample count must be at least 1".into()));
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0 && total.is_finite()) || weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
        return Err(Error::Degenerate(format!("weights sum to {total}")));
    }
    let dist = WeightedIndex::new(weights).map_err(|e| Error::Degenerate(e.to_string()))?;
    let picks = (0..count)
        .map(|_| {
            let i = dist.sample(rng);
            (i, total / (count as f64 * weights[i]))
        })
        .collect();
    SamplingMatrix::new(picks, weights.len())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LewisState {
    pub weights: Vec<f64>,
    pub iterations: usize,
}

pub fn default_lewis_iterations(n: usize) -> usize {
    ((n as f64 + 4.0).log2().log2()).ceil() as usize + 4
}

/// l1 Lewis weights by the fixed-point iteration `w <- sqrt(w * tau(W^{-1/2} M))`
/// started from all ones.
///
/// Runs at least `iterations` updates and keeps going until the relative
/// fixed-point residual drops below `1e-3` (capped at 200 updates).
pub fn lewis_weights(m: &DMatrix<f64>, iterations: usize) -> Result<LewisState> {
    let c = Constants::default();
    lewis_weights_with(m, iterations, c.lewis_tolerance, c.lewis_max_iterations)
}

pub fn lewis_weights_with(m: &DMatrix<f64>, iterations: usize, tol: f64, max_iterations: usize) -> Result<LewisState> {
    let (n, d) = m.shape();
    if d == 0 || d > n {
        return Err(Error::Conditioning(format!("need 1 <= columns <= rows, got {n}x{d}")));
    }
    if independent_columns(m, RANK_TOL).len() < d {
        return Err(Error::Conditioning("matrix is not of full column rank".into()));
    }
    let mut w: Vec<f64> = (0..n).map(|i| if m.row(i).norm() > 0.0 { 1.0 } else { 0.0 }).collect();
    let active: Vec<usize> = (0..n).filter(|&i| w[i] > 0.0).collect();
    let mut done = 0;
    loop {
        let tau = reweighted_leverage(m, &active, &w);
        let residual = active
            .iter()
            .zip(&tau)
            .map(|(&i, t)| (1.0 - t / w[i]).abs())
            .fold(0.0, f64::max);
        if done >= max_iterations || (done >= iterations.max(1) && residual <= tol) {
            return Ok(LewisState { weights: w, iterations: done });
        }
        for (&i, t) in active.iter().zip(&tau) {
            w[i] = (w[i] * t).sqrt();
        }
        done += 1;
    }
}

fn reweighted_leverage(m: &DMatrix<f64>, active: &[usize], w: &[f64]) -> Vec<f64> {
    let scaled = DMatrix::from_fn(active.len(), m.ncols(), |r, j| m[(active[r], j)] / w[active[r]].sqrt());
    leverage_scores(&scaled)
}

/// `max_i |w_i^2 - m_i^T (M^T W^{-1} M)^{-1} m_i| / w_i^2` over rows with positive weight.
pub fn lewis_fixed_point_residual(m: &DMatrix<f64>, weights: &[f64]) -> f64 {
    let mut gram = DMatrix::zeros(m.ncols(), m.ncols());
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            let r = m.row(i);
            gram += r.transpose() * r / w;
        }
    }
    let inv = gram.try_inverse().unwrap_or_else(|| DMatrix::from_element(m.ncols(), m.ncols(), f64::NAN));
    weights
        .iter()
        .enumerate()
        .filter(|(_, w)| **w > 0.0)
        .map(|(i, &w)| {
            let r = m.row(i).transpose();
            let q = (r.transpose() * &inv * &r)[(0, 0)];
            (w * w - q).abs() / (w * w)
        })
        .fold(0.0, f64::max)
}

/// Samples `count` rows with `p_i = w_i / sum(w)` and scale `1 / (count p_i)`.
pub fn lewis_sample<R: Rng + ?Sized>(state: &LewisState, count: usize, rng: &mut R) -> Result<SamplingMatrix> {
    sample_proportional(&state.weights, count, rng)
}

#[derive(Debug, Clone, PartialEq)]
pub struct L1LeverageScores {
    pub scores: Vec<f64>,
    /// `R^{-1}` from the QR factorization of `Pi M`.
    pub conditioner: DMatrix<f64>,
}

/// `scores_i = ||M_i R^{-1}||_1` where `Pi M = Q R`.
pub fn l1_leverage_scores(m: &DMatrix<f64>, pi: &DMatrix<f64>) -> Result<L1LeverageScores> {
    if pi.ncols() != m.nrows() {
        return Err(dim_mismatch("embedding columns vs matrix rows", m.nrows(), pi.ncols()));
    }
    let sketched = pi * m;
    let conditioner = r_inverse(&sketched)?;
    let scores = (m * &conditioner).row_iter().map(|r| r.iter().map(|v| v.abs()).sum()).collect();
    Ok(L1LeverageScores { scores, conditioner })
}

/// `R^{-1}` for the thin QR of a full-column-rank matrix.
pub(crate) fn r_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = m.ncols();
    if m.nrows() < d {
        return Err(Error::Conditioning(format!("{}x{} matrix cannot have full column rank", m.nrows(), d)));
    }
    let r = m.clone().qr().r();
    let diag_max = (0..d).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if d == 0 || (0..d).any(|i| r[(i, i)].abs() <= RANK_TOL * diag_max) || diag_max == 0.0 {
        return Err(Error::Conditioning("sketched matrix is rank deficient".into()));
    }
    r.solve_upper_triangular(&DMatrix::identity(d, d))
        .ok_or_else(|| Error::Conditioning("triangular solve failed".into()))
}

/// Samples `count` rows with `p_i = gamma * l_i / sum(l) + (1 - gamma) / n`,
/// so that `p_i >= gamma * l_i / sum(l)`.
pub fn leverage_sample<R: Rng + ?Sized>(
    scores: &L1LeverageScores,
    count: usize,
    gamma: f64,
    rng: &mut R,
) -> Result<SamplingMatrix> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::Parameter(format!("gamma must be in (0, 1], got {gamma}")));
    }
    let n = scores.scores.len();
    let total: f64 = scores.scores.iter().sum();
    if !(total > 0.0) || n == 0 {
        return Err(Error::Degenerate("leverage scores sum to zero".into()));
    }
    let probs: Vec<f64> = scores.scores.iter().map(|l| gamma * l / total + (1.0 - gamma) / n as f64).collect();
    sample_proportional(&probs, count, rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingPath {
    /// Lewis-weight row sampling.
    Lewis,
    /// Dense Cauchy sketch with `O(m log m)` rows.
    Cauchy,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EmbeddingMap {
    Sampling(SamplingMatrix),
    Dense(DenseSketch),
}

impl EmbeddingMap {
    pub fn apply(&self, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        match self {
            EmbeddingMap::Sampling(s) => s.apply(m),
            EmbeddingMap::Dense(c) => {
                if c.cols() != m.nrows() {
                    return Err(dim_mismatch("sketch columns", m.nrows(), c.cols()));
                }
                Ok(c.matrix() * m)
            }
        }
    }

    pub fn rows(&self) -> usize {
        match self {
            EmbeddingMap::Sampling(s) => s.len(),
            EmbeddingMap::Dense(c) => c.rows(),
        }
    }
}

/// An embedding together with the distortion it was certified at:
/// `alpha ||M x||_1 <= ||E M x||_1 <= beta ||M x||_1` on the test directions.
#[derive(Debug, Clone, PartialEq)]
pub struct L1Embedding {
    pub map: EmbeddingMap,
    pub alpha: f64,
    pub beta: f64,
}

/// Smallest and largest ratio `||E M x||_1 / ||M x||_1` over `directions` Gaussian `x`.
pub fn certify_distortion<R: Rng + ?Sized>(
    m: &DMatrix<f64>,
    map: &EmbeddingMap,
    directions: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let em = map.apply(m)?;
    let mut alpha = f64::INFINITY;
    let mut beta: f64 = 0.0;
    for _ in 0..directions {
        let x = DVector::from_fn(m.ncols(), |_, _| rng.sample::<f64, _>(StandardNormal));
        let full = (m * &x).lp_norm(1);
        if full == 0.0 {
            continue;
        }
        let ratio = (&em * &x).lp_norm(1) / full;
        alpha = alpha.min(ratio);
        beta = beta.max(ratio);
    }
    if !alpha.is_finite() {
        return Err(Error::Degenerate("matrix annihilates every test direction".into()));
    }
    Ok((alpha, beta))
}

/// Builds an l1 subspace embedding for the column space of `m` and certifies
/// it on random directions.
///
/// The Lewis path must reach `(1/2, 3/2)`; the Cauchy path must have
/// `beta / alpha` within `dense_distortion * r log2(r+2)` for rank `r`. Each
/// failed attempt doubles the sample size, and after `embedding_retries`
/// retries an [`Error::Embedding`] is returned.
pub fn l1_embedding<R: Rng + ?Sized>(
    m: &DMatrix<f64>,
    path: EmbeddingPath,
    cfg: &Constants,
    rng: &mut R,
) -> Result<L1Embedding> {
    let (n, _) = m.shape();
    let cols = independent_columns(m, RANK_TOL);
    let r = cols.len();
    if r == 0 {
        return Err(Error::Degenerate("cannot embed the zero matrix".into()));
    }
    if r > n {
        return Err(Error::Dimension(format!("rank {r} exceeds rows {n}")));
    }
    let state = match path {
        EmbeddingPath::Lewis => {
            let reduced = m.select_columns(cols.iter());
            Some(lewis_weights_with(
                &reduced,
                default_lewis_iterations(n),
                cfg.lewis_tolerance,
                cfg.lewis_max_iterations,
            )?)
        }
        EmbeddingPath::Cauchy => None,
    };
    let rlog = r as f64 * (r as f64 + 2.0).log2();
    let mut count = match path {
        EmbeddingPath::Lewis => cfg.lewis_samples(r),
        EmbeddingPath::Cauchy => (cfg.c_w * rlog).ceil() as usize,
    };
    let mut last = (0.0, f64::INFINITY);
    for _ in 0..=cfg.embedding_retries {
        let map = match &state {
            Some(s) => EmbeddingMap::Sampling(lewis_sample(s, count, rng)?),
            None => EmbeddingMap::Dense(cauchy_sketch(count, n, rng)?),
        };
        let (alpha, beta) = certify_distortion(m, &map, cfg.embedding_test_directions, rng)?;
        let ok = match path {
            EmbeddingPath::Lewis => alpha >= 0.5 && beta <= 1.5,
            EmbeddingPath::Cauchy => alpha > 0.0 && beta / alpha <= cfg.dense_distortion * rlog.max(1.0),
        };
        if ok {
            return Ok(L1Embedding { map, alpha, beta });
        }
        last = (alpha, beta);
        count *= 2;
    }
    Err(Error::Embedding(format!(
        "best attempt reached alpha={:.3}, beta={:.3}",
        last.0, last.1
    )))
}
