//! Bicriteria solvers for (k,1)-subspace approximation of `A (I - B B^T)`.
//!
//! [`poly_approx`] returns an O(1)-approximate subspace with roughly `k log k`
//! dimensions from an l1 embedding of a Gaussian sketch of the residual.
//! [`eps_approx`] refines any such subspace to a (1+eps)-approximate one by
//! sampling rows proportionally to their estimated residual distance.

use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::basis::Basis;
use crate::config::{ceil_count, Constants};
use crate::embeddings::{l1_embedding, EmbeddingMap, EmbeddingPath};
use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{max_abs, norm_12, orthonormalize, row_norms, rowspace_basis, RANK_TOL};
use crate::matrix::PointMatrix;
use crate::sketching::gaussian_sketch;

/// Residual entries below this fraction of the unprojected product count as zero.
pub(crate) const ZERO_RESIDUAL_TOL: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq)]
pub struct BicriteriaResult {
    pub basis: Basis,
    pub cost_estimate: f64,
    pub trials_run: usize,
}

/// `A (I - B B^T) M`, computed as `A M - (A B)(B^T M)`.
pub fn residual_apply(a: &PointMatrix, b: &Basis, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Ok(residual_apply_scaled(a, b, m)?.0)
}

/// Also returns `max |A M|` so callers can decide when the residual is numerically zero.
pub(crate) fn residual_apply_scaled(a: &PointMatrix, b: &Basis, m: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    if b.dim_ambient() != a.ncols() {
        return Err(dim_mismatch("basis ambient dimension", a.ncols(), b.dim_ambient()));
    }
    let am = a.mul(m)?;
    let scale = max_abs(&am);
    if b.is_empty() {
        return Ok((am, scale));
    }
    let ab = a.mul(b.matrix())?;
    let btm = b.matrix().tr_mul(m);
    Ok((am - ab * btm, scale))
}

pub(crate) fn is_zero_residual(m: &DMatrix<f64>, scale: f64) -> bool {
    max_abs(m) <= ZERO_RESIDUAL_TOL * scale
}

/// Exact `||a_i (I - sum_j P_j)||_2` for mutually orthogonal bases `P_j`.
pub fn residual_row_norms(a: &PointMatrix, bases: &[&Basis]) -> Result<Vec<f64>> {
    const CHUNK: usize = 256;
    for b in bases {
        if b.dim_ambient() != a.ncols() {
            return Err(dim_mismatch("basis ambient dimension", a.ncols(), b.dim_ambient()));
        }
    }
    let n = a.nrows();
    let mut out = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let rows: Vec<usize> = (start..(start + CHUNK).min(n)).collect();
        let mut block = a.select_rows(&rows);
        for b in bases.iter().filter(|b| !b.is_empty()) {
            let coef = &block * b.matrix();
            block -= coef * b.matrix().transpose();
        }
        out.extend(row_norms(&block));
        start += CHUNK;
    }
    Ok(out)
}

/// `||A (I - sum_j P_j)||_{1,2}` computed exactly.
pub fn residual_cost(a: &PointMatrix, bases: &[&Basis]) -> Result<f64> {
    Ok(residual_row_norms(a, bases)?.iter().sum())
}

/// Gaussian estimate of `||A (I - BB^T)(I - XX^T)||_{1,2}` using a shared `g` (`d x t`, scaled by `1/sqrt(t)`).
fn sketched_cost(a: &PointMatrix, b: &Basis, x: &Basis, g: &DMatrix<f64>) -> Result<f64> {
    let gx = if x.is_empty() { g.clone() } else { g - x.matrix() * x.matrix().tr_mul(g) };
    Ok(norm_12(&residual_apply(a, b, &gx)?))
}

fn validate(a: &PointMatrix, b: &Basis, k: usize, delta: f64) -> Result<()> {
    if b.dim_ambient() != a.ncols() {
        return Err(dim_mismatch("basis ambient dimension", a.ncols(), b.dim_ambient()));
    }
    if k == 0 || k > a.ncols() {
        return Err(Error::Parameter(format!("k must be in 1..={}, got {k}", a.ncols())));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Parameter(format!("delta must be in (0, 1), got {delta}")));
    }
    Ok(())
}

/// Number of independent trials run to reach failure probability `delta`.
pub fn trial_count(delta: f64) -> usize {
    (1.0 / delta).log2().ceil().max(0.0) as usize + 1
}

/// Width of the Gaussian sketch `S^T` in one trial.
pub fn sketch_cols(k: usize, delta: f64, d: usize, cfg: &Constants) -> usize {
    let dl = delta.max(cfg.sketch_delta_floor);
    ceil_count(cfg.c_sketch * (k as f64 + 1.0 / (dl * dl))).min(d)
}

pub(crate) enum Candidate {
    /// `A (I - BB^T)` vanished; nothing left to approximate.
    ZeroResidual,
    Basis(Basis),
}

/// One trial of the O(1)-approximation: Gaussian sketch, Lewis-weight l1
/// embedding of the sketched residual, then the row space of the sampled rows.
fn poly_trial<R: Rng + ?Sized>(a: &PointMatrix, b: &Basis, k: usize, delta: f64, cfg: &Constants, rng: &mut R) -> Result<Candidate> {
    let d = a.ncols();
    let cols = sketch_cols(k, delta, d, cfg);
    let s = gaussian_sketch(d, cols, 1.0, rng)?;
    let (m, scale) = residual_apply_scaled(a, b, s.matrix())?;
    if is_zero_residual(&m, scale) {
        return Ok(Candidate::ZeroResidual);
    }
    let emb = l1_embedding(&m, EmbeddingPath::Lewis, cfg, rng)?;
    let EmbeddingMap::Sampling(l) = emb.map else {
        unreachable!("the Lewis path always yields a sampling matrix")
    };
    let rows = l.apply_points(a)?;
    Ok(Candidate::Basis(sampled_rowspace(&rows, b)))
}

/// Orthonormal basis of the row space of `rows (I - BB^T)`.
pub(crate) fn sampled_rowspace(rows: &DMatrix<f64>, b: &Basis) -> Basis {
    let projected = if b.is_empty() { rows.clone() } else { rows - (rows * b.matrix()) * b.matrix().transpose() };
    let against = if b.is_empty() { None } else { Some(b.matrix()) };
    Basis::from_orthonormal(rowspace_basis(&projected, against)).expect("rowspace basis is orthonormal")
}

/// Picks the trial minimizing the (estimated or exact) residual cost.
pub(crate) fn select_best<F>(
    a: &PointMatrix,
    b: &Basis,
    trials: usize,
    cfg: &Constants,
    g: &DMatrix<f64>,
    mut trial: F,
) -> Result<BicriteriaResult>
where
    F: FnMut() -> Result<Candidate>,
{
    let mut best: Option<(Basis, f64)> = None;
    for run in 1..=trials {
        let x = match trial()? {
            Candidate::ZeroResidual => {
                return Ok(BicriteriaResult { basis: Basis::empty(a.ncols()), cost_estimate: 0.0, trials_run: run })
            }
            Candidate::Basis(x) => x,
        };
        let cost = if cfg.exact_cost { residual_cost(a, &[b, &x])? } else { sketched_cost(a, b, &x, g)? };
        if best.as_ref().is_none_or(|(_, c)| cost < *c) {
            best = Some((x, cost));
        }
    }
    let (basis, cost_estimate) = best.expect("at least one trial");
    Ok(BicriteriaResult { basis, cost_estimate, trials_run: trials })
}

/// O(1)-approximate bicriteria solution for `A (I - BB^T)`.
///
/// Runs `ceil(log2(1/delta)) + 1` independent trials and keeps the one with
/// the smallest cost, measured with a Gaussian sketch of
/// `c_g log2(n+2)` columns (or exactly when `cfg.exact_cost` is set).
pub fn poly_approx<R: Rng + ?Sized>(
    a: &PointMatrix,
    b: &Basis,
    k: usize,
    delta: f64,
    cfg: &Constants,
    rng: &mut R,
) -> Result<BicriteriaResult> {
    validate(a, b, k, delta)?;
    let t = cfg.cost_sketch_cols(a.nrows());
    let g = gaussian_sketch(a.ncols(), t, 1.0 / (t as f64).sqrt(), rng)?.into_matrix();
    select_best(a, b, trial_count(delta), cfg, &g, || poly_trial(a, b, k, delta, cfg, rng))
}

/// Sampling distribution `p_i = ||M_i||_2 / ||M||_{1,2}` with
/// `M = A (I - BB^T)(I - XX^T) G` and `G ~ N(0, 1/t)^{d x t}`.
///
/// Returns `None` when `M` vanishes.
pub fn residual_sampling_probabilities<R: Rng + ?Sized>(
    a: &PointMatrix,
    b: &Basis,
    xhat: &Basis,
    t: usize,
    rng: &mut R,
) -> Result<Option<Vec<f64>>> {
    let g = gaussian_sketch(a.ncols(), t, 1.0 / (t as f64).sqrt(), rng)?.into_matrix();
    let gx = if xhat.is_empty() { g } else { &g - xhat.matrix() * xhat.matrix().tr_mul(&g) };
    let (m, scale) = residual_apply_scaled(a, b, &gx)?;
    if is_zero_residual(&m, scale) {
        return Ok(None);
    }
    let q = row_norms(&m);
    let total: f64 = q.iter().sum();
    Ok(Some(q.into_iter().map(|v| v / total).collect()))
}

/// Number of residual samples, capped at `n`.
pub fn residual_sample_count(n: usize, k: usize, big_k: f64, eps: f64, delta: f64, cfg: &Constants) -> usize {
    let k3 = (k as f64).powi(3);
    ceil_count(cfg.c_s * big_k * k3 / (eps * eps) * (1.0 / delta + 2.0).log2()).min(n)
}

/// Orthonormal basis of `(I - BB^T) [X | A_S^T]`, with `X`'s columns first.
pub(crate) fn extend_with_rows(a: &PointMatrix, b: &Basis, xhat: &Basis, rows: &[usize]) -> Basis {
    let d = a.ncols();
    let picked = a.select_rows(rows);
    let mut cand = DMatrix::zeros(d, xhat.dim_sub() + rows.len());
    cand.columns_mut(0, xhat.dim_sub()).copy_from(xhat.matrix());
    cand.columns_mut(xhat.dim_sub(), rows.len()).copy_from(&picked.transpose());
    let against = if b.is_empty() { None } else { Some(b.matrix()) };
    Basis::from_orthonormal(orthonormalize(&cand, against, RANK_TOL)).expect("Gram-Schmidt output is orthonormal")
}

/// Cost reported for a refined basis.
pub(crate) fn refined_cost<R: Rng + ?Sized>(a: &PointMatrix, b: &Basis, u: &Basis, cfg: &Constants, rng: &mut R) -> Result<f64> {
    if cfg.exact_cost {
        return residual_cost(a, &[b, u]);
    }
    let t = cfg.cost_sketch_cols(a.nrows());
    let g = gaussian_sketch(a.ncols(), t, 1.0 / (t as f64).sqrt(), rng)?.into_matrix();
    sketched_cost(a, b, u, &g)
}

/// Refines `xhat` (cost at most `big_k` times optimal) to a (1+eps)-approximate
/// subspace of `A (I - BB^T)` by residual sampling. The result is orthogonal to `B`
/// and contains the span of `xhat`.
#[allow(clippy::too_many_arguments)]
pub fn eps_approx<R: Rng + ?Sized>(
    a: &PointMatrix,
    b: &Basis,
    xhat: &Basis,
    k: usize,
    big_k: f64,
    eps: f64,
    delta: f64,
    cfg: &Constants,
    rng: &mut R,
) -> Result<BicriteriaResult> {
    validate(a, b, k, delta)?;
    if xhat.dim_ambient() != a.ncols() {
        return Err(dim_mismatch("xhat ambient dimension", a.ncols(), xhat.dim_ambient()));
    }
    if !(eps > 0.0) || !(big_k >= 1.0) {
        return Err(Error::Parameter(format!("need eps > 0 and K >= 1, got eps={eps}, K={big_k}")));
    }
    let n = a.nrows();
    let t = cfg.residual_sketch_cols(n);
    let Some(p) = residual_sampling_probabilities(a, b, xhat, t, rng)? else {
        return Ok(BicriteriaResult { basis: xhat.clone(), cost_estimate: 0.0, trials_run: 1 });
    };
    let s = residual_sample_count(n, k, big_k, eps, delta, cfg);
    let dist = WeightedIndex::new(&p).map_err(|e| Error::Degenerate(e.to_string()))?;
    let mut seen = vec![false; n];
    let mut rows = Vec::new();
    for _ in 0..s {
        let i = dist.sample(rng);
        if !seen[i] {
            seen[i] = true;
            rows.push(i);
        }
    }
    let u = extend_with_rows(a, b, xhat, &rows);
    let cost_estimate = refined_cost(a, b, &u, cfg, rng)?;
    Ok(BicriteriaResult { basis: u, cost_estimate, trials_run: 1 })
}
