//! Adaptive dimension reduction and per-row reduced representations.
//!
//! [`dimension_reduction`] grows a basis `B` by alternating the two bicriteria
//! solvers on the residual `A (I - BB^T)`. [`complete_dim_reduce`] then
//! compresses every row to coordinates in `B` plus a residual distance, from
//! which the cost of any shape can be recovered with [`reduced_cost`].

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::basis::Basis;
use crate::bicriteria::{eps_approx, poly_approx, residual_row_norms};
use crate::config::{ceil_count, log2p2, Constants, PipelinePath};
use crate::densefast::{dimension_reduction_dense_traced, DenseStats};
use crate::error::{dim_mismatch, Error, Result};
use crate::matrix::PointMatrix;
use crate::sketching::CountSketch;

/// A query shape: everything lies in a k-dimensional subspace.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// One center per row.
    Centers(DMatrix<f64>),
    Subspace(Basis),
    Union(Vec<Basis>),
}

impl Shape {
    pub fn centers(points: DMatrix<f64>) -> Result<Shape> {
        if points.nrows() == 0 {
            return Err(Error::Parameter("a center set needs at least one point".into()));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("centers must be finite".into()));
        }
        Ok(Shape::Centers(points))
    }

    pub fn union(parts: Vec<Basis>) -> Result<Shape> {
        let Some(first) = parts.first() else {
            return Err(Error::Parameter("a union needs at least one subspace".into()));
        };
        let d = first.dim_ambient();
        if let Some(p) = parts.iter().find(|p| p.dim_ambient() != d) {
            return Err(dim_mismatch("union member ambient dimension", d, p.dim_ambient()));
        }
        Ok(Shape::Union(parts))
    }

    pub fn dim_ambient(&self) -> usize {
        match self {
            Shape::Centers(c) => c.ncols(),
            Shape::Subspace(b) => b.dim_ambient(),
            Shape::Union(parts) => parts[0].dim_ambient(),
        }
    }

    /// Number of points, subspace dimension, or `j * max l` for a union.
    pub fn complexity(&self) -> usize {
        match self {
            Shape::Centers(c) => c.nrows(),
            Shape::Subspace(b) => b.dim_sub(),
            Shape::Union(parts) => parts.len() * parts.iter().map(Basis::dim_sub).max().unwrap_or(0),
        }
    }
}

fn distance_unchecked(point: &DVector<f64>, s: &Shape) -> f64 {
    match s {
        Shape::Centers(c) => (0..c.nrows())
            .map(|r| {
                point
                    .iter()
                    .zip(c.row(r).iter())
                    .map(|(p, q)| (p - q) * (p - q))
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min)
            .sqrt(),
        Shape::Subspace(b) => b.distance(point),
        Shape::Union(parts) => parts.iter().map(|b| b.distance(point)).fold(f64::INFINITY, f64::min),
    }
}

/// Euclidean distance from `point` to the nearest point of `s`.
pub fn shape_distance(point: &DVector<f64>, s: &Shape) -> Result<f64> {
    if point.len() != s.dim_ambient() {
        return Err(dim_mismatch("point dimension", s.dim_ambient(), point.len()));
    }
    Ok(distance_unchecked(point, s))
}

/// `sum_i dist(a_i, S)`.
pub fn exact_cost(a: &PointMatrix, s: &Shape) -> Result<f64> {
    if a.ncols() != s.dim_ambient() {
        return Err(dim_mismatch("shape ambient dimension", a.ncols(), s.dim_ambient()));
    }
    Ok((0..a.nrows()).map(|i| distance_unchecked(&a.row(i), s)).sum())
}

/// Sum of `weights[i] * sqrt(dist(lifted_i, S)^2 + residuals[i]^2)`.
pub(crate) fn lifted_cost(lifted: &DMatrix<f64>, residuals: &[f64], weights: Option<&[f64]>, s: &Shape) -> Result<f64> {
    if lifted.ncols() != s.dim_ambient() {
        return Err(dim_mismatch("shape ambient dimension", lifted.ncols(), s.dim_ambient()));
    }
    let mut total = 0.0;
    for (i, v) in residuals.iter().enumerate() {
        let p = lifted.row(i).transpose();
        let dist = distance_unchecked(&p, s);
        let w = weights.map_or(1.0, |w| w[i]);
        total += w * dist.hypot(*v);
    }
    Ok(total)
}

/// Per-row compression `a_i ~ (B x_i, v_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedRep {
    pub basis: Basis,
    /// `n x c`, row `i` holds `x_i`.
    pub coords: DMatrix<f64>,
    pub residuals: Vec<f64>,
    /// Accuracy parameter the representation was built for.
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedRepHeader {
    pub n: u64,
    pub d: u64,
    pub c: u64,
    pub eps: f64,
    pub seed: u64,
    pub encoding: String,
}

/// Worst observed deviations from the representation contract.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractReport {
    /// `max_i |v_i - dist_i| / dist_i`.
    pub residual_error: f64,
    /// `max_i ||B x_i - a_i|| / dist_i - 1`.
    pub lift_error: f64,
}

impl ContractReport {
    pub fn holds(&self, eps_c: f64) -> bool {
        self.residual_error <= eps_c && self.lift_error <= eps_c
    }
}

const HEADER_BYTES: usize = 40;

impl ReducedRep {
    /// Exact projection onto `basis`: `x_i = B^T a_i`, `v_i = ||a_i - B x_i||`.
    pub fn exact(a: &PointMatrix, basis: Basis, eps: f64) -> Result<ReducedRep> {
        if basis.dim_ambient() != a.ncols() {
            return Err(dim_mismatch("basis ambient dimension", a.ncols(), basis.dim_ambient()));
        }
        let coords = a.mul(basis.matrix())?;
        let residuals = residual_row_norms(a, &[&basis])?;
        Ok(ReducedRep { basis, coords, residuals, eps })
    }

    pub fn n(&self) -> usize {
        self.coords.nrows()
    }

    pub fn dim_sub(&self) -> usize {
        self.basis.dim_sub()
    }

    /// Rows `B x_i` as an `n x d` matrix.
    pub fn lifted_points(&self) -> DMatrix<f64> {
        &self.coords * self.basis.matrix().transpose()
    }

    pub fn check_contract(&self, a: &PointMatrix) -> Result<ContractReport> {
        if a.nrows() != self.n() || a.ncols() != self.basis.dim_ambient() {
            return Err(dim_mismatch("rows of A", self.n(), a.nrows()));
        }
        let exact = residual_row_norms(a, &[&self.basis])?;
        let lifted = self.lifted_points();
        let mut report = ContractReport { residual_error: 0.0, lift_error: 0.0 };
        for (i, &dist) in exact.iter().enumerate() {
            let row = a.row(i);
            let slack = 1e-9 * row.norm();
            let lift_gap = (lifted.row(i).transpose() - &row).norm();
            let rel = |excess: f64| {
                let excess = (excess - slack).max(0.0);
                if excess == 0.0 {
                    0.0
                } else if dist > 0.0 {
                    excess / dist
                } else {
                    f64::INFINITY
                }
            };
            report.residual_error = report.residual_error.max(rel((self.residuals[i] - dist).abs()));
            report.lift_error = report.lift_error.max(rel(lift_gap - dist));
        }
        Ok(report)
    }

    pub fn header(&self, seed: u64) -> ReducedRepHeader {
        ReducedRepHeader {
            n: self.n() as u64,
            d: self.basis.dim_ambient() as u64,
            c: self.dim_sub() as u64,
            eps: self.eps,
            seed,
            encoding: "f64-le".into(),
        }
    }

    /// Header `(n, d, c, eps, seed)`, then `B` column-major, `coords`
    /// row-major and the residuals, all little-endian.
    pub fn to_bytes(&self, seed: u64) -> Vec<u8> {
        let (n, c) = self.coords.shape();
        let d = self.basis.dim_ambient();
        let mut out = Vec::with_capacity(HEADER_BYTES + 8 * (d * c + n * c + n));
        for v in [n as u64, d as u64, c as u64] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&self.eps.to_le_bytes());
        out.extend_from_slice(&seed.to_le_bytes());
        for v in self.basis.matrix().iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for i in 0..n {
            for j in 0..c {
                out.extend_from_slice(&self.coords[(i, j)].to_le_bytes());
            }
        }
        for v in &self.residuals {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    /// Inverse of [`ReducedRep::to_bytes`]; also returns the stored seed.
    pub fn from_bytes(bytes: &[u8]) -> Result<(ReducedRep, u64)> {
        let word = |k: usize| -> [u8; 8] { bytes[8 * k..8 * k + 8].try_into().expect("8-byte slice") };
        if bytes.len() < HEADER_BYTES {
            return Err(Error::Format("reduced representation header truncated".into()));
        }
        let (n, d, c) = (u64::from_le_bytes(word(0)), u64::from_le_bytes(word(1)), u64::from_le_bytes(word(2)));
        let eps = f64::from_le_bytes(word(3));
        let seed = u64::from_le_bytes(word(4));
        let body = [d.checked_mul(c), n.checked_mul(c), Some(n)]
            .into_iter()
            .try_fold(0u64, |acc, x| x.and_then(|x| acc.checked_add(x)))
            .and_then(|w| w.checked_mul(8))
            .ok_or_else(|| Error::Format("header sizes overflow".into()))?;
        if (bytes.len() - HEADER_BYTES) as u64 != body {
            return Err(Error::Format(format!(
                "expected {body} payload bytes for n={n}, d={d}, c={c}, found {}",
                bytes.len() - HEADER_BYTES
            )));
        }
        let (n, d, c) = (n as usize, d as usize, c as usize);
        let mut k = HEADER_BYTES / 8;
        let mut next = || {
            let v = f64::from_le_bytes(word(k));
            k += 1;
            v
        };
        let b = DMatrix::from_iterator(d, c, (0..d * c).map(|_| next()));
        let coords = DMatrix::from_row_iterator(n, c, (0..n * c).map(|_| next()));
        let residuals = (0..n).map(|_| next()).collect();
        let basis = Basis::from_orthonormal(b)?;
        Ok((ReducedRep { basis, coords, residuals, eps }, seed))
    }

    /// Writes the binary file and a `<path>.json` header sidecar.
    pub fn write(&self, path: &Path, seed: u64) -> Result<()> {
        fs::write(path, self.to_bytes(seed)).map_err(Error::at(path))?;
        let sidecar = PathBuf::from(format!("{}.json", path.display()));
        fs::write(&sidecar, serde_json::to_vec_pretty(&self.header(seed))?).map_err(Error::at(&sidecar))?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<(ReducedRep, u64)> {
        ReducedRep::from_bytes(&fs::read(path).map_err(Error::at(path))?)
    }
}

/// `sum_i sqrt(dist(B x_i, S)^2 + v_i^2)`.
pub fn reduced_cost(rep: &ReducedRep, s: &Shape) -> Result<f64> {
    lifted_cost(&rep.lifted_points(), &rep.residuals, None, s)
}

/// The basis grown by [`dimension_reduction_traced`], with its history.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionTrace {
    pub basis: Basis,
    pub istar: usize,
    /// Columns of `B` after each completed iteration.
    pub checkpoints: Vec<usize>,
    /// Cost estimate reported by the refinement step of each iteration.
    pub cost_estimates: Vec<f64>,
    pub dense: Option<DenseStats>,
}

pub(crate) fn validate_reduction(a: &PointMatrix, k: usize, eps: f64) -> Result<()> {
    if k == 0 || k > a.ncols() {
        return Err(Error::Parameter(format!("k must be in 1..={}, got {k}", a.ncols())));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Parameter(format!("eps must be in (0, 1), got {eps}")));
    }
    Ok(())
}

/// Number of outer iterations: uniform in `1..=floor(10/eps)+1`, or the
/// maximum when `deterministic_istar` is set.
pub fn draw_istar<R: Rng + ?Sized>(eps: f64, cfg: &Constants, rng: &mut R) -> usize {
    let top = (10.0 / eps).floor() as usize + 1;
    if cfg.deterministic_istar {
        top
    } else {
        rng.random_range(1..=top)
    }
}

pub fn dimension_reduction<R: Rng + ?Sized>(a: &PointMatrix, k: usize, eps: f64, cfg: &Constants, rng: &mut R) -> Result<Basis> {
    Ok(dimension_reduction_traced(a, k, eps, cfg, rng)?.basis)
}

/// Repeats `B <- [B | eps_approx(poly_approx(B))]` for a random number of
/// rounds. Stops early once the residual vanishes or `B` spans `R^d`.
pub fn dimension_reduction_traced<R: Rng + ?Sized>(
    a: &PointMatrix,
    k: usize,
    eps: f64,
    cfg: &Constants,
    rng: &mut R,
) -> Result<ReductionTrace> {
    validate_reduction(a, k, eps)?;
    let d = a.ncols();
    let istar = draw_istar(eps, cfg, rng);
    let delta = eps / 100.0;
    let mut trace = ReductionTrace { basis: Basis::empty(d), istar, checkpoints: vec![], cost_estimates: vec![], dense: None };
    for _ in 0..istar {
        let b = &trace.basis;
        let x = poly_approx(a, b, k, delta, cfg, rng)?;
        let u = eps_approx(a, b, &x.basis, k, cfg.k_trust, eps, delta, cfg, rng)?;
        if u.basis.is_empty() {
            break;
        }
        trace.basis = trace.basis.concat(&u.basis)?;
        trace.checkpoints.push(trace.basis.dim_sub());
        trace.cost_estimates.push(u.cost_estimate);
        if trace.basis.dim_sub() == d {
            break;
        }
    }
    Ok(trace)
}

/// Counters from [`complete_dim_reduce_with_stats`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReduceStats {
    pub istar: usize,
    pub iterations: usize,
    pub dim: usize,
    pub sketches: usize,
    pub sketch_rows: usize,
    pub valid_sketches: usize,
    pub fallback_rows: usize,
    pub rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dense: Option<DenseStats>,
}

/// Reduced representation of `A` with `(1 +- eps)` shape costs.
pub fn complete_dim_reduce<R: Rng + ?Sized>(a: &PointMatrix, k: usize, eps: f64, cfg: &Constants, rng: &mut R) -> Result<ReducedRep> {
    Ok(complete_dim_reduce_with_stats(a, k, eps, cfg, rng)?.0)
}

pub fn complete_dim_reduce_with_stats<R: Rng + ?Sized>(
    a: &PointMatrix,
    k: usize,
    eps: f64,
    cfg: &Constants,
    rng: &mut R,
) -> Result<(ReducedRep, ReduceStats)> {
    validate_reduction(a, k, eps)?;
    let inner = eps * eps / cfg.c_q;
    let trace = match cfg.path {
        PipelinePath::Sparse => dimension_reduction_traced(a, k, inner, cfg, rng)?,
        PipelinePath::Dense => dimension_reduction_dense_traced(a, k, inner, cfg, rng)?,
    };
    let (rep, ex) = extract_reduced_rep(a, trace.basis, eps, cfg, rng)?;
    let stats = ReduceStats {
        istar: trace.istar,
        iterations: trace.checkpoints.len(),
        dim: rep.dim_sub(),
        sketches: ex.sketches,
        sketch_rows: ex.sketch_rows,
        valid_sketches: ex.valid_sketches,
        fallback_rows: ex.fallback_rows,
        rows: a.nrows(),
        dense: trace.dense,
    };
    Ok((rep, stats))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExtractStats {
    pub sketches: usize,
    pub sketch_rows: usize,
    pub valid_sketches: usize,
    pub fallback_rows: usize,
}

/// One CountSketch restricted to its used buckets, with `S B = Q R` and the
/// projections of every `S a_i` onto `Q`.
struct SketchedRows {
    r: DMatrix<f64>,
    /// `n x c`, row `i` is `Q^T S a_i`.
    y: DMatrix<f64>,
    /// `||(I - QQ^T) S a_i||`.
    resid: Vec<f64>,
    /// Residual is zero up to rounding.
    zero: Vec<bool>,
}

fn sketch_rows<R: Rng + ?Sized>(a: &PointMatrix, b: &Basis, rows: usize, rng: &mut R) -> Result<Option<SketchedRows>> {
    let (d, c) = (b.dim_ambient(), b.dim_sub());
    let cs = CountSketch::new(rows, d, rng)?;
    let used = cs.used_buckets();
    let u = used.len();
    let local: Vec<(usize, f64)> = (0..d)
        .map(|l| {
            let (h, s) = cs.bucket(l);
            (used.binary_search(&h).expect("bucket is in use"), s)
        })
        .collect();
    if u < c {
        return Ok(None);
    }
    let mut sb = DMatrix::zeros(u, c);
    for (l, &(h, s)) in local.iter().enumerate() {
        for j in 0..c {
            sb[(h, j)] += s * b.matrix()[(l, j)];
        }
    }
    let (q, r) = if c == 0 {
        (DMatrix::zeros(u, 0), DMatrix::zeros(0, 0))
    } else {
        let sv = r_singular_values(&sb);
        let (lo, hi) = sv.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &s| (lo.min(s), hi.max(s)));
        if !(lo > 1e-10 * hi) {
            return Ok(None);
        }
        let qr = sb.qr();
        (qr.q(), qr.r())
    };
    let mut f = DMatrix::zeros(d, c);
    for (l, &(h, s)) in local.iter().enumerate() {
        for j in 0..c {
            f[(l, j)] = s * q[(h, j)];
        }
    }
    let y = a.mul(&f)?;
    let n = a.nrows();
    let mut resid = vec![0.0; n];
    let mut zero = vec![false; n];
    let mut scratch = vec![0.0; u];
    let mut touched = Vec::new();
    for i in 0..n {
        a.for_each_in_row(i, |l, v| {
            let (h, s) = local[l];
            if scratch[h] == 0.0 {
                touched.push(h);
            }
            scratch[h] += s * v;
        });
        let sa2: f64 = touched.iter().map(|&h| scratch[h] * scratch[h]).sum();
        let y2: f64 = y.row(i).iter().map(|v| v * v).sum();
        let mut r2 = sa2 - y2;
        if u == c {
            r2 = 0.0;
        } else if r2 < 1e-6 * sa2 {
            let mut sa = DVector::zeros(u);
            for &h in &touched {
                sa[h] = scratch[h];
            }
            r2 = (sa - &q * y.row(i).transpose()).norm_squared();
        }
        let rv = r2.max(0.0).sqrt();
        resid[i] = rv;
        zero[i] = sa2 == 0.0 || rv <= 1e-10 * sa2.sqrt();
        for &h in &touched {
            scratch[h] = 0.0;
        }
        touched.clear();
    }
    Ok(Some(SketchedRows { r, y, resid, zero }))
}

fn r_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Comparison data for the sketch pair `(j, j')`: with `C = R_j R_{j'}^{-1}`,
/// `C^T C = V diag(ev) V^T` and `p = V^T C^T`.
struct PairData {
    ct: DMatrix<f64>,
    ev: Vec<f64>,
    p: DMatrix<f64>,
}

fn pair_data(rj: &DMatrix<f64>, rjp: &DMatrix<f64>) -> Option<PairData> {
    let c = rj.nrows();
    if c == 0 {
        return Some(PairData { ct: DMatrix::zeros(0, 0), ev: vec![], p: DMatrix::zeros(0, 0) });
    }
    let ct = rjp.transpose().solve_lower_triangular(&rj.transpose())?;
    let eig = SymmetricEigen::new(&ct * ct.transpose());
    let p = eig.eigenvectors.tr_mul(&ct);
    Some(PairData { ct, ev: eig.eigenvalues.iter().copied().collect(), p })
}

/// Whether every eigenvalue of the arrowhead matrix `[[diag(ev), w], [w^T, alpha]]`
/// lies in `[lo, hi]`.
fn arrowhead_in_band(ev: &[f64], w: &[f64], alpha: f64, lo: f64, hi: f64) -> bool {
    if ev.iter().any(|&e| e < lo || e > hi) {
        return false;
    }
    let schur = |shift: &dyn Fn(f64) -> f64, corner: f64| -> bool {
        let mut acc = corner;
        for (&e, &wk) in ev.iter().zip(w) {
            let gap = shift(e);
            if gap <= 0.0 {
                if wk != 0.0 {
                    return false;
                }
                continue;
            }
            acc -= wk * wk / gap;
        }
        acc >= 0.0
    };
    schur(&|e| e - lo, alpha - lo) && schur(&|e| hi - e, hi - alpha)
}

/// Per-row coordinates and residuals in `basis` from a majority-consistent
/// CountSketch, falling back to the exact projection for rows where no sketch
/// wins the vote.
///
/// Sketch `j` is accepted for row `i` when, for at least half of the other
/// sketches `j'`, every generalized singular value between `S_j [B | a_i]`
/// and `S_{j'} [B | a_i]` lies in `[1 - band, 1 + band]` with
/// `band = check_band * eps^2`.
pub fn extract_reduced_rep<R: Rng + ?Sized>(
    a: &PointMatrix,
    basis: Basis,
    eps: f64,
    cfg: &Constants,
    rng: &mut R,
) -> Result<(ReducedRep, ExtractStats)> {
    if basis.dim_ambient() != a.ncols() {
        return Err(dim_mismatch("basis ambient dimension", a.ncols(), basis.dim_ambient()));
    }
    let (n, c) = (a.nrows(), basis.dim_sub());
    let t = ceil_count(cfg.c_cs_count * log2p2(n)).max(2);
    let rows = ceil_count(cfg.c_cs * ((c + 1) * (c + 1)) as f64);
    let band = cfg.check_band * eps * eps;
    let (lo, hi) = ((1.0 - band).max(0.0).powi(2), (1.0 + band).powi(2));
    let need = (t - 1).div_ceil(2);

    let sketches: Vec<Option<SketchedRows>> = (0..t).map(|_| sketch_rows(a, &basis, rows, rng)).collect::<Result<_>>()?;
    let valid = sketches.iter().filter(|s| s.is_some()).count();

    let mut coords = DMatrix::zeros(n, c);
    let mut residuals = vec![0.0; n];
    let mut pending: Vec<usize> = (0..n).collect();
    for (j, sj) in sketches.iter().enumerate() {
        let Some(sj) = sj else { continue };
        if pending.is_empty() {
            break;
        }
        let mut votes = vec![0usize; pending.len()];
        for (jp, sjp) in sketches.iter().enumerate() {
            let Some(sjp) = sjp.as_ref().filter(|_| jp != j) else { continue };
            let Some(pd) = pair_data(&sj.r, &sjp.r) else { continue };
            for (slot, &i) in pending.iter().enumerate() {
                let agree = match (sj.zero[i], sjp.zero[i]) {
                    (true, true) => pd.ev.iter().all(|&e| e >= lo && e <= hi),
                    (false, false) => {
                        let yj = sj.y.row(i).transpose();
                        let yjp = sjp.y.row(i).transpose();
                        let z = (yj - pd.ct.tr_mul(&yjp)) / sjp.resid[i];
                        let w = &pd.p * &z;
                        let rho = sj.resid[i] / sjp.resid[i];
                        let alpha = z.norm_squared() + rho * rho;
                        arrowhead_in_band(&pd.ev, w.as_slice(), alpha, lo, hi)
                    }
                    _ => false,
                };
                votes[slot] += agree as usize;
            }
        }
        let mut still = Vec::new();
        for (slot, &i) in pending.iter().enumerate() {
            if votes[slot] >= need {
                if c > 0 {
                    let x = sj
                        .r
                        .solve_upper_triangular(&sj.y.row(i).transpose())
                        .ok_or_else(|| Error::Conditioning("sketched basis lost rank".into()))?;
                    coords.row_mut(i).copy_from(&x.transpose());
                }
                residuals[i] = sj.resid[i];
            } else {
                still.push(i);
            }
        }
        pending = still;
    }

    let fallback_rows = pending.len();
    if !pending.is_empty() {
        let picked = a.select_rows(&pending);
        let x = &picked * basis.matrix();
        let rest = &picked - &x * basis.matrix().transpose();
        for (slot, &i) in pending.iter().enumerate() {
            coords.row_mut(i).copy_from(&x.row(slot));
            residuals[i] = rest.row(slot).norm();
        }
    }
    let stats = ExtractStats { sketches: t, sketch_rows: rows, valid_sketches: valid, fallback_rows };
    Ok((ReducedRep { basis, coords, residuals, eps }, stats))
}
