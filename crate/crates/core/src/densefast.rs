//! Dense-input fast path: block-partitioned two-level sampling.
//!
//! Rows are split into `b` equal blocks. Cauchy sketches of each block give
//! cheap estimates of the block's total sampling mass; a draw first picks a
//! block by its estimate and only then computes exact per-row probabilities
//! inside that block. All left products `sketch * A` needed in one outer
//! iteration are formed in a single pass over `A` by [`precompute_products`].

use std::f64::consts::FRAC_PI_2;
use std::ops::Range;

use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::Serialize;

use crate::basis::Basis;
use crate::bicriteria::{
    extend_with_rows, is_zero_residual, residual_cost, residual_sample_count, sampled_rowspace,
    sketch_cols, trial_count, BicriteriaResult, Candidate, ZERO_RESIDUAL_TOL,
};
use crate::config::{ceil_count, log2p2, Constants};
use crate::dimreduce::{draw_istar, validate_reduction, ReductionTrace};
use crate::embeddings::{r_inverse, SamplingMatrix};
use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{independent_columns, max_abs, median, RANK_TOL};
use crate::matrix::PointMatrix;
use crate::sketching::{cauchy_sketch, gaussian_sketch};

/// Equal-size partition of `0..n` into contiguous blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    blocks: Vec<Range<usize>>,
}

impl BlockPartition {
    /// `b` blocks whose sizes differ by at most one; `b` is clamped to `1..=n`.
    pub fn equal(n: usize, b: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("cannot partition zero rows".into()));
        }
        let b = b.clamp(1, n);
        let (base, extra) = (n / b, n % b);
        let mut start = 0;
        let blocks = (0..b)
            .map(|j| {
                let len = base + usize::from(j < extra);
                let r = start..start + len;
                start += len;
                r
            })
            .collect();
        Ok(Self { blocks })
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }

    pub fn block(&self, j: usize) -> Range<usize> {
        self.blocks[j].clone()
    }

    pub fn n(&self) -> usize {
        self.blocks.last().map_or(0, |r| r.end)
    }

    pub fn max_block(&self) -> usize {
        self.blocks.iter().map(|r| r.len()).max().unwrap_or(0)
    }
}

/// A left sketch applied to the rows `rows` of `A`; `sketch` has `rows.len()` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SketchRequest {
    pub rows: Range<usize>,
    pub sketch: DMatrix<f64>,
}

impl SketchRequest {
    pub fn full(sketch: DMatrix<f64>) -> Self {
        Self { rows: 0..sketch.ncols(), sketch }
    }

    pub fn block(rows: Range<usize>, sketch: DMatrix<f64>) -> Self {
        Self { rows, sketch }
    }
}

/// Every `sketch * A[rows]` in the stack, accumulated in one pass over row chunks of `A`.
pub fn precompute_products(a: &PointMatrix, stack: &[SketchRequest]) -> Result<Vec<DMatrix<f64>>> {
    const CHUNK: usize = 512;
    let n = a.nrows();
    for req in stack {
        if req.rows.end > n || req.sketch.ncols() != req.rows.len() {
            return Err(dim_mismatch("sketch columns vs rows", req.rows.len(), req.sketch.ncols()));
        }
    }
    let mut out: Vec<DMatrix<f64>> = stack.iter().map(|r| DMatrix::zeros(r.sketch.nrows(), a.ncols())).collect();
    let mut start = 0;
    while start < n {
        let end = (start + CHUNK).min(n);
        for (req, acc) in stack.iter().zip(out.iter_mut()) {
            let (lo, hi) = (start.max(req.rows.start), end.min(req.rows.end));
            if lo >= hi {
                continue;
            }
            let cols = req.sketch.columns(lo - req.rows.start, hi - lo).into_owned();
            *acc += a.left_mul_rows(&cols, lo..hi)?;
        }
        start = end;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EstimateKind {
    L1LeverageSum,
    ResidualNormSum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockEstimates {
    pub apx: Vec<f64>,
    pub kind: EstimateKind,
}

/// Instrumentation for the dense path.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DenseStats {
    pub blocks: usize,
    /// Single passes over `A` made by [`precompute_products`].
    pub passes: usize,
    pub draws: usize,
    /// Blocks whose exact per-row probabilities were computed.
    pub blocks_evaluated: usize,
    /// Rows whose exact probabilities were computed during sampling.
    pub rows_evaluated: usize,
    /// Rows summed exactly because their block was no larger than the Cauchy sketch.
    pub estimate_rows_exact: usize,
}

/// Rows of each block Cauchy sketch: `ceil(c_c log2(n b + 2))`.
pub fn block_sketch_rows(n: usize, b: usize, cfg: &Constants) -> usize {
    ceil_count(cfg.c_c * log2p2(n.saturating_mul(b)))
}

/// Independent Cauchy sketches for blocks larger than `rows`; smaller blocks get `None`
/// and are summed exactly.
pub fn block_cauchy<R: Rng + ?Sized>(part: &BlockPartition, rows: usize, rng: &mut R) -> Result<Vec<Option<DMatrix<f64>>>> {
    part.blocks()
        .iter()
        .map(|r| {
            if r.len() > rows {
                Ok(Some(cauchy_sketch(rows, r.len(), rng)?.into_matrix()))
            } else {
                Ok(None)
            }
        })
        .collect()
}

/// `sum_col median |(C_j A_{I_j}) right|_col`, or the exact `||A_{I_j} right||` entrywise l1
/// norm for blocks without a sketch.
fn block_l1_sums(
    a: &PointMatrix,
    part: &BlockPartition,
    products: &[Option<DMatrix<f64>>],
    right: &DMatrix<f64>,
    stats: &mut DenseStats,
) -> Result<Vec<f64>> {
    part.blocks()
        .iter()
        .zip(products)
        .map(|(range, prod)| match prod {
            Some(ca) => {
                let m = ca * right;
                Ok(m.column_iter()
                    .map(|col| {
                        let mut v: Vec<f64> = col.iter().map(|x| x.abs()).collect();
                        median(&mut v)
                    })
                    .sum())
            }
            None => {
                stats.estimate_rows_exact += range.len();
                let rows: Vec<usize> = range.clone().collect();
                Ok((a.select_rows(&rows) * right).iter().map(|x| x.abs()).sum())
            }
        })
        .collect()
}

/// `(I - B B^T) m`.
fn project_out(b: &Basis, m: &DMatrix<f64>) -> DMatrix<f64> {
    if b.is_empty() {
        m.clone()
    } else {
        m - b.matrix() * b.matrix().tr_mul(m)
    }
}

fn check_estimator_inputs(a: &PointMatrix, b: &Basis, right: &DMatrix<f64>, part: &BlockPartition, products: usize) -> Result<()> {
    if b.dim_ambient() != a.ncols() {
        return Err(dim_mismatch("basis ambient dimension", a.ncols(), b.dim_ambient()));
    }
    if right.nrows() != a.ncols() {
        return Err(dim_mismatch("sketch rows", a.ncols(), right.nrows()));
    }
    if part.n() != a.nrows() || products != part.len() {
        return Err(dim_mismatch("blocks", part.len(), products));
    }
    Ok(())
}

/// Block sums of the l1 leverage scores `||A_i (I - BB^T) S^T R^{-1}||_1`.
///
/// `s_t` is the `d x m` matrix `S^T`; `c1_products[j]` is `C_1 A_{I_j}` (or
/// `None` to sum block `j` exactly).
pub fn block_l1_leverage_sums(
    a: &PointMatrix,
    b: &Basis,
    s_t: &DMatrix<f64>,
    r_inv: &DMatrix<f64>,
    part: &BlockPartition,
    c1_products: &[Option<DMatrix<f64>>],
) -> Result<BlockEstimates> {
    check_estimator_inputs(a, b, s_t, part, c1_products.len())?;
    if s_t.ncols() != r_inv.nrows() {
        return Err(dim_mismatch("R^{-1} rows", s_t.ncols(), r_inv.nrows()));
    }
    let right = project_out(b, s_t) * r_inv;
    let apx = block_l1_sums(a, part, c1_products, &right, &mut DenseStats::default())?;
    Ok(BlockEstimates { apx, kind: EstimateKind::L1LeverageSum })
}

/// Block sums of `||A_i (I - BB^T)(I - XX^T)||_2`, estimated as
/// `sqrt(pi/2)/t * sum_col median |(C_1 A_{I_j})(I - BB^T)(I - XX^T) G|_col`
/// for a standard Gaussian `G` with `t` columns.
pub fn block_residual_sums(
    a: &PointMatrix,
    b: &Basis,
    xhat: &Basis,
    g: &DMatrix<f64>,
    part: &BlockPartition,
    c1_products: &[Option<DMatrix<f64>>],
) -> Result<BlockEstimates> {
    check_estimator_inputs(a, b, g, part, c1_products.len())?;
    if xhat.dim_ambient() != a.ncols() {
        return Err(dim_mismatch("xhat ambient dimension", a.ncols(), xhat.dim_ambient()));
    }
    let right = project_out(b, &project_out(xhat, g));
    let scale = FRAC_PI_2.sqrt() / g.ncols() as f64;
    let apx = block_l1_sums(a, part, c1_products, &right, &mut DenseStats::default())?
        .into_iter()
        .map(|v| v * scale)
        .collect();
    Ok(BlockEstimates { apx, kind: EstimateKind::ResidualNormSum })
}

/// Draws from [`two_level_sample`] and how much exact work they needed.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLevelSample {
    pub sample: SamplingMatrix,
    pub blocks_evaluated: usize,
    pub rows_evaluated: usize,
}

/// `count` i.i.d. draws: block `j` with probability `apx_j / sum(apx)`, then
/// row `i` in block `j` with probability `p_i / sum_{I_j} p`. Each pick is
/// scaled by `1 / (count * p_hat_i)`. `within` is called at most once per
/// distinct sampled block.
///
/// A sampled block whose exact probabilities are all zero is sampled uniformly.
pub fn two_level_sample<R, F>(
    estimates: &BlockEstimates,
    part: &BlockPartition,
    mut within: F,
    count: usize,
    rng: &mut R,
) -> Result<TwoLevelSample>
where
    R: Rng + ?Sized,
    F: FnMut(usize) -> Result<Vec<f64>>,
{
    if count == 0 {
        return Err(Error::Parameter("sample count must be at least 1".into()));
    }
    if estimates.apx.len() != part.len() {
        return Err(dim_mismatch("block estimates", part.len(), estimates.apx.len()));
    }
    let total: f64 = estimates.apx.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::Degenerate("all block estimates are zero".into()));
    }
    let outer = WeightedIndex::new(&estimates.apx).map_err(|e| Error::Degenerate(e.to_string()))?;
    let mut cache: Vec<Option<(Vec<f64>, f64, Option<WeightedIndex<f64>>)>> = vec![None; part.len()];
    let mut out = TwoLevelSample { sample: SamplingMatrix::new(vec![], part.n())?, blocks_evaluated: 0, rows_evaluated: 0 };
    let mut picks = Vec::with_capacity(count);
    for _ in 0..count {
        let j = outer.sample(rng);
        if cache[j].is_none() {
            let range = part.block(j);
            let p = within(j)?;
            if p.len() != range.len() {
                return Err(dim_mismatch("within-block probabilities", range.len(), p.len()));
            }
            out.blocks_evaluated += 1;
            out.rows_evaluated += range.len();
            let mass: f64 = p.iter().sum();
            let dist = if mass > 0.0 { Some(WeightedIndex::new(&p).map_err(|e| Error::Degenerate(e.to_string()))?) } else { None };
            cache[j] = Some((p, mass, dist));
        }
        let (p, mass, dist) = cache[j].as_ref().expect("block cached");
        let len = p.len();
        let (local, q) = match dist {
            Some(d) => {
                let l = d.sample(rng);
                (l, p[l] / mass)
            }
            None => (rng.random_range(0..len), 1.0 / len as f64),
        };
        let phat = estimates.apx[j] / total * q;
        picks.push((part.block(j).start + local, 1.0 / (count as f64 * phat)));
    }
    out.sample = SamplingMatrix::new(picks, part.n())?;
    Ok(out)
}

/// Number of picks per dense-path trial: `ceil(c_d k^3.5 log2(k+2))`.
pub fn dense_samples(k: usize, cfg: &Constants) -> usize {
    ceil_count(cfg.c_d * (k as f64).powf(3.5) * log2p2(k))
}

/// Default block count `max(1, ceil(k^3.5 / eps^3))`, overridable via `cfg.blocks`, clamped to `n`.
pub fn default_blocks(n: usize, k: usize, eps: f64, cfg: &Constants) -> usize {
    cfg.blocks
        .unwrap_or_else(|| ceil_count((k as f64).powf(3.5) / eps.powi(3)))
        .clamp(1, n.max(1))
}

struct PolyPlan {
    s: Vec<DMatrix<f64>>,
    pi: Vec<DMatrix<f64>>,
    lev: Vec<Option<DMatrix<f64>>>,
}

/// Sketches for one outer iteration, drawn before `A` is touched.
struct Plan {
    poly: Option<PolyPlan>,
    res: Option<Vec<Option<DMatrix<f64>>>>,
    cost: DMatrix<f64>,
}

/// `sketch * A` products for a [`Plan`].
struct Products {
    pi_a: Vec<DMatrix<f64>>,
    lev_a: Vec<Option<DMatrix<f64>>>,
    res_a: Vec<Option<DMatrix<f64>>>,
    cost_a: DMatrix<f64>,
}

struct DenseContext<'a> {
    a: &'a PointMatrix,
    part: BlockPartition,
    rows_c: usize,
    cfg: &'a Constants,
    stats: DenseStats,
}

impl<'a> DenseContext<'a> {
    fn new(a: &'a PointMatrix, blocks: usize, cfg: &'a Constants) -> Result<Self> {
        let part = BlockPartition::equal(a.nrows(), blocks)?;
        let rows_c = block_sketch_rows(a.nrows(), part.len(), cfg);
        let stats = DenseStats { blocks: part.len(), ..DenseStats::default() };
        Ok(Self { a, part, rows_c, cfg, stats })
    }

    fn plan<R: Rng + ?Sized>(&self, poly: Option<(usize, f64)>, with_res: bool, rng: &mut R) -> Result<Plan> {
        let (n, d) = (self.a.nrows(), self.a.ncols());
        let poly = match poly {
            Some((k, delta)) => {
                let cols = sketch_cols(k, delta, d, self.cfg);
                let pi_rows = ceil_count(self.cfg.c_w * cols as f64 * log2p2(cols)).max(cols);
                let mut s = vec![];
                let mut pi = vec![];
                for _ in 0..trial_count(delta) {
                    s.push(gaussian_sketch(d, cols, 1.0, rng)?.into_matrix());
                    pi.push(cauchy_sketch(pi_rows, n, rng)?.into_matrix());
                }
                let lev = block_cauchy(&self.part, self.rows_c, rng)?;
                Some(PolyPlan { s, pi, lev })
            }
            None => None,
        };
        let res = if with_res { Some(block_cauchy(&self.part, self.rows_c, rng)?) } else { None };
        let cost = cauchy_sketch(self.rows_c, n, rng)?.into_matrix();
        Ok(Plan { poly, res, cost })
    }

    /// Forms every product of the plan in one pass over `A`.
    fn products(&mut self, plan: &Plan) -> Result<Products> {
        let mut stack = vec![SketchRequest::full(plan.cost.clone())];
        let push_blocks = |stack: &mut Vec<SketchRequest>, sk: &[Option<DMatrix<f64>>]| {
            for (range, c) in self.part.blocks().iter().zip(sk) {
                if let Some(c) = c {
                    stack.push(SketchRequest::block(range.clone(), c.clone()));
                }
            }
        };
        if let Some(p) = &plan.poly {
            stack.extend(p.pi.iter().cloned().map(SketchRequest::full));
            push_blocks(&mut stack, &p.lev);
        }
        if let Some(r) = &plan.res {
            push_blocks(&mut stack, r);
        }
        let mut out = precompute_products(self.a, &stack)?.into_iter();
        self.stats.passes += 1;
        let cost_a = out.next().expect("cost product");
        let unpack = |sk: &[Option<DMatrix<f64>>], out: &mut std::vec::IntoIter<DMatrix<f64>>| -> Vec<Option<DMatrix<f64>>> {
            sk.iter().map(|c| c.as_ref().map(|_| out.next().expect("block product"))).collect()
        };
        let (pi_a, lev_a) = match &plan.poly {
            Some(p) => {
                let pi_a: Vec<_> = (0..p.pi.len()).map(|_| out.next().expect("pi product")).collect();
                (pi_a, unpack(&p.lev, &mut out))
            }
            None => (vec![], vec![]),
        };
        let res_a = match &plan.res {
            Some(r) => unpack(r, &mut out),
            None => vec![],
        };
        Ok(Products { pi_a, lev_a, res_a, cost_a })
    }

    /// Cost of `[B | X]`: exact, or the Cauchy-median / Gaussian composite estimate.
    fn cost(&self, b: &Basis, x: &Basis, cost_a: &DMatrix<f64>, g: &DMatrix<f64>) -> Result<f64> {
        if self.cfg.exact_cost {
            return residual_cost(self.a, &[b, x]);
        }
        let m = cost_a * project_out(b, &project_out(x, g));
        let scale = FRAC_PI_2.sqrt() / g.ncols() as f64;
        Ok(scale
            * m.column_iter()
                .map(|col| {
                    let mut v: Vec<f64> = col.iter().map(|x| x.abs()).collect();
                    median(&mut v)
                })
                .sum::<f64>())
    }

    fn poly_trial<R: Rng + ?Sized>(
        &mut self,
        b: &Basis,
        k: usize,
        s: &DMatrix<f64>,
        pi_a: &DMatrix<f64>,
        lev_a: &[Option<DMatrix<f64>>],
        rng: &mut R,
    ) -> Result<Candidate> {
        let full = pi_a * s;
        let sketched = project_out_left(&full, pi_a, b, s);
        if is_zero_residual(&sketched, max_abs(&full)) {
            return Ok(Candidate::ZeroResidual);
        }
        let keep = independent_columns(&sketched, RANK_TOL);
        let s_sel = s.select_columns(keep.iter());
        let r_inv = r_inverse(&sketched.select_columns(keep.iter()))?;
        let right = project_out(b, &s_sel) * &r_inv;
        let apx = block_l1_sums(self.a, &self.part, lev_a, &right, &mut self.stats)?;
        let est = BlockEstimates { apx, kind: EstimateKind::L1LeverageSum };
        let cr = cauchy_sketch(keep.len(), self.rows_c, rng)?.into_matrix();
        let probe = &right * cr;
        let (a, part) = (self.a, &self.part);
        let draw = two_level_sample(
            &est,
            part,
            |j| {
                let rows: Vec<usize> = part.block(j).collect();
                let p = a.select_rows(&rows) * &probe;
                Ok(p.row_iter()
                    .map(|r| {
                        let mut v: Vec<f64> = r.iter().map(|x| x.abs()).collect();
                        median(&mut v)
                    })
                    .collect())
            },
            dense_samples(k, self.cfg),
            rng,
        )?;
        self.record(&draw);
        let rows = a.select_rows(&draw.sample.distinct_rows());
        Ok(Candidate::Basis(sampled_rowspace(&rows, b)))
    }

    fn record(&mut self, draw: &TwoLevelSample) {
        self.stats.draws += draw.sample.len();
        self.stats.blocks_evaluated += draw.blocks_evaluated;
        self.stats.rows_evaluated += draw.rows_evaluated;
    }

    fn poly<R: Rng + ?Sized>(&mut self, b: &Basis, k: usize, plan: &Plan, prod: &Products, rng: &mut R) -> Result<BicriteriaResult> {
        let poly = plan.poly.as_ref().expect("plan includes poly sketches");
        let t = self.cfg.cost_sketch_cols(self.a.nrows());
        let g = gaussian_sketch(self.a.ncols(), t, 1.0, rng)?.into_matrix();
        let mut best: Option<(Basis, f64)> = None;
        for tr in 0..poly.s.len() {
            let x = match self.poly_trial(b, k, &poly.s[tr], &prod.pi_a[tr], &prod.lev_a, rng)? {
                Candidate::ZeroResidual => {
                    return Ok(BicriteriaResult { basis: Basis::empty(self.a.ncols()), cost_estimate: 0.0, trials_run: tr + 1 })
                }
                Candidate::Basis(x) => x,
            };
            let cost = self.cost(b, &x, &prod.cost_a, &g)?;
            if best.as_ref().is_none_or(|(_, c)| cost < *c) {
                best = Some((x, cost));
            }
        }
        let (basis, cost_estimate) = best.expect("at least one trial");
        Ok(BicriteriaResult { basis, cost_estimate, trials_run: poly.s.len() })
    }

    #[allow(clippy::too_many_arguments)]
    fn eps<R: Rng + ?Sized>(
        &mut self,
        b: &Basis,
        xhat: &Basis,
        k: usize,
        big_k: f64,
        eps: f64,
        delta: f64,
        prod: &Products,
        rng: &mut R,
    ) -> Result<BicriteriaResult> {
        let (n, d) = (self.a.nrows(), self.a.ncols());
        let t = self.cfg.residual_sketch_cols(n);
        let g = gaussian_sketch(d, t, 1.0, rng)?.into_matrix();
        let right = project_out(b, &project_out(xhat, &g));
        let scale = FRAC_PI_2.sqrt() / t as f64;
        let apx: Vec<f64> = block_l1_sums(self.a, &self.part, &prod.res_a, &right, &mut self.stats)?
            .into_iter()
            .map(|v| v * scale)
            .collect();
        let reference: f64 = block_l1_sums(self.a, &self.part, &prod.res_a, &g, &mut DenseStats::default())?.iter().sum::<f64>() * scale;
        if apx.iter().sum::<f64>() <= ZERO_RESIDUAL_TOL * reference {
            return Ok(BicriteriaResult { basis: xhat.clone(), cost_estimate: 0.0, trials_run: 1 });
        }
        let est = BlockEstimates { apx, kind: EstimateKind::ResidualNormSum };
        let (a, part) = (self.a, &self.part);
        let count = residual_sample_count(n, k, big_k, eps, delta, self.cfg);
        let draw = two_level_sample(
            &est,
            part,
            |j| {
                let rows: Vec<usize> = part.block(j).collect();
                let p = a.select_rows(&rows) * &right;
                Ok(p.row_iter().map(|r| r.norm()).collect())
            },
            count,
            rng,
        )?;
        self.record(&draw);
        let mut seen = vec![false; n];
        let mut rows = Vec::new();
        for &(i, _) in draw.sample.picks() {
            if !seen[i] {
                seen[i] = true;
                rows.push(i);
            }
        }
        let u = extend_with_rows(a, b, xhat, &rows);
        let gc = gaussian_sketch(d, self.cfg.cost_sketch_cols(n), 1.0, rng)?.into_matrix();
        let cost_estimate = self.cost(b, &u, &prod.cost_a, &gc)?;
        Ok(BicriteriaResult { basis: u, cost_estimate, trials_run: 1 })
    }
}

/// `Pi A (I - BB^T) S` from `Pi A S` and `Pi A`.
fn project_out_left(full: &DMatrix<f64>, pi_a: &DMatrix<f64>, b: &Basis, s: &DMatrix<f64>) -> DMatrix<f64> {
    if b.is_empty() {
        full.clone()
    } else {
        full - (pi_a * b.matrix()) * b.matrix().tr_mul(s)
    }
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

/// Dense-path counterpart of [`crate::bicriteria::poly_approx`] with `blocks` row blocks.
pub fn poly_approx_dense<R: Rng + ?Sized>(
    a: &PointMatrix,
    b: &Basis,
    k: usize,
    delta: f64,
    blocks: usize,
    cfg: &Constants,
    rng: &mut R,
) -> Result<(BicriteriaResult, DenseStats)> {
    validate(a, b, k, delta)?;
    let mut ctx = DenseContext::new(a, blocks, cfg)?;
    let plan = ctx.plan(Some((k, delta)), false, rng)?;
    let prod = ctx.products(&plan)?;
    let r = ctx.poly(b, k, &plan, &prod, rng)?;
    Ok((r, ctx.stats))
}

/// Dense-path counterpart of [`crate::bicriteria::eps_approx`] with `blocks` row blocks.
#[allow(clippy::too_many_arguments)]
pub fn eps_approx_dense<R: Rng + ?Sized>(
    a: &PointMatrix,
    b: &Basis,
    xhat: &Basis,
    k: usize,
    big_k: f64,
    eps: f64,
    delta: f64,
    blocks: usize,
    cfg: &Constants,
    rng: &mut R,
) -> Result<(BicriteriaResult, DenseStats)> {
    validate(a, b, k, delta)?;
    if xhat.dim_ambient() != a.ncols() {
        return Err(dim_mismatch("xhat ambient dimension", a.ncols(), xhat.dim_ambient()));
    }
    if !(eps > 0.0) || !(big_k >= 1.0) {
        return Err(Error::Parameter(format!("need eps > 0 and K >= 1, got eps={eps}, K={big_k}")));
    }
    let mut ctx = DenseContext::new(a, blocks, cfg)?;
    let plan = ctx.plan(None, true, rng)?;
    let prod = ctx.products(&plan)?;
    let r = ctx.eps(b, xhat, k, big_k, eps, delta, &prod, rng)?;
    Ok((r, ctx.stats))
}

pub fn dimension_reduction_dense<R: Rng + ?Sized>(a: &PointMatrix, k: usize, eps: f64, cfg: &Constants, rng: &mut R) -> Result<Basis> {
    Ok(dimension_reduction_dense_traced(a, k, eps, cfg, rng)?.basis)
}

/// Dense-path reduction loop with `delta = eps / 10` and one pass over `A`
/// per outer iteration.
pub fn dimension_reduction_dense_traced<R: Rng + ?Sized>(
    a: &PointMatrix,
    k: usize,
    eps: f64,
    cfg: &Constants,
    rng: &mut R,
) -> Result<ReductionTrace> {
    validate_reduction(a, k, eps)?;
    let d = a.ncols();
    let istar = draw_istar(eps, cfg, rng);
    let delta = eps / 10.0;
    let mut ctx = DenseContext::new(a, default_blocks(a.nrows(), k, eps, cfg), cfg)?;
    let mut trace = ReductionTrace { basis: Basis::empty(d), istar, checkpoints: vec![], cost_estimates: vec![], dense: None };
    for _ in 0..istar {
        let plan = ctx.plan(Some((k, delta)), true, rng)?;
        let prod = ctx.products(&plan)?;
        let b = trace.basis.clone();
        let x = ctx.poly(&b, k, &plan, &prod, rng)?;
        let u = ctx.eps(&b, &x.basis, k, cfg.k_trust, eps, delta, &prod, rng)?;
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
    trace.dense = Some(ctx.stats);
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngConfig;

    #[test]
    fn partition_sizes_differ_by_at_most_one() {
        let p = BlockPartition::equal(10, 3).unwrap();
        let sizes: Vec<usize> = p.blocks().iter().map(|r| r.len()).collect();
        assert_eq!(sizes, vec![4, 3, 3]);
        assert_eq!(p.n(), 10);
        assert_eq!(BlockPartition::equal(5, 99).unwrap().len(), 5);
        assert_eq!(BlockPartition::equal(5, 0).unwrap().len(), 1);
    }

    #[test]
    fn identity_row_request_selects_first_row() {
        let a = DMatrix::from_fn(4, 3, |i, j| (i * 3 + j) as f64);
        let mut e1 = DMatrix::zeros(1, 4);
        e1[(0, 0)] = 1.0;
        let out = precompute_products(&PointMatrix::Dense(a.clone()), &[SketchRequest::full(e1)]).unwrap();
        assert_eq!(out[0], a.rows(0, 1).into_owned());
        assert!(precompute_products(&PointMatrix::Dense(a), &[]).unwrap().is_empty());
    }

    #[test]
    fn concentrated_mass_stays_in_first_block() {
        let part = BlockPartition::equal(40, 4).unwrap();
        let est = BlockEstimates { apx: vec![1.0, 1e-9, 1e-9, 1e-9], kind: EstimateKind::L1LeverageSum };
        let mut rng = RngConfig::new(1).rng();
        let s = two_level_sample(&est, &part, |_| Ok(vec![1.0; 10]), 1000, &mut rng).unwrap();
        let first = s.sample.picks().iter().filter(|p| p.0 < 10).count();
        assert!(first >= 990);
        assert!(s.rows_evaluated <= part.max_block() * 1000);
    }

    #[test]
    fn all_zero_estimates_rejected() {
        let part = BlockPartition::equal(4, 2).unwrap();
        let est = BlockEstimates { apx: vec![0.0, 0.0], kind: EstimateKind::L1LeverageSum };
        let mut rng = RngConfig::new(1).rng();
        assert!(two_level_sample(&est, &part, |_| Ok(vec![1.0; 2]), 3, &mut rng).is_err());
    }
}
