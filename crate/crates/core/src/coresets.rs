//! Weighted coresets built on top of a [`ReducedRep`].
//!
//! Point `i` is lifted to `(x_i, v_i)` in `R^{c+1}`; its distance to a shape
//! `S` in `R^d` is `sqrt(dist(B x_i, S)^2 + v_i^2)`. Coresets sample lifted
//! rows and reweight them so that the weighted sum approximates the full sum.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::basis::Basis;
use crate::config::{ceil_count, log2p2, Constants};
use crate::dimreduce::{lifted_cost, shape_distance, ReducedRep, Shape};
use crate::embeddings::{default_lewis_iterations, lewis_sample, lewis_weights_with};
use crate::error::{Error, Result};
use crate::linalg::{independent_columns, RANK_TOL};
use crate::sketching::gaussian_sketch;

/// Rows `[x_i | v_i]` of a reduced representation, with the basis they refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedRep {
    pub basis: Basis,
    /// `n x (c+1)`.
    pub points: DMatrix<f64>,
}

impl LiftedRep {
    pub fn from_rep(rep: &ReducedRep) -> LiftedRep {
        let (n, c) = rep.coords.shape();
        let mut points = DMatrix::zeros(n, c + 1);
        points.columns_mut(0, c).copy_from(&rep.coords);
        points.set_column(c, &DVector::from_column_slice(&rep.residuals));
        LiftedRep { basis: rep.basis.clone(), points }
    }

    pub fn n(&self) -> usize {
        self.points.nrows()
    }

    /// `sqrt(dist(B x_i, S)^2 + v_i^2)`.
    pub fn distance(&self, i: usize, s: &Shape) -> Result<f64> {
        let c = self.basis.dim_sub();
        let x = self.points.row(i).columns(0, c).transpose();
        let dist = shape_distance(&self.basis.lift(&x), s)?;
        Ok(dist.hypot(self.points[(i, c)]))
    }

    pub fn cost(&self, s: &Shape) -> Result<f64> {
        (0..self.n()).map(|i| self.distance(i, s)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoresetKind {
    Subspace,
    Kmedian,
}

/// Weighted subset of lifted rows.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedCoreset {
    pub kind: CoresetKind,
    pub basis: Basis,
    /// Source row of each coreset row.
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
    /// `m x c` coordinates of the kept rows.
    pub coords: DMatrix<f64>,
    pub residuals: Vec<f64>,
    /// Size cap the sample was drawn under.
    pub budget: usize,
}

impl WeightedCoreset {
    fn from_picks(kind: CoresetKind, rep: &ReducedRep, mut picks: Vec<(usize, f64)>, budget: usize) -> WeightedCoreset {
        picks.sort_by_key(|p| p.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(picks.len());
        for (i, w) in picks {
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += w,
                _ => merged.push((i, w)),
            }
        }
        let indices: Vec<usize> = merged.iter().map(|p| p.0).collect();
        let coords = rep.coords.select_rows(indices.iter());
        let residuals = indices.iter().map(|&i| rep.residuals[i]).collect();
        WeightedCoreset {
            kind,
            basis: rep.basis.clone(),
            weights: merged.iter().map(|p| p.1).collect(),
            indices,
            coords,
            residuals,
            budget,
        }
    }

    fn full(kind: CoresetKind, rep: &ReducedRep, budget: usize) -> WeightedCoreset {
        WeightedCoreset::from_picks(kind, rep, (0..rep.n()).map(|i| (i, 1.0)).collect(), budget)
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// `sum_i w_i sqrt(dist(B x_i, S)^2 + v_i^2)` over the coreset rows.
pub fn coreset_query_cost(cs: &WeightedCoreset, s: &Shape) -> Result<f64> {
    let lifted = &cs.coords * cs.basis.matrix().transpose();
    lifted_cost(&lifted, &cs.residuals, Some(&cs.weights), s)
}

/// Effective size `min(budget, ceil(fraction * n))`.
fn effective_size(budget: usize, n: usize, cfg: &Constants) -> usize {
    budget.min(ceil_count(cfg.coreset_fraction * n as f64))
}

fn check_eps(k: usize, eps: f64, rep: &ReducedRep) -> Result<()> {
    if k == 0 {
        return Err(Error::Parameter("k must be at least 1".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Parameter(format!("eps must be in (0, 1), got {eps}")));
    }
    if rep.n() == 0 {
        return Err(Error::Degenerate("representation has no rows".into()));
    }
    Ok(())
}

/// Theoretical size cap `ceil(c_tc k^3 / eps^8 log2(n+2))` for the subspace coreset.
pub fn subspace_budget(n: usize, k: usize, eps: f64, cfg: &Constants) -> usize {
    ceil_count(cfg.c_tc * (k as f64).powi(3) / eps.powi(8) * log2p2(n))
}

/// Lewis-weight sampling coreset for (k,1)-subspace approximation on the lifted rows.
pub fn subspace_coreset<R: Rng + ?Sized>(rep: &ReducedRep, k: usize, eps: f64, cfg: &Constants, rng: &mut R) -> Result<WeightedCoreset> {
    check_eps(k, eps, rep)?;
    let n = rep.n();
    let budget = subspace_budget(n, k, eps, cfg);
    let m = effective_size(budget, n, cfg);
    if m >= n {
        return Ok(WeightedCoreset::full(CoresetKind::Subspace, rep, budget));
    }
    let lifted = LiftedRep::from_rep(rep);
    let cols = independent_columns(&lifted.points, RANK_TOL);
    if cols.is_empty() {
        return Ok(WeightedCoreset::from_picks(CoresetKind::Subspace, rep, vec![(0, n as f64)], budget));
    }
    let reduced = lifted.points.select_columns(cols.iter());
    let state = lewis_weights_with(&reduced, default_lewis_iterations(n), cfg.lewis_tolerance, cfg.lewis_max_iterations)?;
    let sample = lewis_sample(&state, m, rng)?;
    Ok(WeightedCoreset::from_picks(CoresetKind::Subspace, rep, sample.picks().to_vec(), budget))
}

/// A k-median solution with centers restricted to input rows.
#[derive(Debug, Clone, PartialEq)]
pub struct KMedianSolution {
    /// Row index of each center.
    pub centers: Vec<usize>,
    pub center_points: DMatrix<f64>,
    /// Position in `centers` of each point's nearest center.
    pub assignment: Vec<usize>,
    /// Sum of distances in the original space.
    pub cost: f64,
}

fn sq_dist(a: &DMatrix<f64>, i: usize, b: &DMatrix<f64>, j: usize) -> f64 {
    a.row(i).iter().zip(b.row(j).iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest center (by position in `centers`) and its distance for every point.
fn assign(points: &DMatrix<f64>, centers: &[usize]) -> Vec<(usize, f64)> {
    (0..points.nrows())
        .map(|i| {
            centers
                .iter()
                .enumerate()
                .map(|(slot, &c)| (slot, sq_dist(points, i, points, c)))
                .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
        })
        .map(|(slot, d2)| (slot, d2.sqrt()))
        .collect()
}

fn total(assignment: &[(usize, f64)]) -> f64 {
    assignment.iter().map(|a| a.1).sum()
}

/// Constant-factor k-median seeding: Gaussian JL projection to
/// `c_jl log2(n+2)` dimensions, distance-proportional seeding over input rows,
/// then one sweep of single-swap local search. Cost is reported in the
/// original space.
pub fn kmedian_seed<R: Rng + ?Sized>(points: &DMatrix<f64>, k: usize, cfg: &Constants, rng: &mut R) -> Result<KMedianSolution> {
    let (n, dim) = points.shape();
    if k == 0 || k > n {
        return Err(Error::Parameter(format!("k must be in 1..={n}, got {k}")));
    }
    let target = ceil_count(cfg.c_jl * log2p2(n));
    let proj = if target < dim {
        points * gaussian_sketch(dim, target, 1.0 / (target as f64).sqrt(), rng)?.into_matrix()
    } else {
        points.clone()
    };

    let mut centers = vec![rng.random_range(0..n)];
    let mut nearest: Vec<f64> = (0..n).map(|i| sq_dist(&proj, i, &proj, centers[0]).sqrt()).collect();
    while centers.len() < k {
        let mass: f64 = nearest.iter().sum();
        let next = if mass > 0.0 {
            WeightedIndex::new(&nearest).map_err(|e| Error::Degenerate(e.to_string()))?.sample(rng)
        } else {
            let free: Vec<usize> = (0..n).filter(|i| !centers.contains(i)).collect();
            free[rng.random_range(0..free.len())]
        };
        centers.push(next);
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(sq_dist(&proj, i, &proj, next).sqrt());
        }
    }

    let mut current = total(&assign(&proj, &centers));
    for slot in 0..k {
        let weights: Vec<f64> = assign(&proj, &centers).iter().map(|a| a.1).collect();
        if weights.iter().sum::<f64>() <= 0.0 {
            break;
        }
        let dist = WeightedIndex::new(&weights).map_err(|e| Error::Degenerate(e.to_string()))?;
        for _ in 0..cfg.swap_candidates {
            let cand = dist.sample(rng);
            if centers.contains(&cand) {
                continue;
            }
            let mut trial = centers.clone();
            trial[slot] = cand;
            let cost = total(&assign(&proj, &trial));
            if cost < current {
                current = cost;
                centers = trial;
            }
        }
    }

    let final_assign = assign(points, &centers);
    Ok(KMedianSolution {
        center_points: points.select_rows(centers.iter()),
        assignment: final_assign.iter().map(|a| a.0).collect(),
        cost: total(&final_assign),
        centers,
    })
}

/// Theoretical size cap `ceil(c_m (k / eps^2) S log2(n+2))` for total sensitivity `S`.
pub fn kmedian_budget(n: usize, k: usize, eps: f64, total_sensitivity: f64, cfg: &Constants) -> usize {
    ceil_count(cfg.c_m * k as f64 / (eps * eps) * total_sensitivity * log2p2(n))
}

/// Sensitivity-sampling coreset for k-median on the lifted rows, with
/// `s_i = d_i / sum(d) + 2 / |cluster(i)|` from [`kmedian_seed`].
pub fn kmedian_coreset<R: Rng + ?Sized>(rep: &ReducedRep, k: usize, eps: f64, cfg: &Constants, rng: &mut R) -> Result<WeightedCoreset> {
    check_eps(k, eps, rep)?;
    let n = rep.n();
    let lifted = LiftedRep::from_rep(rep);
    let identical = (1..n).all(|i| sq_dist(&lifted.points, i, &lifted.points, 0) == 0.0);
    if identical {
        return Ok(WeightedCoreset::from_picks(CoresetKind::Kmedian, rep, vec![(0, n as f64)], 1));
    }
    let sol = kmedian_seed(&lifted.points, k.min(n), cfg, rng)?;
    let mut sizes = vec![0usize; sol.centers.len()];
    for &a in &sol.assignment {
        sizes[a] += 1;
    }
    let dists: Vec<f64> = (0..n)
        .map(|i| sq_dist(&lifted.points, i, &sol.center_points, sol.assignment[i]).sqrt())
        .collect();
    let dsum: f64 = dists.iter().sum();
    let sens: Vec<f64> = (0..n)
        .map(|i| {
            let share = if dsum > 0.0 { dists[i] / dsum } else { 0.0 };
            share + 2.0 / sizes[sol.assignment[i]] as f64
        })
        .collect();
    let stotal: f64 = sens.iter().sum();
    let budget = kmedian_budget(n, k, eps, stotal, cfg);
    let m = effective_size(budget, n, cfg);
    if m >= n {
        return Ok(WeightedCoreset::full(CoresetKind::Kmedian, rep, budget));
    }
    let dist = WeightedIndex::new(&sens).map_err(|e| Error::Degenerate(e.to_string()))?;
    let picks = (0..m)
        .map(|_| {
            let i = dist.sample(rng);
            (i, stotal / (m as f64 * sens[i]))
        })
        .collect();
    Ok(WeightedCoreset::from_picks(CoresetKind::Kmedian, rep, picks, budget))
}

/// Basis file: `d`, `c` as little-endian u64, then the columns as little-endian f64.
pub fn basis_bytes(b: &Basis) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 8 * b.matrix().len());
    out.extend_from_slice(&(b.dim_ambient() as u64).to_le_bytes());
    out.extend_from_slice(&(b.dim_sub() as u64).to_le_bytes());
    for v in b.matrix().iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn basis_from_bytes(bytes: &[u8]) -> Result<Basis> {
    if bytes.len() < 16 {
        return Err(Error::Format("basis header truncated".into()));
    }
    let word = |k: usize| -> [u8; 8] { bytes[8 * k..8 * k + 8].try_into().expect("8-byte slice") };
    let (d, c) = (u64::from_le_bytes(word(0)) as usize, u64::from_le_bytes(word(1)) as usize);
    if d.checked_mul(c).and_then(|x| x.checked_mul(8)).map(|x| x + 16) != Some(bytes.len()) {
        return Err(Error::Format(format!("basis file size does not match {d}x{c}")));
    }
    let m = DMatrix::from_iterator(d, c, (0..d * c).map(|k| f64::from_le_bytes(word(k + 2))));
    Basis::from_orthonormal(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisRef {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoresetRow {
    pub index: usize,
    pub weight: f64,
    pub coords: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoresetFile {
    pub kind: CoresetKind,
    pub budget: usize,
    pub basis: BasisRef,
    pub rows: Vec<CoresetRow>,
}

impl WeightedCoreset {
    /// Writes the basis to `basis_path` and returns the JSON document referring to it.
    pub fn to_file(&self, basis_path: &Path) -> Result<CoresetFile> {
        let bytes = basis_bytes(&self.basis);
        fs::write(basis_path, &bytes).map_err(Error::at(basis_path))?;
        let rows = (0..self.len())
            .map(|r| CoresetRow {
                index: self.indices[r],
                weight: self.weights[r],
                coords: self.coords.row(r).iter().copied().collect(),
                residual: self.residuals[r],
            })
            .collect();
        Ok(CoresetFile {
            kind: self.kind,
            budget: self.budget,
            basis: BasisRef { path: basis_path.to_path_buf(), sha256: hex::encode(Sha256::digest(&bytes)) },
            rows,
        })
    }

    /// Loads a coreset, checking the basis file against its recorded hash.
    pub fn from_file(file: &CoresetFile) -> Result<WeightedCoreset> {
        let bytes = fs::read(&file.basis.path).map_err(Error::at(&file.basis.path))?;
        let digest = hex::encode(Sha256::digest(&bytes));
        if digest != file.basis.sha256 {
            return Err(Error::Format(format!("basis hash mismatch for {}", file.basis.path.display())));
        }
        let basis = basis_from_bytes(&bytes)?;
        let c = basis.dim_sub();
        if let Some(r) = file.rows.iter().find(|r| r.coords.len() != c) {
            return Err(Error::Format(format!("row {} has {} coordinates, expected {c}", r.index, r.coords.len())));
        }
        let m = file.rows.len();
        Ok(WeightedCoreset {
            kind: file.kind,
            budget: file.budget,
            indices: file.rows.iter().map(|r| r.index).collect(),
            weights: file.rows.iter().map(|r| r.weight).collect(),
            coords: DMatrix::from_row_iterator(m, c, file.rows.iter().flat_map(|r| r.coords.iter().copied())),
            residuals: file.rows.iter().map(|r| r.residual).collect(),
            basis,
        })
    }
}
