//! Subspace comparison experiments and their result records.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::basis::Basis;
use crate::config::{Constants, PipelinePath};
use crate::bicriteria::residual_row_norms;
use crate::coresets::kmedian_seed;
use crate::densefast::dimension_reduction_dense_traced;
use crate::dimreduce::{dimension_reduction_traced, exact_cost, reduced_cost, ReducedRep, Shape};
use crate::error::{Error, Result};
use crate::ingest::{ingest, InputFormat};
use crate::matrix::PointMatrix;
use crate::rng::{RngConfig, SketchRng};
use crate::sketching::gaussian_sketch;
use crate::synth::{synth_generate, SynthSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Paper,
    RandomSubspace,
    TopSvd,
}

/// One evaluated `(method, dimension, shape)` triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub method: Method,
    pub subspace_dim: usize,
    pub shape_id: String,
    pub approx_cost: f64,
    pub exact_cost: f64,
    /// `approx_cost / exact_cost`, or 1 when both vanish.
    pub ratio: f64,
    pub wall_time_ms: Option<f64>,
}

impl ResultRecord {
    pub fn new(method: Method, subspace_dim: usize, shape_id: &str, approx_cost: f64, exact_cost: f64) -> ResultRecord {
        let ratio = if exact_cost > 0.0 {
            approx_cost / exact_cost
        } else if approx_cost == 0.0 {
            1.0
        } else {
            f64::INFINITY
        };
        ResultRecord { method, subspace_dim, shape_id: shape_id.into(), approx_cost, exact_cost, ratio, wall_time_ms: None }
    }
}

/// Where the points come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputSpec {
    Synth(SynthSpec),
    File { path: PathBuf, format: InputFormat },
}

/// Which center sets to query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeQuery {
    /// The generator's centers (synthetic input only), else a k-median solution.
    Planted,
    /// `k` centers from [`kmedian_seed`].
    Kmedian,
    /// This many sets of `k` input rows chosen uniformly at random.
    RandomRows(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub input: InputSpec,
    pub k: usize,
    pub eps: f64,
    pub seed: u64,
    pub path: PipelinePath,
    /// Requested subspace dimensions; the reduction loop's checkpoints are added.
    pub dims_to_probe: Vec<usize>,
    pub shapes: ShapeQuery,
    #[serde(default)]
    pub constants: Constants,
    /// Record wall-clock time per record (breaks byte-for-byte reproducibility).
    #[serde(default)]
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::Parameter(format!("eps must be in (0, 1), got {}", self.eps)));
        }
        if self.k == 0 {
            return Err(Error::Parameter("k must be at least 1".into()));
        }
        if self.dims_to_probe.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Parameter("dims_to_probe must be sorted ascending".into()));
        }
        Ok(())
    }
}

/// Random and top-singular-vector bases of dimension `dims`.
#[derive(Debug, Clone, PartialEq)]
pub struct Baselines {
    pub random: Basis,
    pub top_svd: Basis,
}

/// Random orthonormal `d x dims` basis.
pub fn random_subspace<R: Rng + ?Sized>(d: usize, dims: usize, rng: &mut R) -> Result<Basis> {
    if dims > d {
        return Err(Error::Parameter(format!("dims {dims} exceeds ambient dimension {d}")));
    }
    let g = gaussian_sketch(d, dims, 1.0, rng)?.into_matrix();
    let b = Basis::spanning(&g);
    if b.dim_sub() != dims {
        return Err(Error::Conditioning("random Gaussian matrix lost rank".into()));
    }
    Ok(b)
}

/// Right singular vectors of `A` in decreasing order of singular value.
pub fn right_singular_vectors(a: &PointMatrix) -> Result<DMatrix<f64>> {
    let gram = a.tr_mul(&a.to_dense())?;
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    Ok(eig.eigenvectors.select_columns(order.iter()))
}

pub fn baseline_subspaces<R: Rng + ?Sized>(a: &PointMatrix, dims: usize, rng: &mut R) -> Result<Baselines> {
    let random = random_subspace(a.ncols(), dims, rng)?;
    let top_svd = Basis::from_orthonormal(right_singular_vectors(a)?.columns(0, dims).into_owned())?;
    Ok(Baselines { random, top_svd })
}

/// Rotates the columns added in each iteration (between consecutive
/// `checkpoints`) so that truncation keeps the directions with the largest
/// first-order drop in sum of distances: eigenvectors of
/// `sum_i y_i y_i^T / |r_i|`, where `y_i` are the block coordinates of `a_i`
/// and `r_i` its residual against the earlier columns. Spans at checkpoints
/// are unchanged.
pub fn order_by_gain(a: &PointMatrix, basis: &Basis, checkpoints: &[usize]) -> Result<Basis> {
    let mut cols = basis.matrix().clone();
    let mut start = 0;
    for &end in checkpoints.iter().filter(|&&c| c <= basis.dim_sub()) {
        if end <= start + 1 {
            start = end.max(start);
            continue;
        }
        let prior = Basis::from_orthonormal(cols.columns(0, start).into_owned())?;
        let norms = residual_row_norms(a, &[&prior])?;
        let block = cols.columns(start, end - start).into_owned();
        let y = a.mul(&block)?;
        let mut m = DMatrix::<f64>::zeros(end - start, end - start);
        for (i, &r) in norms.iter().enumerate() {
            if r > 0.0 {
                let yi = y.row(i);
                m += yi.transpose() * yi / r;
            }
        }
        let eig = SymmetricEigen::new(m);
        let mut order: Vec<usize> = (0..end - start).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        let rotated = block * eig.eigenvectors.select_columns(order.iter());
        cols.columns_mut(start, end - start).copy_from(&rotated);
        start = end;
    }
    Basis::from_orthonormal(cols)
}

fn load(cfg: &ExperimentConfig, rng: &mut SketchRng) -> Result<(PointMatrix, Option<DMatrix<f64>>)> {
    match &cfg.input {
        InputSpec::Synth(spec) => {
            let data = synth_generate(spec, rng)?;
            Ok((data.points, Some(data.centers)))
        }
        InputSpec::File { path, format } => Ok((ingest(path, *format)?, None)),
    }
}

fn query_shapes(cfg: &ExperimentConfig, a: &PointMatrix, planted: Option<DMatrix<f64>>, rng: &mut SketchRng) -> Result<Vec<(String, Shape)>> {
    let kmedian = |rng: &mut SketchRng| -> Result<Shape> {
        let sol = kmedian_seed(&a.to_dense(), cfg.k.min(a.nrows()), &cfg.constants, rng)?;
        Shape::centers(sol.center_points)
    };
    match (&cfg.shapes, planted) {
        (ShapeQuery::Planted, Some(c)) => Ok(vec![("planted".into(), Shape::centers(c)?)]),
        (ShapeQuery::Planted, None) | (ShapeQuery::Kmedian, _) => Ok(vec![("kmedian".into(), kmedian(rng)?)]),
        (ShapeQuery::RandomRows(count), _) => (0..*count)
            .map(|q| {
                let rows: Vec<usize> = (0..cfg.k).map(|_| rng.random_range(0..a.nrows())).collect();
                Ok((format!("rows{q}"), Shape::centers(a.select_rows(&rows))?))
            })
            .collect(),
    }
}

/// Runs the reduction loop, then compares the exact-projection representation
/// of the loop's basis (truncated to each probed dimension) against random and
/// top-singular bases of the same dimension. Records are handed to `sink` as
/// soon as they are computed.
pub fn run_experiment_with<F>(cfg: &ExperimentConfig, mut sink: F) -> Result<()>
where
    F: FnMut(&ResultRecord) -> Result<()>,
{
    cfg.validate()?;
    let base = RngConfig::new(cfg.seed);
    let (a, planted) = load(cfg, &mut base.with_stream(0).rng())?;
    let shapes = query_shapes(cfg, &a, planted, &mut base.with_stream(1).rng())?;
    let exact: Vec<f64> = shapes.iter().map(|(_, s)| exact_cost(&a, s)).collect::<Result<_>>()?;

    let mut rng = base.with_stream(2).rng();
    let trace = match cfg.path {
        PipelinePath::Sparse => dimension_reduction_traced(&a, cfg.k, cfg.eps, &cfg.constants, &mut rng)?,
        PipelinePath::Dense => dimension_reduction_dense_traced(&a, cfg.k, cfg.eps, &cfg.constants, &mut rng)?,
    };
    let d = a.ncols();
    let mut dims: Vec<usize> = cfg.dims_to_probe.iter().copied().chain(trace.checkpoints.iter().copied()).filter(|&p| p >= 1 && p <= d).collect();
    dims.sort_unstable();
    dims.dedup();

    let ordered = order_by_gain(&a, &trace.basis, &trace.checkpoints)?;
    let svd = right_singular_vectors(&a)?;
    let mut brng = base.with_stream(3).rng();
    for &p in &dims {
        let reduced = ordered.truncate(p);
        let random = random_subspace(d, p, &mut brng)?;
        let top = Basis::from_orthonormal(svd.columns(0, p).into_owned())?;
        for (method, basis) in [(Method::Paper, reduced), (Method::RandomSubspace, random), (Method::TopSvd, top)] {
            let started = Instant::now();
            let dim = basis.dim_sub();
            let rep = ReducedRep::exact(&a, basis, cfg.eps)?;
            for ((id, shape), &ex) in shapes.iter().zip(&exact) {
                let mut rec = ResultRecord::new(method, dim, id, reduced_cost(&rep, shape)?, ex);
                if cfg.timing {
                    rec.wall_time_ms = Some(started.elapsed().as_secs_f64() * 1e3);
                }
                sink(&rec)?;
            }
        }
    }
    Ok(())
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let mut out = Vec::new();
    run_experiment_with(cfg, |r| {
        out.push(r.clone());
        Ok(())
    })?;
    Ok(out)
}

/// Newline-delimited JSON.
pub fn write_ndjson<W: Write>(records: &[ResultRecord], mut w: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// CSV with a header row; a missing wall time is an empty cell.
pub fn write_csv_records<W: Write>(records: &[ResultRecord], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in records {
        wr.serialize(r).map_err(|e| Error::Format(e.to_string()))?;
    }
    wr.flush()?;
    Ok(())
}

/// A named query shape as stored in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedShape {
    pub id: String,
    #[serde(flatten)]
    pub shape: ShapeSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeSpec {
    /// One point per entry.
    Centers(Vec<Vec<f64>>),
    /// Spanning vectors, orthonormalized on load.
    Subspace(Vec<Vec<f64>>),
    /// Spanning vectors of each member subspace.
    Union(Vec<Vec<Vec<f64>>>),
}

fn columns(vectors: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let d = vectors.first().map_or(0, Vec::len);
    if vectors.is_empty() || d == 0 || vectors.iter().any(|v| v.len() != d) {
        return Err(Error::Format(format!("{what} needs non-empty vectors of equal length")));
    }
    Ok(DMatrix::from_fn(d, vectors.len(), |i, j| vectors[j][i]))
}

impl ShapeSpec {
    pub fn to_shape(&self) -> Result<Shape> {
        match self {
            ShapeSpec::Centers(c) => Shape::centers(columns(c, "centers")?.transpose()),
            ShapeSpec::Subspace(v) => Ok(Shape::Subspace(Basis::spanning(&columns(v, "subspace")?))),
            ShapeSpec::Union(parts) => {
                Shape::union(parts.iter().map(|p| Ok(Basis::spanning(&columns(p, "union member")?))).collect::<Result<_>>()?)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::NoiseKind;

    #[test]
    fn ratio_of_zero_costs_is_one() {
        assert_eq!(ResultRecord::new(Method::Paper, 1, "s", 0.0, 0.0).ratio, 1.0);
        assert_eq!(ResultRecord::new(Method::Paper, 1, "s", 3.0, 2.0).ratio, 1.5);
    }

    #[test]
    fn full_dimension_probe_is_exact() {
        let cfg = ExperimentConfig {
            input: InputSpec::Synth(SynthSpec::new(6, 2, 20, NoiseKind::Gaussian, 1.0)),
            k: 2,
            eps: 0.5,
            seed: 3,
            path: PipelinePath::Sparse,
            dims_to_probe: vec![6],
            shapes: ShapeQuery::Planted,
            constants: Constants::default(),
            timing: false,
        };
        let recs = run_experiment(&cfg).unwrap();
        let full: Vec<_> = recs.iter().filter(|r| r.subspace_dim == 6).collect();
        assert_eq!(full.len(), 3);
        for r in full {
            assert!((r.ratio - 1.0).abs() <= 1e-6, "{r:?}");
        }
    }

    #[test]
    fn shape_specs_parse() {
        let s: NamedShape = serde_json::from_str(r#"{"id":"a","centers":[[0,0],[1,1]]}"#).unwrap();
        assert!(matches!(s.shape.to_shape().unwrap(), Shape::Centers(ref c) if c.nrows() == 2));
        let u: NamedShape = serde_json::from_str(r#"{"id":"u","union":[[[1,0]],[[0,2]]]}"#).unwrap();
        assert_eq!(u.shape.to_shape().unwrap().complexity(), 2);
    }
}
