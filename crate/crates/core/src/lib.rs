//! Dimensionality reduction for sum-of-distances objectives.
//!
//! Given `n` points in `R^d` (rows of a [`PointMatrix`]), the crate finds a
//! subspace `B` and per-point summaries `(x_i, v_i)` such that for every shape
//! `S` contained in a k-dimensional subspace (k centers, a k-flat, a union of
//! flats) the sum of distances is preserved:
//!
//! ```text
//! sum_i sqrt(dist(B x_i, S)^2 + v_i^2) = (1 +- eps) * sum_i dist(a_i, S)
//! ```
//!
//! Building blocks are exposed module by module: random sketches
//! ([`sketching`]), l1 embeddings ([`embeddings`]), bicriteria subspace
//! solvers ([`bicriteria`]), the reduction loop and reduced representations
//! ([`dimreduce`]), a block-sampled variant for dense inputs ([`densefast`]),
//! and coresets on the reduced data ([`coresets`]).
//!
//! ```no_run
//! use sumdist::{complete_dim_reduce, exact_cost, reduced_cost, Constants, PointMatrix, RngConfig, Shape};
//! # fn main() -> sumdist::Result<()> {
//! let a = PointMatrix::Dense(nalgebra::DMatrix::from_fn(200, 10, |i, j| ((i * j) % 7) as f64));
//! let mut rng = RngConfig::new(7).rng();
//! let rep = complete_dim_reduce(&a, 2, 0.5, &Constants::default(), &mut rng)?;
//! let s = Shape::centers(nalgebra::DMatrix::zeros(2, 10))?;
//! println!("{} vs {}", reduced_cost(&rep, &s)?, exact_cost(&a, &s)?);
//! # Ok(())
//! # }
//! ```

pub mod basis;
pub mod bicriteria;
pub mod config;
pub mod coresets;
pub mod densefast;
pub mod dimreduce;
pub mod embeddings;
pub mod error;
pub mod experiment;
pub mod ingest;
pub mod linalg;
pub mod matrix;
pub mod rng;
pub mod sketching;
pub mod synth;

pub use basis::Basis;
pub use bicriteria::{eps_approx, poly_approx, residual_apply, residual_cost, BicriteriaResult};
pub use config::{Constants, PipelinePath};
pub use coresets::{coreset_query_cost, kmedian_coreset, kmedian_seed, subspace_coreset, LiftedRep, WeightedCoreset};
pub use densefast::{dimension_reduction_dense, eps_approx_dense, poly_approx_dense, BlockPartition, DenseStats};
pub use dimreduce::{
    complete_dim_reduce, complete_dim_reduce_with_stats, dimension_reduction, exact_cost, reduced_cost, shape_distance,
    ReducedRep, Shape,
};
pub use embeddings::{l1_embedding, lewis_weights, L1Embedding, SamplingMatrix};
pub use error::{Error, Result};
pub use experiment::{run_experiment, ExperimentConfig, ResultRecord};
pub use matrix::{CsrMatrix, PointMatrix};
pub use rng::RngConfig;
pub use synth::{synth_generate, NoiseKind, SynthSpec};
