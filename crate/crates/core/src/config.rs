//! Tunable constants.
//!
//! The algorithms are stated with sketch sizes like `O(log n)` or
//! `O(k + 1/delta^2)`. Every hidden constant lives here with a default sized
//! so that desk-scale instances (n up to a few thousand) run in seconds.
//! Values can be overridden from a `key=value` list, see [`Constants::parse_overrides`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which sub-solvers the dimension-reduction loop uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PipelinePath {
    #[default]
    Sparse,
    Dense,
}

impl std::str::FromStr for PipelinePath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sparse" => Ok(Self::Sparse),
            "dense" => Ok(Self::Dense),
            other => Err(Error::Parameter(format!("unknown path `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Constants {
    /// Columns of the Gaussian used to rank trial solutions: `c_g * log2(n+2)`.
    pub c_g: f64,
    /// Gaussian sketch columns in the O(1)-approximation: `c_sketch * (k + 1/delta^2)`.
    pub c_sketch: f64,
    /// Lower clamp on the delta entering the sketch width; failure probability comes from the trial count.
    pub sketch_delta_floor: f64,
    /// Gaussian columns for residual-norm estimation: `c_t * log2(n+2)`.
    pub c_t: f64,
    /// Residual samples: `c_s * K * k^3 / eps^2 * log2(1/delta + 2)`.
    pub c_s: f64,
    /// Lewis-weight samples: `c_l * m * log2(m+2)`.
    pub c_l: f64,
    /// Trust factor handed from the O(1) stage to the residual-sampling stage.
    pub k_trust: f64,
    /// Inner accuracy of the reduction loop is `eps^2 / c_q`.
    pub c_q: f64,
    /// CountSketch rows: `c_cs * (c+1)^2`.
    pub c_cs: f64,
    /// Number of independent CountSketches: `c_cs_count * log2(n+2)`.
    pub c_cs_count: f64,
    /// Consistency band of the per-row sketch vote is `check_band * eps^2`.
    pub check_band: f64,
    /// Cauchy rows for block estimators: `c_c * log2(n*b + 2)`.
    pub c_c: f64,
    /// Samples of the dense two-level scheme: `c_d * k^3.5 * log2(k+2)`.
    pub c_d: f64,
    /// Rows of the dense Cauchy l1 embedding: `c_w * m * log2(m+2)`.
    pub c_w: f64,
    /// Accepted distortion ratio beta/alpha for the dense Cauchy embedding: `dense_distortion * m * log2(m+2)`.
    pub dense_distortion: f64,
    /// Subspace coreset budget `c_tc * k^3 / eps^8 * log2(n+2)`.
    pub c_tc: f64,
    /// k-median coreset budget `c_m * k / eps^2 * total_sensitivity * log2(n+2)`.
    pub c_m: f64,
    /// Coreset sizes are capped at `coreset_fraction * n`; at 1.0 or above the full set is kept.
    pub coreset_fraction: f64,
    /// JL target dimension in k-median seeding: `c_jl * log2(n+2)`.
    pub c_jl: f64,
    /// Candidates tried per center in the local-search sweep.
    pub swap_candidates: usize,
    /// Lewis iteration stops once the relative fixed-point residual is below this.
    pub lewis_tolerance: f64,
    pub lewis_max_iterations: usize,
    pub embedding_retries: usize,
    /// Number of random directions used to certify an l1 embedding.
    pub embedding_test_directions: usize,
    /// Rank trial solutions by exact residual cost instead of a Gaussian estimate.
    pub exact_cost: bool,
    /// Run every iteration of the reduction loop instead of a random prefix.
    pub deterministic_istar: bool,
    pub path: PipelinePath,
    /// Overrides the number of blocks on the dense path.
    pub blocks: Option<usize>,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            c_g: 8.0,
            c_sketch: 2.0,
            sketch_delta_floor: 0.5,
            c_t: 8.0,
            c_s: 2.0,
            c_l: 4.0,
            k_trust: 100.0,
            c_q: 10.0,
            c_cs: 2.0,
            c_cs_count: 2.0,
            check_band: 1.0 / 12.0,
            c_c: 12.0,
            c_d: 4.0,
            c_w: 2.0,
            dense_distortion: 8.0,
            c_tc: 1.0,
            c_m: 1.0,
            coreset_fraction: 0.2,
            c_jl: 8.0,
            swap_candidates: 8,
            lewis_tolerance: 1e-3,
            lewis_max_iterations: 200,
            embedding_retries: 3,
            embedding_test_directions: 50,
            exact_cost: false,
            deterministic_istar: false,
            path: PipelinePath::Sparse,
            blocks: None,
        }
    }
}

pub(crate) fn log2p2(n: usize) -> f64 {
    (n as f64 + 2.0).log2()
}

pub(crate) fn ceil_count(x: f64) -> usize {
    if x.is_finite() {
        x.ceil().max(1.0) as usize
    } else {
        usize::MAX
    }
}

impl Constants {
    /// Smaller sample sizes (`k_trust=1, c_s=0.01, c_l=0.5`): each reduction
    /// round then adds tens of columns instead of spanning `R^d` at once when
    /// `d` is in the hundreds.
    pub fn practical() -> Self {
        Self { k_trust: 1.0, c_s: 0.01, c_l: 0.5, ..Self::default() }
    }

    /// Applies overrides written as `key=value` pairs separated by commas or
    /// newlines, e.g. `c_s=1,exact_cost=true,path="dense"`.
    pub fn parse_overrides(&self, list: &str) -> Result<Self> {
        let mut doc = toml::Table::try_from(self).map_err(|e| Error::Parameter(e.to_string()))?;
        let text: String = list
            .split([',', '\n'])
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|kv| {
                // bare words (e.g. path=dense) are accepted as strings
                match kv.split_once('=') {
                    Some((k, v)) if v.trim().parse::<f64>().is_err()
                        && !matches!(v.trim(), "true" | "false")
                        && !v.trim().starts_with('"') =>
                    {
                        format!("{} = \"{}\"\n", k.trim(), v.trim())
                    }
                    _ => format!("{kv}\n"),
                }
            })
            .collect();
        let overrides: toml::Table = toml::from_str(&text).map_err(|e| Error::Parameter(e.to_string()))?;
        for (k, v) in overrides {
            doc.insert(k, v);
        }
        toml::Value::Table(doc)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Parameter(e.to_string()))
    }

    pub(crate) fn cost_sketch_cols(&self, n: usize) -> usize {
        ceil_count(self.c_g * log2p2(n))
    }

    pub(crate) fn residual_sketch_cols(&self, n: usize) -> usize {
        ceil_count(self.c_t * log2p2(n))
    }

    pub(crate) fn lewis_samples(&self, m: usize) -> usize {
        ceil_count(self.c_l * m as f64 * log2p2(m))
    }
}
