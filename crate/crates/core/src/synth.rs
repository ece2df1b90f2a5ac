//! Planted-cluster synthetic data.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::PointMatrix;
use crate::sketching::standard_cauchy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Cauchy,
    Gaussian,
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cauchy" => Ok(NoiseKind::Cauchy),
            "gaussian" => Ok(NoiseKind::Gaussian),
            _ => Err(Error::Parameter(format!("unknown noise kind {s:?}"))),
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseKind::Cauchy => "cauchy",
            NoiseKind::Gaussian => "gaussian",
        })
    }
}

/// Parameters of a planted instance: `k` centers with i.i.d.
/// `N(0, center_scale^2)` coordinates, each sampled `samples_per_center`
/// times with per-coordinate noise of the given family times `scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub samples_per_center: usize,
    pub noise: NoiseKind,
    pub scale: f64,
    #[serde(default = "default_center_scale")]
    pub center_scale: f64,
}

fn default_center_scale() -> f64 {
    10.0
}

impl SynthSpec {
    pub fn new(d: usize, k: usize, samples_per_center: usize, noise: NoiseKind, scale: f64) -> SynthSpec {
        SynthSpec { n: k * samples_per_center, d, k, samples_per_center, noise, scale, center_scale: default_center_scale() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    pub points: PointMatrix,
    /// `k x d`.
    pub centers: DMatrix<f64>,
    /// Center index of every row.
    pub labels: Vec<usize>,
}

/// Rows are grouped by center: rows `j*s .. (j+1)*s` belong to center `j`.
pub fn synth_generate<R: Rng + ?Sized>(spec: &SynthSpec, rng: &mut R) -> Result<SynthData> {
    let SynthSpec { n, d, k, samples_per_center, noise, scale, center_scale } = *spec;
    if k == 0 || d == 0 || k.checked_mul(samples_per_center) != Some(n) || n == 0 {
        return Err(Error::Parameter(format!(
            "need k * samples_per_center = n with k, d, n >= 1; got k={k}, samples={samples_per_center}, n={n}, d={d}"
        )));
    }
    if !(scale >= 0.0 && scale.is_finite() && center_scale >= 0.0 && center_scale.is_finite()) {
        return Err(Error::Parameter("scales must be finite and nonnegative".into()));
    }
    let centers = DMatrix::from_fn(k, d, |_, _| center_scale * rng.sample::<f64, _>(StandardNormal));
    let labels: Vec<usize> = (0..n).map(|i| i / samples_per_center).collect();
    let mut points = DMatrix::zeros(n, d);
    for (i, &c) in labels.iter().enumerate() {
        for j in 0..d {
            let z = match noise {
                NoiseKind::Cauchy => standard_cauchy(rng),
                NoiseKind::Gaussian => rng.sample::<f64, _>(StandardNormal),
            };
            points[(i, j)] = centers[(c, j)] + scale * z;
        }
    }
    Ok(SynthData { points: PointMatrix::Dense(points), centers, labels })
}
