#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use sumdist::{Basis, PointMatrix, Shape};

pub fn gaussian_matrix<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(n, d, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Points on a random `k`-dimensional subspace plus Gaussian noise.
pub struct Planted {
    pub points: PointMatrix,
    pub subspace: Basis,
    /// Exact cost of `subspace`, an upper bound on the optimal k-subspace cost.
    pub planted_cost: f64,
}

pub fn planted<R: Rng + ?Sized>(n: usize, d: usize, k: usize, signal: f64, noise: f64, rng: &mut R) -> Planted {
    let v = Basis::spanning(&gaussian_matrix(d, k, rng));
    let coeffs = gaussian_matrix(n, k, rng) * signal;
    let a = coeffs * v.matrix().transpose() + gaussian_matrix(n, d, rng) * noise;
    let planted_cost = (0..n).map(|i| v.distance(&a.row(i).transpose())).sum();
    Planted { points: PointMatrix::Dense(a), subspace: v, planted_cost }
}

/// `k` centers drawn around random input rows, a random `k`-subspace, or a
/// union of two random lines, for `kind` 0, 1 and 2.
pub fn random_shape<R: Rng + ?Sized>(a: &PointMatrix, k: usize, kind: usize, rng: &mut R) -> Shape {
    let d = a.ncols();
    match kind % 3 {
        0 => {
            let rows: Vec<usize> = (0..k).map(|_| rng.random_range(0..a.nrows())).collect();
            let jitter = gaussian_matrix(k, d, rng);
            Shape::centers(a.select_rows(&rows) + jitter).unwrap()
        }
        1 => Shape::Subspace(Basis::spanning(&gaussian_matrix(d, k, rng))),
        _ => Shape::union(vec![
            Basis::spanning(&gaussian_matrix(d, 1, rng)),
            Basis::spanning(&gaussian_matrix(d, 1, rng)),
        ])
        .unwrap(),
    }
}

/// `sum_i dist(a_i, span(u))` for a unit vector `u`.
pub fn line_cost(a: &DMatrix<f64>, u: &DVector<f64>) -> f64 {
    a.row_iter()
        .map(|r| {
            let p = r.dot(&u.transpose());
            (r.norm_squared() - p * p).max(0.0).sqrt()
        })
        .sum()
}

/// Best line through the origin within the column span of `span` (`d x m`,
/// orthonormal columns): random restarts followed by shrinking-step local search.
pub fn best_line_in_span<R: Rng + ?Sized>(a: &DMatrix<f64>, span: &DMatrix<f64>, rng: &mut R) -> f64 {
    let m = span.ncols();
    let cost = |c: &DVector<f64>| {
        let u = span * c;
        let nrm = u.norm();
        if nrm == 0.0 {
            f64::INFINITY
        } else {
            line_cost(a, &(u / nrm))
        }
    };
    let mut starts: Vec<(f64, DVector<f64>)> = (0..4000)
        .map(|_| {
            let c = DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal));
            (cost(&c), c)
        })
        .collect();
    // the candidate lines through each data point are natural starting points
    for r in a.row_iter() {
        let c = span.tr_mul(&r.transpose());
        starts.push((cost(&c), c));
    }
    starts.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut best = f64::INFINITY;
    for (mut fc, mut c) in starts.into_iter().take(20) {
        c /= c.norm();
        let mut step = 0.5;
        while step > 1e-7 {
            let mut improved = false;
            for j in 0..m {
                for sgn in [1.0, -1.0] {
                    let mut t = c.clone();
                    t[j] += sgn * step;
                    let ft = cost(&t);
                    if ft < fc {
                        fc = ft;
                        c = &t / t.norm();
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        best = best.min(fc);
    }
    best
}
