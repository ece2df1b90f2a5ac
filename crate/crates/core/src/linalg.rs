//! Dense kernels shared by the solvers: order-preserving orthonormalization,
//! rank-revealing column selection, sorted thin SVD, and row-norm helpers.

use nalgebra::{DMatrix, DVector};

/// Relative threshold below which a column is treated as numerically dependent.
pub const RANK_TOL: f64 = 1e-10;

/// Orthonormal basis for the span of `mat`'s columns after projecting out the
/// (orthonormal) columns of `against`.
///
/// Columns are processed left to right with classical Gram-Schmidt applied
/// twice, so the span of the first `j` output columns equals the span of the
/// first input columns that survived. A column is dropped when its residual
/// norm is at most `rel_tol` times the largest input column norm.
pub fn orthonormalize(mat: &DMatrix<f64>, against: Option<&DMatrix<f64>>, rel_tol: f64) -> DMatrix<f64> {
    let d = mat.nrows();
    let taken = against.map_or(0, |b| b.ncols());
    let cap = d.saturating_sub(taken).min(mat.ncols());
    let scale = mat.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut q = DMatrix::<f64>::zeros(d, cap);
    let mut rank = 0;
    if scale == 0.0 || cap == 0 {
        return q.columns(0, 0).into_owned();
    }
    for col in mat.column_iter() {
        if rank == cap {
            break;
        }
        let mut v: DVector<f64> = col.into_owned();
        for _ in 0..2 {
            if let Some(b) = against {
                if b.ncols() > 0 {
                    let coef = b.tr_mul(&v);
                    v -= b * coef;
                }
            }
            if rank > 0 {
                let qs = q.columns(0, rank);
                let coef = qs.tr_mul(&v);
                v -= qs * coef;
            }
        }
        let nv = v.norm();
        if nv > rel_tol * scale {
            q.set_column(rank, &(v / nv));
            rank += 1;
        }
    }
    q.columns(0, rank).into_owned()
}

/// Indices of a maximal set of numerically independent columns, chosen by
/// greedy column pivoting (largest remaining residual norm first). The
/// threshold is relative to the first pivot, mirroring a rank-revealing QR.
pub fn independent_columns(mat: &DMatrix<f64>, rel_tol: f64) -> Vec<usize> {
    let mut work = mat.clone();
    let m = work.ncols();
    let mut chosen = Vec::new();
    let mut first = None;
    let mut alive: Vec<bool> = vec![true; m];
    for _ in 0..m.min(work.nrows()) {
        let (best, best_norm) = (0..m)
            .filter(|&j| alive[j])
            .map(|j| (j, work.column(j).norm()))
            .fold((usize::MAX, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best == usize::MAX {
            break;
        }
        let lead = *first.get_or_insert(best_norm);
        if lead == 0.0 || best_norm <= rel_tol * lead {
            break;
        }
        alive[best] = false;
        chosen.push(best);
        let q = work.column(best) / best_norm;
        for j in 0..m {
            if alive[j] {
                let c = q.dot(&work.column(j));
                let upd = work.column(j) - &q * c;
                work.set_column(j, &upd);
            }
        }
    }
    chosen.sort_unstable();
    chosen
}

/// Thin SVD with singular triplets sorted by decreasing singular value.
pub struct SortedSvd {
    pub u: DMatrix<f64>,
    pub singular_values: DVector<f64>,
    /// Right singular vectors as columns (`d x r`).
    pub v: DMatrix<f64>,
}

pub fn sorted_svd(mat: &DMatrix<f64>) -> SortedSvd {
    let svd = mat.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^T");
    let s = svd.singular_values;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    SortedSvd {
        u: DMatrix::from_fn(u.nrows(), order.len(), |i, j| u[(i, order[j])]),
        singular_values: DVector::from_iterator(order.len(), order.iter().map(|&j| s[j])),
        v: DMatrix::from_fn(vt.ncols(), order.len(), |i, j| vt[(order[j], i)]),
    }
}

impl SortedSvd {
    /// Number of singular values above `rel_tol * sigma_max`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let top = self.singular_values.iter().cloned().fold(0.0, f64::max);
        if top == 0.0 {
            return 0;
        }
        self.singular_values.iter().filter(|&&s| s > rel_tol * top).count()
    }

    /// Moore-Penrose pseudoinverse with cutoff `rel_tol * sigma_max`.
    pub fn pinv(&self, rel_tol: f64) -> DMatrix<f64> {
        let r = self.rank(rel_tol);
        let mut vs = self.v.columns(0, r).into_owned();
        for j in 0..r {
            let inv = 1.0 / self.singular_values[j];
            vs.column_mut(j).scale_mut(inv);
        }
        vs * self.u.columns(0, r).transpose()
    }
}

/// Orthonormal basis (columns, `d x r`) of the row space of `mat`, ordered by
/// decreasing singular value, with the columns of `against` projected out.
pub fn rowspace_basis(mat: &DMatrix<f64>, against: Option<&DMatrix<f64>>) -> DMatrix<f64> {
    if mat.nrows() == 0 || mat.ncols() == 0 {
        return DMatrix::zeros(mat.ncols(), 0);
    }
    let svd = sorted_svd(mat);
    let r = svd.rank(RANK_TOL);
    orthonormalize(&svd.v.columns(0, r).into_owned(), against, 1e-8)
}

pub fn row_norms(m: &DMatrix<f64>) -> Vec<f64> {
    m.row_iter().map(|r| r.norm()).collect()
}

/// Sum of row l2 norms, the (1,2)-norm.
pub fn norm_12(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.norm()).sum()
}

/// l2 leverage scores of a full-column-rank matrix, from a thin QR.
pub fn leverage_scores(m: &DMatrix<f64>) -> Vec<f64> {
    let q = m.clone().qr().q();
    q.row_iter().map(|r| r.norm_squared()).collect()
}

/// Median of the values; averages the two middle elements for even lengths.
pub fn median(values: &mut [f64]) -> f64 {
    let n = values.len();
    if n == 0 {
        return 0.0;
    }
    let mid = n / 2;
    let (lo, m, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *m;
    if n % 2 == 1 {
        upper
    } else {
        let lower = lo.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}
