//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

/// Singular values in descending order together with the matching left and
/// right singular vectors (as columns).
pub(crate) struct SortedSvd {
    pub values: Vec<f64>,
    pub u: DMatrix<f64>,
    pub v: DMatrix<f64>,
}

pub(crate) fn sorted_svd(m: &DMatrix<f64>) -> SortedSvd {
    // nalgebra's bidiagonal QR occasionally stops short of convergence
    // (reconstruction errors near 1e-2 on small tridiagonals); faer does not.
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return SortedSvd {
            values: Vec::new(),
            u: DMatrix::identity(rows, rows),
            v: DMatrix::identity(cols, cols),
        };
    }
    let fm = faer::Mat::<f64>::from_fn(rows, cols, |r, c| m[(r, c)]);
    let svd = fm.svd().expect("SVD did not converge");
    let s = svd.S().column_vector();
    let k = rows.min(cols);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    // full bases: the leading k columns follow the sorted values
    let perm = |full: usize| -> Vec<usize> { order.iter().copied().chain(k..full).collect() };
    let (pu, pv) = (perm(rows), perm(cols));
    SortedSvd {
        values: order.iter().map(|&i| s[i]).collect(),
        u: DMatrix::from_fn(rows, rows, |r, c| svd.U()[(r, pu[c])]),
        v: DMatrix::from_fn(cols, cols, |r, c| svd.V()[(r, pv[c])]),
    }
}

const EQUILIBRATION_FLOOR: f64 = 1e-6;

/// Diagonal row and column scalings `(r, d)` making `diag(r) |m| diag(d)`
/// roughly doubly stochastic (a fixed number of Sinkhorn sweeps).
///
/// Every entry is floored at `EQUILIBRATION_FLOOR * max|m|`: patterns
/// without total support otherwise drive the factors to over/underflow.
pub(crate) fn equilibrate(m: &DMatrix<f64>) -> (DVector<f64>, DVector<f64>) {
    let floor = EQUILIBRATION_FLOOR * m.amax();
    let abs = m.map(|v| v.abs().max(floor));
    let mut r = DVector::from_element(m.nrows(), 1.0);
    let mut d = DVector::from_element(m.ncols(), 1.0);
    for _ in 0..30 {
        for (i, row) in abs.row_iter().enumerate() {
            let s = row.transpose().dot(&d);
            if s > 0.0 {
                r[i] = 1.0 / s;
            }
        }
        for (j, col) in abs.column_iter().enumerate() {
            let s = col.dot(&r);
            if s > 0.0 {
                d[j] = 1.0 / s;
            }
        }
    }
    (r, d)
}

/// Singular values in descending order.
pub(crate) fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    sorted_svd(m).values
}

/// Orthonormal basis (as rows) of `{ w : w^T m = 0 }`, singular values at or
/// below `rel_tol * sigma_max` counted as zero.
pub(crate) fn left_null_space(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let rows = m.nrows();
    let svd = sorted_svd(m);
    let cutoff = rel_tol * svd.values.first().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let null: Vec<usize> = (0..rows).filter(|&i| svd.values.get(i).is_none_or(|&v| v <= cutoff)).collect();
    DMatrix::from_fn(null.len(), rows, |r, c| svd.u[(c, null[r])])
}

/// Orthonormal basis (as columns) of the null space of `m`.
pub(crate) fn right_null_space(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    left_null_space(&m.transpose(), rel_tol).transpose()
}

/// Ratio of the smallest to the largest singular value of the rows of `m`
/// (zero for rank-deficient or empty input).
pub(crate) fn independence(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    if m.nrows() > m.ncols() {
        return 0.0;
    }
    let sv = singular_values(m);
    let max = sv[0];
    if max == 0.0 {
        0.0
    } else {
        sv[sv.len() - 1] / max
    }
}

pub(crate) fn condition_number(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 1.0;
    }
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let sv = singular_values(m);
    let min = sv[sv.len() - 1];
    if min == 0.0 {
        f64::INFINITY
    } else {
        sv[0] / min
    }
}

/// Extends the orthonormal rows `seed` by coordinate directions (in index
/// order, modified Gram-Schmidt applied twice) and returns only the added
/// rows, `total - seed.nrows()` of them.
pub(crate) fn orthonormal_completion(seed: &DMatrix<f64>, total: usize) -> DMatrix<f64> {
    let dim = seed.ncols();
    let mut basis: Vec<DVector<f64>> = seed.row_iter().map(|r| r.transpose()).collect();
    let mut added = Vec::new();
    for axis in 0..dim {
        if basis.len() == total {
            break;
        }
        let mut v = DVector::zeros(dim);
        v[axis] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&v);
                v.axpy(-c, b, 1.0);
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            v /= norm;
            basis.push(v.clone());
            added.push(v);
        }
    }
    DMatrix::from_fn(added.len(), dim, |r, c| added[r][c])
}

/// Orthonormalizes the rows of `m` (which must be independent).
pub(crate) fn orthonormal_rows(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut rows: Vec<DVector<f64>> = Vec::new();
    for r in m.row_iter() {
        let mut v = r.transpose();
        for _ in 0..2 {
            for b in &rows {
                let c = b.dot(&v);
                v.axpy(-c, b, 1.0);
            }
        }
        let norm = v.norm();
        rows.push(v / norm);
    }
    DMatrix::from_fn(rows.len(), m.ncols(), |r, c| rows[r][c])
}
