//! Dense linear algebra helpers on top of `nalgebra`.
//!
//! Ranks and kernels use a singular value cutoff relative to the largest
//! singular value, so they are insensitive to the overall scale of the data.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::scalar::Scalar;

/// Symmetric part `(M + Mᵀ) / 2`.
pub fn sym<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    (m + m.transpose()) * T::lit(0.5)
}

/// Eigenvalues and eigenvectors of a symmetric matrix, eigenvalues ascending.
pub fn sym_eigen<T: Scalar>(s: &DMatrix<T>) -> (Vec<T>, DMatrix<T>) {
    let n = s.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(s.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (c, &k) in order.iter().enumerate() {
        vectors.set_column(c, &eig.eigenvectors.column(k));
    }
    (values, vectors)
}

/// Largest eigenvalue of a symmetric matrix with a unit eigenvector.
/// Returns `None` for the empty matrix.
pub fn lambda_max<T: Scalar>(s: &DMatrix<T>) -> Option<(T, DVector<T>)> {
    let (values, vectors) = sym_eigen(s);
    let last = values.len().checked_sub(1)?;
    Some((values[last], vectors.column(last).into_owned()))
}

/// `max(1, max |eigenvalue|)` of a symmetric matrix.
pub fn spectral_scale<T: Scalar>(s: &DMatrix<T>) -> T {
    let (values, _) = sym_eigen(s);
    values.iter().fold(T::one(), |acc, v| acc.max(v.abs()))
}

fn singular_cutoff<T: Scalar>(values: &[T], rel: f64) -> T {
    let smax = values.iter().fold(T::zero(), |a, v| a.max(*v));
    smax * T::lit(rel)
}

/// Numerical rank with relative singular value threshold `rel`.
pub fn rank<T: Scalar>(m: &DMatrix<T>, rel: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let sv: Vec<T> = sv.iter().copied().collect();
    let cut = singular_cutoff(&sv, rel);
    if cut == T::zero() {
        return 0;
    }
    sv.iter().filter(|s| **s > cut).count()
}

/// Orthonormal basis of the right kernel of `m` (as columns of the result).
pub fn nullspace<T: Scalar>(m: &DMatrix<T>, rel: f64) -> DMatrix<T> {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    // Pad with zero rows so the decomposition exposes all right singular vectors.
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sv: Vec<T> = svd.singular_values.iter().copied().collect();
    let cut = singular_cutoff(&sv, rel);
    let mut kernel: Vec<DVector<T>> = Vec::new();
    for (k, s) in sv.iter().enumerate() {
        if *s <= cut {
            kernel.push(v_t.row(k).transpose());
        }
    }
    columns(cols, &kernel)
}

/// Stacks vectors as columns of a `dim × k` matrix.
pub fn columns<T: Scalar>(dim: usize, vs: &[DVector<T>]) -> DMatrix<T> {
    let mut out = DMatrix::zeros(dim, vs.len());
    for (c, v) in vs.iter().enumerate() {
        out.set_column(c, v);
    }
    out
}

/// Minimum-norm least-squares solution of `m x = b` and its residual norm.
pub fn solve_min_norm<T: Scalar>(m: &DMatrix<T>, b: &DVector<T>, rel: f64) -> (DVector<T>, T) {
    let cols = m.ncols();
    if cols == 0 {
        return (DVector::zeros(0), b.norm());
    }
    let svd = m.clone().svd(true, true);
    let sv: Vec<T> = svd.singular_values.iter().copied().collect();
    let cut = singular_cutoff(&sv, rel);
    let x = if cut == T::zero() {
        DVector::zeros(cols)
    } else {
        svd.solve(b, cut).unwrap_or_else(|_| DVector::zeros(cols))
    };
    let residual = (m * &x - b).norm();
    (x, residual)
}

/// Orthonormal basis for the span of the given columns (rank-revealing).
pub fn orthonormal_basis<T: Scalar>(m: &DMatrix<T>, rel: f64) -> DMatrix<T> {
    let (rows, cols) = m.shape();
    if cols == 0 || rows == 0 {
        return DMatrix::zeros(rows, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let sv: Vec<T> = svd.singular_values.iter().copied().collect();
    let cut = singular_cutoff(&sv, rel);
    let keep: Vec<DVector<T>> = sv
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > cut && **s > T::zero())
        .map(|(k, _)| u.column(k).into_owned())
        .collect();
    columns(rows, &keep)
}

/// Sine of the largest principal angle between the column spans of `a` and `b`.
///
/// Returns 1 when the dimensions differ.
pub fn subspace_gap<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>, rel: f64) -> T {
    let qa = orthonormal_basis(a, rel);
    let qb = orthonormal_basis(b, rel);
    if qa.ncols() != qb.ncols() {
        return T::one();
    }
    if qa.ncols() == 0 {
        return T::zero();
    }
    let resid = |q: &DMatrix<T>, other: &DMatrix<T>| {
        let proj = q * (q.transpose() * other);
        let r = other - proj;
        r.clone().singular_values().iter().fold(T::zero(), |acc, s| acc.max(*s))
    };
    resid(&qa, &qb).max(resid(&qb, &qa))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_of_rank_deficient_matrix() {
        let m: DMatrix<f64> = DMatrix::from_row_slice(3, 3, &[0.0, 27.0, 0.0, -27.0, -9.0, 18.0, 0.0, -18.0, 0.0]);
        let k = nullspace(&m, 1e-10);
        assert_eq!(k.ncols(), 1);
        let v = k.column(0);
        // span(2, 0, 3)
        assert!((v[0] * 3.0 - v[2] * 2.0).abs() < 1e-12);
        assert!(v[1].abs() < 1e-12);
        assert_eq!(rank(&m, 1e-10), 2);
    }

    #[test]
    fn wide_matrix_kernel_is_complete() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
        assert_eq!(nullspace(&m, 1e-10).ncols(), 2);
    }

    #[test]
    fn min_norm_solution() {
        let m: DMatrix<f64> = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let b = DVector::from_vec(vec![2.0]);
        let (x, r) = solve_min_norm(&m, &b, 1e-10);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
        assert!(r < 1e-12);
    }

    #[test]
    fn empty_matrices() {
        let e: DMatrix<f64> = DMatrix::zeros(0, 0);
        assert!(lambda_max(&e).is_none());
        assert_eq!(rank(&e, 1e-10), 0);
        assert_eq!(spectral_scale(&e), 1.0);
    }

    #[test]
    fn principal_angles() {
        let a = DMatrix::from_row_slice(3, 1, &[1.0, 0.0, 0.0]);
        let b = DMatrix::from_row_slice(3, 1, &[2.0, 0.0, 0.0]);
        let c = DMatrix::from_row_slice(3, 1, &[1.0, 1.0, 0.0]);
        assert!(subspace_gap(&a, &b, 1e-10) < 1e-14);
        assert!((subspace_gap(&a, &c, 1e-10) - 0.5f64.sqrt()).abs() < 1e-12);
    }
}
