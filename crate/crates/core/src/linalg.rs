//! Small dense helpers shared by the geometry modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Maximum absolute row sum.
pub fn max_row_sum(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Orthonormal basis (as columns) of the column span of `cols`.
///
/// Singular directions below `rel_tol * sigma_max` are dropped, and the
/// whole span collapses to zero when `sigma_max <= abs_floor`.
pub fn orthonormal_span(cols: &DMatrix<f64>, rel_tol: f64, abs_floor: f64) -> DMatrix<f64> {
    let n = cols.nrows();
    if cols.ncols() == 0 || n == 0 {
        return DMatrix::zeros(n, 0);
    }
    let svd = cols.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if sigma_max <= abs_floor {
        return DMatrix::zeros(n, 0);
    }
    let cutoff = rel_tol * sigma_max;
    let mut keep: Vec<(f64, usize)> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > cutoff)
        .map(|(i, s)| (*s, i))
        .collect();
    keep.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut out = DMatrix::zeros(n, keep.len());
    for (c, (_, i)) in keep.iter().enumerate() {
        out.set_column(c, &u.column(*i));
    }
    out
}

/// Orthonormal basis of the orthogonal complement of an orthonormal basis.
pub fn orthogonal_complement(basis: &DMatrix<f64>) -> DMatrix<f64> {
    let n = basis.nrows();
    let proj = DMatrix::identity(n, n) - basis * basis.transpose();
    // eigenvalues of the projector are 0 or 1
    orthonormal_span(&proj, 0.5, 0.5)
}

/// Component of `v` orthogonal to the span of the orthonormal columns of `basis`.
pub fn residual_outside(basis: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
    if basis.ncols() == 0 {
        return v.clone();
    }
    v - basis * (basis.transpose() * v)
}

/// Kernel of a symmetric matrix: eigenvectors with |lambda| <= rel_tol * max|lambda|.
pub fn symmetric_kernel(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m.clone());
    let scale = eig.eigenvalues.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let cols: Vec<usize> = (0..n)
        .filter(|&i| eig.eigenvalues[i].abs() <= rel_tol * scale.max(f64::MIN_POSITIVE))
        .collect();
    let mut out = DMatrix::zeros(n, cols.len());
    for (c, i) in cols.iter().enumerate() {
        out.set_column(c, &eig.eigenvectors.column(*i));
    }
    orthonormal_span(&out, 1e-8, 0.0)
}

pub fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Solves `g x = rhs` for a symmetric positive-definite `g`.
pub fn spd_solve(g: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    g.clone().cholesky().map(|c| c.solve(rhs))
}

/// Minimum-norm least-squares solution of `a x = b`.
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    if a.ncols() == 0 {
        return DVector::zeros(0);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = smax * 1e-12 * (a.nrows().max(a.ncols()) as f64);
    svd.solve(b, eps).unwrap_or_else(|_| DVector::zeros(a.ncols()))
}

pub(crate) mod serde_vec {
    use nalgebra::DVector;
    use serde::{Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &DVector<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }
}

pub(crate) mod serde_mat {
    use nalgebra::DMatrix;
    use serde::{Serialize, Serializer};

    /// Row-major nested lists.
    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = m
            .row_iter()
            .map(|r| r.iter().cloned().collect())
            .collect();
        rows.serialize(s)
    }
}
