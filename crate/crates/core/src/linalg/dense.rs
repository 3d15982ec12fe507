//! Dense eigensolvers used for small problems and as test oracles.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// All eigenpairs of the symmetric definite pencil `A x = λ M x`, ascending,
/// with `M`-orthonormal eigenvectors as columns.
pub fn dense_sym_pencil(a: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    if a.shape() != (n, n) || m.shape() != (n, n) {
        return Err(Error::DimensionMismatch("pencil matrices must be square and equal".into()));
    }
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::SingularMatrix("right-hand matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv_a = l.solve_lower_triangular(a).ok_or_else(|| Error::SingularMatrix("triangular solve".into()))?;
    let c = l
        .solve_lower_triangular(&linv_a.transpose())
        .ok_or_else(|| Error::SingularMatrix("triangular solve".into()))?;
    let c = (&c + c.transpose()) * 0.5;
    let eig = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    let lt = l.transpose();
    for (col, &i) in order.iter().enumerate() {
        let y = eig.eigenvectors.column(i).into_owned();
        let x = lt.solve_upper_triangular(&y).ok_or_else(|| Error::SingularMatrix("triangular solve".into()))?;
        vectors.set_column(col, &x);
    }
    Ok((values, vectors))
}

/// Eigenvalues of the pencil `L x = λ R x` with invertible `R`.
pub fn dense_pencil_eigenvalues(l: &DMatrix<f64>, r: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let lu = r.clone().lu();
    let op = lu.solve(l).ok_or_else(|| Error::SingularMatrix("right-hand matrix is singular".into()))?;
    general_eigenvalues(&op)
}

/// Eigenvalues of `(A + τB + τ²C) x = 0` with invertible `C`, through the
/// companion matrix `[[0, I], [-C⁻¹A, -C⁻¹B]]`.
pub fn dense_qep_eigenvalues(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    let lu = c.clone().lu();
    let ca = lu.solve(a).ok_or_else(|| Error::SingularMatrix("quadratic coefficient is singular".into()))?;
    let cb = lu.solve(b).ok_or_else(|| Error::SingularMatrix("quadratic coefficient is singular".into()))?;
    let mut comp = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        comp[(i, n + i)] = 1.0;
        for j in 0..n {
            comp[(n + i, j)] = -ca[(i, j)];
            comp[(n + i, n + j)] = -cb[(i, j)];
        }
    }
    general_eigenvalues(&comp)
}

/// Eigenvalues of a real square matrix.
pub(crate) fn general_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let fm = faer::Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let vals =
        fm.eigenvalues().map_err(|_| Error::ConvergenceFailure { converged: 0, wanted: m.nrows(), iterations: 0 })?;
    Ok(vals.into_iter().map(|z| Complex64::new(z.re, z.im)).collect())
}
