//! Sparse solves and eigensolvers.

mod dense;
mod factor;
mod general;
mod qep;
mod symmetric;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use dense::{dense_pencil_eigenvalues, dense_qep_eigenvalues, dense_sym_pencil};
pub use factor::Factorization;
pub use general::{eig_gen_shift_invert, PencilProblem};
pub use qep::{qep_linearize, qep_residual, QepBlocks};
pub use symmetric::eig_sym_pencil;

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// Settings shared by the Krylov eigensolvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Number of eigenvalues wanted, nearest the shift.
    pub nev: usize,
    pub shift: f64,
    /// Relative Ritz residual at which a pair counts as converged.
    pub tol: f64,
    pub max_restarts: usize,
    /// Seed of the pseudo-random start vectors.
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { nev: 6, shift: 1.0, tol: 1e-11, max_restarts: 500, seed: 0x5eed }
    }
}

impl EigenOptions {
    pub fn new(nev: usize, shift: f64) -> Self {
        Self { nev, shift, ..Default::default() }
    }

    /// Krylov subspace dimension for `want` wanted pairs.
    pub(crate) fn krylov_dim(want: usize) -> usize {
        (2 * want + 10).max(30)
    }

    fn validate(&self) -> Result<()> {
        if self.nev == 0 {
            return Err(Error::InvalidParameter("at least one eigenvalue must be requested".into()));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) || !self.shift.is_finite() {
            return Err(Error::InvalidParameter(format!("invalid tolerance {} or shift {}", self.tol, self.shift)));
        }
        Ok(())
    }
}

/// An eigenvalue with its eigenvector and relative residual.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: Complex64,
    pub vector: Vec<Complex64>,
    pub residual: f64,
}

/// A real eigenpair of a symmetric definite pencil; the vector is
/// normalized in the right-hand-side inner product.
#[derive(Debug, Clone)]
pub struct RealEigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

/// Solves `A x = b` by sparse direct factorization.
pub fn solve_sparse(a: &SparseMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    if a.nrows() != rhs.len() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix with right-hand side of length {}",
            a.nrows(),
            a.ncols(),
            rhs.len()
        )));
    }
    let fac = Factorization::symmetric(a)?;
    let mut x = rhs.to_vec();
    fac.solve_in_place(&mut x)?;
    let a_norm = a.norm_1();
    // normwise backward error, insensitive to the conditioning of `a`
    let backward = |x: &[f64]| -> (f64, Vec<f64>) {
        let r: Vec<f64> = rhs.iter().zip(a.mul_vec(x)).map(|(b, ax)| b - ax).collect();
        let eta = norm(&r) / (a_norm * norm(x) + norm(rhs)).max(f64::MIN_POSITIVE);
        (eta, r)
    };
    let (eta, mut r) = backward(&x);
    if eta > 1e-12 {
        // one step of iterative refinement before giving up
        fac.solve_in_place(&mut r)?;
        x.iter_mut().zip(&r).for_each(|(x, d)| *x += d);
        let (eta, _) = backward(&x);
        if !(eta <= 1e-12) {
            return Err(Error::SingularMatrix(format!("backward error {eta:e} after solve")));
        }
    }
    Ok(x)
}

/// Real parts of the eigenvalues with `|Im| <= rel_tol |value|`, ascending.
pub fn filter_real(pairs: &[EigenPair], rel_tol: f64) -> Vec<f64> {
    let mut out: Vec<f64> =
        pairs.iter().map(|p| p.value).filter(|v| v.im.abs() <= rel_tol * v.norm()).map(|v| v.re).collect();
    out.sort_by(f64::total_cmp);
    out
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub(crate) fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}
