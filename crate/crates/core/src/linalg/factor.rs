//! Sparse direct factorizations backed by faer.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, Lu};
use faer::{MatMut, Side};

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

#[allow(clippy::large_enum_variant)]
enum Kind {
    Cholesky(Llt<usize, f64>),
    Lu(Lu<usize, f64>),
}

/// A factorized square sparse matrix that solves `A x = b` repeatedly.
pub struct Factorization {
    kind: Kind,
    n: usize,
}

impl std::fmt::Debug for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.kind {
            Kind::Cholesky(_) => "cholesky",
            Kind::Lu(_) => "lu",
        };
        f.debug_struct("Factorization").field("kind", &kind).field("n", &self.n).finish()
    }
}

impl Factorization {
    /// Cholesky factorization of a symmetric positive definite matrix.
    pub fn cholesky(a: &SparseMatrix) -> Result<Self> {
        check_square(a)?;
        let m = a.to_faer()?;
        let llt = m.sp_cholesky(Side::Lower).map_err(|e| Error::SingularMatrix(format!("Cholesky failed: {e}")))?;
        Ok(Self { kind: Kind::Cholesky(llt), n: a.nrows() })
    }

    /// LU factorization with partial pivoting.
    pub fn lu(a: &SparseMatrix) -> Result<Self> {
        check_square(a)?;
        let m = a.to_faer()?;
        let lu = m.sp_lu().map_err(|e| Error::SingularMatrix(format!("LU failed: {e:?}")))?;
        Ok(Self { kind: Kind::Lu(lu), n: a.nrows() })
    }

    /// Cholesky when the matrix is positive definite, LU otherwise.
    pub fn symmetric(a: &SparseMatrix) -> Result<Self> {
        Self::cholesky(a).or_else(|_| Self::lu(a))
    }

    pub fn is_cholesky(&self) -> bool {
        matches!(self.kind, Kind::Cholesky(_))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves in place for `ncols` right-hand sides stored column-major.
    pub fn solve_columns(&self, rhs: &mut [f64], ncols: usize) -> Result<()> {
        if rhs.len() != self.n * ncols {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side of length {} for {} columns of size {}",
                rhs.len(),
                ncols,
                self.n
            )));
        }
        if self.n == 0 {
            return Ok(());
        }
        let mat = MatMut::from_column_major_slice_mut(rhs, self.n, ncols);
        match &self.kind {
            Kind::Cholesky(f) => f.solve_in_place(mat),
            Kind::Lu(f) => f.solve_in_place(mat),
        }
        if rhs.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::SingularMatrix("factorization produced non-finite values".into()))
        }
    }

    pub fn solve_in_place(&self, rhs: &mut [f64]) -> Result<()> {
        self.solve_columns(rhs, 1)
    }
}

fn check_square(a: &SparseMatrix) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!("{}x{} matrix is not square", a.nrows(), a.ncols())));
    }
    Ok(())
}
