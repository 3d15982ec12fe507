//! Quadratic eigenvalue problems `(A + τB + τ²C) x = 0` through the block
//! linearization `[[-B, -A], [I, 0]] z = τ [[C, 0], [0, I]] z`, `z = (τx, x)`.

use num_complex::Complex64;

use super::general::PencilProblem;
use super::EigenOptions;
use crate::error::{Error, Result};
use crate::sparse::{SparseBuilder, SparseMatrix};

/// The three coefficient matrices of a quadratic eigenvalue problem.
#[derive(Debug, Clone)]
pub struct QepBlocks {
    pub a: SparseMatrix,
    pub b: SparseMatrix,
    pub c: SparseMatrix,
}

impl QepBlocks {
    pub fn new(a: SparseMatrix, b: SparseMatrix, c: SparseMatrix) -> Result<Self> {
        let n = a.nrows();
        for (name, m) in [("A", &a), ("B", &b), ("C", &c)] {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "{name} is {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(Self { a, b, c })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// `A + σB + σ²C`.
    pub fn evaluate(&self, sigma: f64) -> Result<SparseMatrix> {
        SparseMatrix::linear_combination(&[(1.0, &self.a), (sigma, &self.b), (sigma * sigma, &self.c)])
    }
}

/// Builds the linearized pencil; the blocks are kept so the shift-invert
/// solver only needs to factorize `A + σB + σ²C`.
pub fn qep_linearize(blocks: QepBlocks, options: EigenOptions) -> Result<PencilProblem> {
    let n = blocks.dim();
    let cap = blocks.a.nnz() + blocks.b.nnz() + n;
    let mut left = SparseBuilder::with_capacity(2 * n, 2 * n, cap);
    for (r, c, v) in blocks.b.iter() {
        left.add(r, c, -v);
    }
    for (r, c, v) in blocks.a.iter() {
        left.add(r, n + c, -v);
    }
    let mut right = SparseBuilder::with_capacity(2 * n, 2 * n, blocks.c.nnz() + n);
    for (r, c, v) in blocks.c.iter() {
        right.add(r, c, v);
    }
    for i in 0..n {
        left.add(n + i, i, 1.0);
        right.add(n + i, n + i, 1.0);
    }
    PencilProblem::with_qep(left.finalize(), right.finalize(), options, blocks)
}

/// `‖(A + τB + τ²C) x‖ / ((‖A‖₁ + |τ|‖B‖₁ + |τ|²‖C‖₁) ‖x‖)`.
pub fn qep_residual(blocks: &QepBlocks, tau: Complex64, x: &[Complex64]) -> f64 {
    let re: Vec<f64> = x.iter().map(|z| z.re).collect();
    let im: Vec<f64> = x.iter().map(|z| z.im).collect();
    let apply = |m: &SparseMatrix| -> Vec<Complex64> {
        m.mul_vec(&re).into_iter().zip(m.mul_vec(&im)).map(|(r, i)| Complex64::new(r, i)).collect()
    };
    let (ax, bx, cx) = (apply(&blocks.a), apply(&blocks.b), apply(&blocks.c));
    let t2 = tau * tau;
    let r: f64 = (0..x.len()).map(|i| (ax[i] + tau * bx[i] + t2 * cx[i]).norm_sqr()).sum::<f64>().sqrt();
    let xn: f64 = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let scale = blocks.a.norm_1() + tau.norm() * blocks.b.norm_1() + tau.norm_sqr() * blocks.c.norm_1();
    r / (scale * xn).max(f64::MIN_POSITIVE)
}
