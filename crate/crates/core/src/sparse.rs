//! Compressed-row sparse matrices.

use std::io::{self, Write};

use faer::sparse::{SparseColMat, Triplet};
use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Collects `(row, col, value)` contributions; duplicates are summed on
/// [`finalize`](SparseBuilder::finalize).
#[derive(Debug, Clone)]
pub struct SparseBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, entries: Vec::new() }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        Self { nrows, ncols, entries: Vec::with_capacity(cap) }
    }

    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        self.entries.push((row, col, value));
    }

    /// Sums duplicates in insertion order and drops exact zeros.
    pub fn finalize(mut self) -> SparseMatrix {
        // stable sort keeps insertion order within a (row, col) group, so the
        // summation order and hence the result are reproducible
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len() / 4);
        let mut values = Vec::with_capacity(self.entries.len() / 4);
        let mut it = self.entries.into_iter().peekable();
        while let Some((r, c, mut v)) = it.next() {
            while let Some(&(r2, c2, v2)) = it.peek() {
                if r2 != r || c2 != c {
                    break;
                }
                v += v2;
                it.next();
            }
            if v != 0.0 {
                row_ptr[r + 1] += 1;
                col_idx.push(c);
                values.push(v);
            }
        }
        for r in 0..self.nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseMatrix { nrows: self.nrows, ncols: self.ncols, row_ptr, col_idx, values }
    }
}

/// Real matrix in compressed-row storage with sorted column indices and no
/// explicit zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseBuilder::new(nrows, ncols).finalize()
    }

    pub fn identity(n: usize) -> Self {
        let mut b = SparseBuilder::with_capacity(n, n, n);
        for i in 0..n {
            b.add(i, i, 1.0);
        }
        b.finalize()
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut b = SparseBuilder::new(m.nrows(), m.ncols());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                b.add(r, c, m[(r, c)]);
            }
        }
        b.finalize()
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterates over stored `(row, col, value)` entries in row order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.col_idx[k], self.values[k]))
        })
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.col_idx[range.clone()].binary_search(&col) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (r, yr) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yr = s;
        }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        let mut sums = vec![0.0; self.ncols];
        for (_, c, v) in self.iter() {
            sums[c] += v.abs();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// `max |M - M^T|`.
    pub fn asymmetry(&self) -> f64 {
        self.iter().map(|(r, c, v)| (v - self.get(c, r)).abs()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> SparseMatrix {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        if out.values.contains(&0.0) {
            out.dropped_zeros()
        } else {
            out
        }
    }

    fn dropped_zeros(&self) -> SparseMatrix {
        let mut b = SparseBuilder::with_capacity(self.nrows, self.ncols, self.nnz());
        for (r, c, v) in self.iter() {
            b.add(r, c, v);
        }
        b.finalize()
    }

    /// `sum_i w_i M_i` over matrices of equal shape.
    pub fn linear_combination(terms: &[(f64, &SparseMatrix)]) -> Result<SparseMatrix> {
        let (nrows, ncols) = match terms.first() {
            Some((_, m)) => (m.nrows, m.ncols),
            None => return Err(Error::DimensionMismatch("empty linear combination".into())),
        };
        let cap = terms.iter().map(|(_, m)| m.nnz()).sum();
        let mut b = SparseBuilder::with_capacity(nrows, ncols, cap);
        for (w, m) in terms {
            if (m.nrows, m.ncols) != (nrows, ncols) {
                return Err(Error::DimensionMismatch(format!("{}x{} vs {}x{}", m.nrows, m.ncols, nrows, ncols)));
            }
            for (r, c, v) in m.iter() {
                b.add(r, c, w * v);
            }
        }
        Ok(b.finalize())
    }

    /// Largest entrywise difference.
    pub fn max_abs_diff(&self, other: &SparseMatrix) -> Result<f64> {
        Ok(SparseMatrix::linear_combination(&[(1.0, self), (-1.0, other)])?.max_abs())
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.iter() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn to_faer(&self) -> Result<SparseColMat<usize, f64>> {
        let triplets: Vec<Triplet<usize, usize, f64>> = self.iter().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &triplets)
            .map_err(|e| Error::DimensionMismatch(format!("sparse conversion failed: {e:?}")))
    }

    /// Writes the matrix in Matrix Market coordinate format.
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for (r, c, v) in self.iter() {
            writeln!(w, "{} {} {:.17e}", r + 1, c + 1, v)?;
        }
        Ok(())
    }
}
