//! Shift-invert Krylov-Schur (thick-restart Lanczos) for symmetric definite
//! pencils `A x = λ M x`.
//!
//! The operator `(A - σM)⁻¹ M` is self-adjoint in the `M` inner product, so
//! the projected matrix is symmetric and restarts keep Ritz vectors directly.
//! A plain Krylov space sees only one direction of a multiple eigenvalue;
//! after convergence a second run deflated against the converged vectors
//! picks up any missing copies.

use nalgebra::{DMatrix, SymmetricEigen};

use super::dense::dense_sym_pencil;
use super::factor::Factorization;
use super::{dot, norm, random_vector, EigenOptions, RealEigenPair};
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

struct ShiftInvert<'a> {
    fac: Factorization,
    m: &'a SparseMatrix,
}

impl ShiftInvert<'_> {
    /// `(A - σM)⁻¹ y` where `y = M v` is already available.
    fn apply_to_mv(&self, mv: &[f64]) -> Result<Vec<f64>> {
        let mut w = mv.to_vec();
        self.fac.solve_in_place(&mut w)?;
        Ok(w)
    }
}

/// An `M`-normalized vector together with its image under `M`.
#[derive(Clone)]
struct MVec {
    v: Vec<f64>,
    mv: Vec<f64>,
}

struct Ritz {
    theta: f64,
    x: MVec,
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += a * x);
}

/// Removes the `M`-components along `basis` (two passes) and returns the
/// accumulated coefficients.
fn m_orthogonalize(w: &mut [f64], basis: &[MVec]) -> Vec<f64> {
    let mut h = vec![0.0; basis.len()];
    for _ in 0..2 {
        for (hi, b) in h.iter_mut().zip(basis) {
            let c = dot(&b.mv, w);
            *hi += c;
            axpy(-c, &b.v, w);
        }
    }
    h
}

fn fresh_vector(m: &SparseMatrix, seed: u64, locked: &[MVec], basis: &[MVec]) -> Result<MVec> {
    for attempt in 0..8u64 {
        let mut w = random_vector(m.nrows(), seed.wrapping_add(attempt.wrapping_mul(0x9e37_79b9)));
        let before = norm(&w);
        m_orthogonalize(&mut w, locked);
        m_orthogonalize(&mut w, basis);
        let mw = m.mul_vec(&w);
        let nrm = dot(&w, &mw).max(0.0).sqrt();
        if nrm > 1e-8 * before {
            return Ok(MVec { v: w.iter().map(|x| x / nrm).collect(), mv: mw.iter().map(|x| x / nrm).collect() });
        }
    }
    Err(Error::InvalidParameter("no start vector outside the deflated subspace".into()))
}

fn combine(basis: &[MVec], coeffs: impl Fn(usize) -> f64) -> MVec {
    let n = basis[0].v.len();
    let mut out = MVec { v: vec![0.0; n], mv: vec![0.0; n] };
    for (j, b) in basis.iter().enumerate() {
        let c = coeffs(j);
        if c != 0.0 {
            axpy(c, &b.v, &mut out.v);
            axpy(c, &b.mv, &mut out.mv);
        }
    }
    out
}

/// The `want` Ritz pairs of largest `|θ|`, in that order.
fn krylov_schur(
    op: &ShiftInvert<'_>,
    want: usize,
    opts: &EigenOptions,
    locked: &[MVec],
    seed: u64,
) -> Result<Vec<Ritz>> {
    let n = op.m.nrows();
    let mdim = EigenOptions::krylov_dim(want).min(n - locked.len() - 1);
    debug_assert!(mdim > want);
    let mut basis = vec![fresh_vector(op.m, seed, locked, &[])?];
    let mut s = DMatrix::<f64>::zeros(mdim, mdim);
    let mut p = 0;
    let mut converged = 0;
    for restart in 0..opts.max_restarts {
        let mut beta_last = 0.0;
        for j in p..mdim {
            let mut w = op.apply_to_mv(&basis[j].mv)?;
            m_orthogonalize(&mut w, locked);
            let h = m_orthogonalize(&mut w, &basis);
            for (i, hi) in h.iter().enumerate() {
                s[(i, j)] = *hi;
            }
            let mw = op.m.mul_vec(&w);
            let beta = dot(&w, &mw).max(0.0).sqrt();
            let scale = norm(&h);
            let (next, beta) = if beta > 1e-12 * scale {
                let next = MVec { v: w.iter().map(|x| x / beta).collect(), mv: mw.iter().map(|x| x / beta).collect() };
                (next, beta)
            } else {
                // invariant subspace found; continue with an independent direction
                let seed = seed ^ ((restart * mdim + j) as u64 + 1).wrapping_mul(0x2545_f491);
                (fresh_vector(op.m, seed, locked, &basis)?, 0.0)
            };
            if j + 1 < mdim {
                s[(j + 1, j)] = beta;
            } else {
                beta_last = beta;
            }
            basis.push(next);
        }
        for j in 0..mdim {
            for i in j + 1..mdim {
                s[(i, j)] = s[(j, i)];
            }
        }
        let eig = SymmetricEigen::new(s.clone());
        let mut order: Vec<usize> = (0..mdim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].abs().total_cmp(&eig.eigenvalues[a].abs()));
        let resid = |c: usize| (beta_last * eig.eigenvectors[(mdim - 1, c)]).abs();
        converged = order.iter().take(want).take_while(|&&c| resid(c) <= opts.tol * eig.eigenvalues[c].abs()).count();
        let y = &eig.eigenvectors;
        if converged >= want {
            return Ok(order[..want]
                .iter()
                .map(|&c| Ritz { theta: eig.eigenvalues[c], x: combine(&basis[..mdim], |j| y[(j, c)]) })
                .collect());
        }
        let keep = (want + (mdim - want) / 2).min(mdim - 1);
        let residual_vec = basis.pop().expect("basis holds mdim + 1 vectors");
        let mut kept: Vec<MVec> = order[..keep].iter().map(|&c| combine(&basis, |j| y[(j, c)])).collect();
        s.fill(0.0);
        for (i, &c) in order[..keep].iter().enumerate() {
            s[(i, i)] = eig.eigenvalues[c];
            let b = beta_last * y[(mdim - 1, c)];
            s[(keep, i)] = b;
            s[(i, keep)] = b;
        }
        kept.push(residual_vec);
        basis = kept;
        p = keep;
    }
    Err(Error::ConvergenceFailure { converged, wanted: want, iterations: opts.max_restarts })
}

fn residual(a: &SparseMatrix, m: &SparseMatrix, lambda: f64, x: &[f64], a_norm: f64) -> f64 {
    let ax = a.mul_vec(x);
    let mx = m.mul_vec(x);
    let r: f64 = ax.iter().zip(&mx).map(|(a, m)| (a - lambda * m).powi(2)).sum::<f64>().sqrt();
    r / (a_norm * norm(x)).max(f64::MIN_POSITIVE)
}

/// The `opts.nev` eigenpairs of `A x = λ M x` nearest `opts.shift`, ascending.
///
/// Both matrices must be symmetric and `M` positive definite. Eigenvectors
/// are `M`-orthonormal.
pub fn eig_sym_pencil(a: &SparseMatrix, m: &SparseMatrix, opts: &EigenOptions) -> Result<Vec<RealEigenPair>> {
    opts.validate()?;
    let n = a.nrows();
    if a.ncols() != n || m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "pencil of shapes {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            m.nrows(),
            m.ncols()
        )));
    }
    let k = opts.nev;
    if k > n {
        return Err(Error::InvalidParameter(format!("{k} eigenvalues requested from a problem of size {n}")));
    }
    let a_norm = a.norm_1();
    let sigma = opts.shift;
    let nearest_first = |x: f64, y: f64| (x - sigma).abs().total_cmp(&(y - sigma).abs());

    let mut pairs: Vec<(f64, Vec<f64>)> = if n <= EigenOptions::krylov_dim(k) + k + 2 {
        let (vals, vecs) = dense_sym_pencil(&a.to_dense(), &m.to_dense())?;
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&i, &j| nearest_first(vals[i], vals[j]));
        idx[..k].iter().map(|&i| (vals[i], vecs.column(i).iter().copied().collect())).collect()
    } else {
        let shifted = SparseMatrix::linear_combination(&[(1.0, a), (-sigma, m)])?;
        let fac = Factorization::symmetric(&shifted)
            .map_err(|e| Error::ShiftFactorization { shift: sigma, reason: e.to_string() })?;
        let op = ShiftInvert { fac, m };
        let mut found = krylov_schur(&op, k, opts, &[], opts.seed)?;
        for cycle in 1..=4u64 {
            if n - found.len() <= EigenOptions::krylov_dim(k) + 1 {
                break;
            }
            let locked: Vec<MVec> = found.iter().map(|r| r.x.clone()).collect();
            let extra = krylov_schur(&op, k, opts, &locked, opts.seed.wrapping_add(cycle))?;
            let weakest = found.iter().map(|r| r.theta.abs()).fold(f64::INFINITY, f64::min);
            let improved = extra.iter().any(|r| r.theta.abs() > weakest * (1.0 + 1e-9));
            if !improved {
                break;
            }
            found.extend(extra);
            found.sort_by(|x, y| y.theta.abs().total_cmp(&x.theta.abs()));
            found.truncate(k);
        }
        found.into_iter().map(|r| (sigma + 1.0 / r.theta, r.x.v)).collect()
    };
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(pairs
        .into_iter()
        .map(|(value, vector)| RealEigenPair { residual: residual(a, m, value, &vector, a_norm), value, vector })
        .collect())
}
