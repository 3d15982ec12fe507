//! Shift-invert Krylov-Schur in complex arithmetic for general real pencils
//! `L z = λ R z`.
//!
//! The operator `(L - σR)⁻¹ R` is applied with a real factorization, so the
//! real and imaginary parts of a Krylov vector are solved together as two
//! right-hand sides. Restarts reorder the complex Schur form of the projected
//! matrix with Givens swaps. Missing copies of multiple eigenvalues are
//! recovered by a second run deflated against the converged Schur vectors.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use super::factor::Factorization;
use super::qep::QepBlocks;
use super::{random_vector, EigenOptions, EigenPair};
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

type C64 = Complex64;

/// A linear pencil with its solver settings.
#[derive(Debug, Clone)]
pub struct PencilProblem {
    pub left: SparseMatrix,
    pub right: SparseMatrix,
    pub options: EigenOptions,
    qep: Option<QepBlocks>,
}

impl PencilProblem {
    pub fn new(left: SparseMatrix, right: SparseMatrix, options: EigenOptions) -> Result<Self> {
        let n = left.nrows();
        if left.ncols() != n || right.nrows() != n || right.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "pencil of shapes {}x{} and {}x{}",
                left.nrows(),
                left.ncols(),
                right.nrows(),
                right.ncols()
            )));
        }
        Ok(Self { left, right, options, qep: None })
    }

    pub(crate) fn with_qep(
        left: SparseMatrix,
        right: SparseMatrix,
        options: EigenOptions,
        qep: QepBlocks,
    ) -> Result<Self> {
        let mut p = Self::new(left, right, options)?;
        p.qep = Some(qep);
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.left.nrows()
    }

    /// The quadratic problem this pencil linearizes, if any.
    pub fn qep_blocks(&self) -> Option<&QepBlocks> {
        self.qep.as_ref()
    }
}

fn split(x: &[C64]) -> Vec<f64> {
    // column-major [re | im]
    x.iter().map(|z| z.re).chain(x.iter().map(|z| z.im)).collect()
}

fn join(parts: &[f64]) -> Vec<C64> {
    let n = parts.len() / 2;
    (0..n).map(|i| C64::new(parts[i], parts[n + i])).collect()
}

enum ShiftInvert<'a> {
    /// Factorization of `L - σR` itself.
    Direct { fac: Factorization, right: &'a SparseMatrix },
    /// Only `Q(σ) = A + σB + σ²C` is factorized; the block structure of the
    /// linearization gives the rest.
    Quadratic { fac: Factorization, blocks: &'a QepBlocks, shifted_b: SparseMatrix, sigma: f64 },
}

impl ShiftInvert<'_> {
    fn new<'a>(p: &'a PencilProblem) -> Result<ShiftInvert<'a>> {
        let sigma = p.options.shift;
        let fail = |e: Error| Error::ShiftFactorization { shift: sigma, reason: e.to_string() };
        match &p.qep {
            Some(blocks) => {
                let q = blocks.evaluate(sigma)?;
                let fac = Factorization::lu(&q).map_err(fail)?;
                let shifted_b = SparseMatrix::linear_combination(&[(1.0, &blocks.b), (sigma, &blocks.c)])?;
                Ok(ShiftInvert::Quadratic { fac, blocks, shifted_b, sigma })
            }
            None => {
                let shifted = SparseMatrix::linear_combination(&[(1.0, &p.left), (-sigma, &p.right)])?;
                let fac = Factorization::lu(&shifted).map_err(fail)?;
                Ok(ShiftInvert::Direct { fac, right: &p.right })
            }
        }
    }

    /// `(L - σR)⁻¹ R x`.
    fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        match self {
            ShiftInvert::Direct { fac, right } => {
                let mut parts = split(x);
                let n = x.len();
                let re = right.mul_vec(&parts[..n]);
                let im = right.mul_vec(&parts[n..]);
                parts[..n].copy_from_slice(&re);
                parts[n..].copy_from_slice(&im);
                fac.solve_columns(&mut parts, 2)?;
                Ok(join(&parts))
            }
            ShiftInvert::Quadratic { fac, blocks, shifted_b, sigma } => {
                // R x = (C x1, x2) =: (r1, r2); then
                // -Q(σ) y2 = r1 + (B + σC) r2 and y1 = r2 + σ y2
                let n = blocks.dim();
                let parts = split(x);
                let mut rhs = vec![0.0; 2 * n];
                let mut r2 = vec![0.0; 2 * n];
                for part in 0..2 {
                    let xs = &parts[part * 2 * n..(part + 1) * 2 * n];
                    let (x1, x2) = xs.split_at(n);
                    let r1 = blocks.c.mul_vec(x1);
                    let br2 = shifted_b.mul_vec(x2);
                    for i in 0..n {
                        rhs[part * n + i] = -(r1[i] + br2[i]);
                    }
                    r2[part * n..(part + 1) * n].copy_from_slice(x2);
                }
                fac.solve_columns(&mut rhs, 2)?;
                let mut out = vec![C64::new(0.0, 0.0); 2 * n];
                for i in 0..n {
                    let y2 = C64::new(rhs[i], rhs[n + i]);
                    let r2i = C64::new(r2[i], r2[n + i]);
                    out[i] = r2i + *sigma * y2;
                    out[n + i] = y2;
                }
                Ok(out)
            }
        }
    }
}

fn cdot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn cnorm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn caxpy(a: C64, x: &[C64], y: &mut [C64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += a * x);
}

fn orthogonalize(w: &mut [C64], basis: &[Vec<C64>]) -> Vec<C64> {
    let mut h = vec![C64::new(0.0, 0.0); basis.len()];
    for _ in 0..2 {
        for (hi, b) in h.iter_mut().zip(basis) {
            let c = cdot(b, w);
            *hi += c;
            caxpy(-c, b, w);
        }
    }
    h
}

fn fresh_vector(n: usize, seed: u64, locked: &[Vec<C64>], basis: &[Vec<C64>]) -> Result<Vec<C64>> {
    for attempt in 0..8u64 {
        let re = random_vector(n, seed.wrapping_add(attempt.wrapping_mul(0x9e37_79b9)));
        let mut w: Vec<C64> = re.into_iter().map(|r| C64::new(r, 0.0)).collect();
        let before = cnorm(&w);
        orthogonalize(&mut w, locked);
        orthogonalize(&mut w, basis);
        let nrm = cnorm(&w);
        if nrm > 1e-8 * before {
            w.iter_mut().for_each(|z| *z /= nrm);
            return Ok(w);
        }
    }
    Err(Error::InvalidParameter("no start vector outside the deflated subspace".into()))
}

fn combine(basis: &[Vec<C64>], coeffs: impl Fn(usize) -> C64) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); basis[0].len()];
    for (j, b) in basis.iter().enumerate() {
        caxpy(coeffs(j), b, &mut out);
    }
    out
}

/// `(cs, sn)` with `[cs sn; -conj(sn) cs] [f; g] = [r; 0]`.
fn givens(f: C64, g: C64) -> (f64, C64) {
    if g.norm() == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if f.norm() == 0.0 {
        return (0.0, g.conj() / g.norm());
    }
    let d = (f.norm_sqr() + g.norm_sqr()).sqrt();
    (f.norm() / d, (f / f.norm()) * g.conj() / d)
}

/// Swaps diagonal entries `k` and `k+1` of the upper triangular `t`,
/// updating the unitary `q` so that `q t qᴴ` is unchanged.
fn swap_adjacent(t: &mut DMatrix<C64>, q: &mut DMatrix<C64>, k: usize) {
    let n = t.nrows();
    let (t11, t22) = (t[(k, k)], t[(k + 1, k + 1)]);
    let (cs, sn) = givens(t[(k, k + 1)], t22 - t11);
    // rows k, k+1 from the left
    for j in k + 2..n {
        let (x, y) = (t[(k, j)], t[(k + 1, j)]);
        t[(k, j)] = cs * x + sn * y;
        t[(k + 1, j)] = cs * y - sn.conj() * x;
    }
    // columns k, k+1 from the right
    let snc = sn.conj();
    for i in 0..k {
        let (x, y) = (t[(i, k)], t[(i, k + 1)]);
        t[(i, k)] = cs * x + snc * y;
        t[(i, k + 1)] = cs * y - snc.conj() * x;
    }
    t[(k, k)] = t22;
    t[(k + 1, k + 1)] = t11;
    for i in 0..n {
        let (x, y) = (q[(i, k)], q[(i, k + 1)]);
        q[(i, k)] = cs * x + snc * y;
        q[(i, k + 1)] = cs * y - snc.conj() * x;
    }
}

/// Complex Schur form `s = q t qᴴ` with the diagonal sorted by decreasing modulus.
fn sorted_schur(s: &DMatrix<C64>) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    let schur = Schur::try_new(s.clone(), f64::EPSILON, 100_000).ok_or_else(|| Error::ConvergenceFailure {
        converged: 0,
        wanted: s.nrows(),
        iterations: 100_000,
    })?;
    let (mut q, mut t) = schur.unpack();
    let n = t.nrows();
    for i in 0..n {
        for j in 0..i {
            t[(i, j)] = C64::new(0.0, 0.0);
        }
    }
    // insertion sort by adjacent swaps
    for i in 1..n {
        let mut k = i;
        while k > 0 && t[(k, k)].norm() > t[(k - 1, k - 1)].norm() {
            swap_adjacent(&mut t, &mut q, k - 1);
            k -= 1;
        }
    }
    Ok((q, t))
}

/// Eigenvector of upper triangular `t` for diagonal entry `i`, unit norm.
fn triangular_eigenvector(t: &DMatrix<C64>, i: usize) -> Vec<C64> {
    let n = t.nrows();
    let mut y = vec![C64::new(0.0, 0.0); n];
    y[i] = C64::new(1.0, 0.0);
    let lam = t[(i, i)];
    let floor = f64::EPSILON * lam.norm().max(f64::MIN_POSITIVE);
    for l in (0..i).rev() {
        let s: C64 = (l + 1..=i).map(|q| t[(l, q)] * y[q]).sum();
        let mut d = t[(l, l)] - lam;
        if d.norm() < floor {
            d = C64::new(floor, 0.0);
        }
        y[l] = -s / d;
    }
    let nrm = cnorm(&y);
    y.iter_mut().for_each(|z| *z /= nrm);
    y
}

/// Converged Schur vectors and Ritz values `θ` of largest modulus.
fn krylov_schur(
    op: &ShiftInvert<'_>,
    n: usize,
    want: usize,
    opts: &EigenOptions,
    locked: &[Vec<C64>],
    seed: u64,
) -> Result<(Vec<Vec<C64>>, Vec<C64>)> {
    let mdim = EigenOptions::krylov_dim(want).min(n - locked.len() - 1);
    let mut basis = vec![fresh_vector(n, seed, locked, &[])?];
    let mut s = DMatrix::<C64>::zeros(mdim, mdim);
    let mut p = 0;
    let mut converged = 0;
    for restart in 0..opts.max_restarts {
        let mut beta_last = 0.0;
        for j in p..mdim {
            let mut w = op.apply(&basis[j])?;
            orthogonalize(&mut w, locked);
            let h = orthogonalize(&mut w, &basis);
            for (i, hi) in h.iter().enumerate() {
                s[(i, j)] = *hi;
            }
            let beta = cnorm(&w);
            let scale = cnorm(&h);
            let (next, beta) = if beta > 1e-12 * scale {
                w.iter_mut().for_each(|z| *z /= beta);
                (w, beta)
            } else {
                let seed = seed ^ ((restart * mdim + j) as u64 + 1).wrapping_mul(0x2545_f491);
                (fresh_vector(n, seed, locked, &basis)?, 0.0)
            };
            if j + 1 < mdim {
                s[(j + 1, j)] = C64::new(beta, 0.0);
            } else {
                beta_last = beta;
            }
            basis.push(next);
        }
        let (q, t) = sorted_schur(&s)?;
        converged = 0;
        for i in 0..want {
            let y = triangular_eigenvector(&t, i);
            let last: C64 = (0..mdim).map(|c| q[(mdim - 1, c)] * y[c]).sum();
            if beta_last * last.norm() <= opts.tol * t[(i, i)].norm() {
                converged += 1;
            } else {
                break;
            }
        }
        if converged >= want {
            let vectors = (0..want).map(|c| combine(&basis[..mdim], |j| q[(j, c)])).collect();
            let thetas = (0..want).map(|c| t[(c, c)]).collect();
            return Ok((vectors, thetas));
        }
        let keep = (want + (mdim - want) / 2).min(mdim - 1);
        let residual_vec = basis.pop().expect("basis holds mdim + 1 vectors");
        let mut kept: Vec<Vec<C64>> = (0..keep).map(|c| combine(&basis, |j| q[(j, c)])).collect();
        s.fill(C64::new(0.0, 0.0));
        for i in 0..keep {
            for j in i..keep {
                s[(i, j)] = t[(i, j)];
            }
            s[(keep, i)] = beta_last * q[(mdim - 1, i)];
        }
        kept.push(residual_vec);
        basis = kept;
        p = keep;
    }
    Err(Error::ConvergenceFailure { converged, wanted: want, iterations: opts.max_restarts })
}

/// Gram-Schmidt (two passes) of a list of vectors, dropping dependent ones.
fn orthonormalize(vectors: Vec<Vec<C64>>) -> Vec<Vec<C64>> {
    let mut out: Vec<Vec<C64>> = Vec::with_capacity(vectors.len());
    for mut v in vectors {
        let before = cnorm(&v);
        orthogonalize(&mut v, &out);
        let nrm = cnorm(&v);
        if nrm > 1e-10 * before {
            v.iter_mut().for_each(|z| *z /= nrm);
            out.push(v);
        }
    }
    out
}

/// Rayleigh-Ritz on an (approximately) invariant orthonormal basis `w`:
/// returns the sorted Schur basis and the triangular factor.
fn rayleigh_ritz(op: &ShiftInvert<'_>, w: Vec<Vec<C64>>) -> Result<(Vec<Vec<C64>>, DMatrix<C64>)> {
    let opw: Vec<Vec<C64>> = w.iter().map(|x| op.apply(x)).collect::<Result<_>>()?;
    let k = w.len();
    let h = DMatrix::from_fn(k, k, |i, j| cdot(&w[i], &opw[j]));
    let (q, t) = sorted_schur(&h)?;
    let z = (0..k).map(|c| combine(&w, |j| q[(j, c)])).collect();
    Ok((z, t))
}

fn pencil_residual(p: &PencilProblem, lambda: C64, x: &[C64], norms: (f64, f64)) -> f64 {
    let parts = split(x);
    let n = x.len();
    let (lr, li) = (p.left.mul_vec(&parts[..n]), p.left.mul_vec(&parts[n..]));
    let (rr, ri) = (p.right.mul_vec(&parts[..n]), p.right.mul_vec(&parts[n..]));
    let r: f64 =
        (0..n).map(|i| (C64::new(lr[i], li[i]) - lambda * C64::new(rr[i], ri[i])).norm_sqr()).sum::<f64>().sqrt();
    r / ((norms.0 + lambda.norm() * norms.1) * cnorm(x)).max(f64::MIN_POSITIVE)
}

/// The `nev` eigenpairs of `L z = λ R z` nearest the shift, ordered by
/// distance to it. Complex eigenvalues come with their conjugates.
pub fn eig_gen_shift_invert(p: &PencilProblem) -> Result<Vec<EigenPair>> {
    let opts = &p.options;
    opts.validate()?;
    let n = p.dim();
    let k = opts.nev;
    // one extra so that a conjugate pair at the cut is not split
    let want = (k + 1).min(n.saturating_sub(1)).max(1);
    if k > n || n < EigenOptions::krylov_dim(want) + 2 {
        return Err(Error::InvalidParameter(format!(
            "{k} eigenvalues requested from a pencil of size {n}; use the dense solver for small pencils"
        )));
    }
    let sigma = opts.shift;
    let op = ShiftInvert::new(p)?;
    let (mut z, mut thetas) = krylov_schur(&op, n, want, opts, &[], opts.seed)?;
    for cycle in 1..=4u64 {
        if n - z.len() <= EigenOptions::krylov_dim(want) + 1 {
            break;
        }
        let (z2, th2) = krylov_schur(&op, n, want, opts, &z, opts.seed.wrapping_add(cycle))?;
        let weakest = thetas.iter().map(|t| t.norm()).fold(f64::INFINITY, f64::min);
        if !th2.iter().any(|t| t.norm() > weakest * (1.0 + 1e-9)) {
            break;
        }
        let w = orthonormalize(z.into_iter().chain(z2).collect());
        let (zz, t) = rayleigh_ritz(&op, w)?;
        let keep = want.min(zz.len());
        thetas = (0..keep).map(|c| t[(c, c)]).collect();
        z = zz.into_iter().take(keep).collect();
    }

    let (z, t) = rayleigh_ritz(&op, z)?;
    let norms = (p.left.norm_1(), p.right.norm_1());
    let mut pairs: Vec<EigenPair> = Vec::with_capacity(z.len() + 2);
    for i in 0..z.len() {
        let theta = t[(i, i)];
        if theta.norm() == 0.0 {
            continue;
        }
        let y = triangular_eigenvector(&t, i);
        let x = combine(&z, |j| y[j]);
        let lambda = C64::new(sigma, 0.0) + 1.0 / theta;
        let residual = pencil_residual(p, lambda, &x, norms);
        pairs.push(EigenPair { value: lambda, vector: x, residual });
    }
    // conjugate closure: the operator is real
    let snapshot: Vec<C64> = pairs.iter().map(|e| e.value).collect();
    for i in 0..snapshot.len() {
        let v = snapshot[i];
        if v.im.abs() <= 1e-10 * v.norm() {
            continue;
        }
        let has_conj = snapshot.iter().any(|w| (w - v.conj()).norm() <= 1e-8 * v.norm());
        if !has_conj {
            let e = &pairs[i];
            pairs.push(EigenPair {
                value: v.conj(),
                vector: e.vector.iter().map(|z| z.conj()).collect(),
                residual: e.residual,
            });
        }
    }
    let dist = |v: C64| (v - sigma).norm();
    pairs.sort_by(|a, b| dist(a.value).total_cmp(&dist(b.value)));
    let mut cut = k.min(pairs.len());
    if cut < pairs.len() && cut > 0 {
        let last = pairs[cut - 1].value;
        let next = pairs[cut].value;
        if last.im.abs() > 1e-10 * last.norm() && (next - last.conj()).norm() <= 1e-8 * last.norm() {
            cut += 1;
        }
    }
    pairs.truncate(cut);
    Ok(pairs)
}
