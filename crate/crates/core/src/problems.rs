//! Drivers for the source problem, the biharmonic eigenvalue problem and the
//! transmission eigenvalue problem, plus the Morley parameter sweeps.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::{error_norms, ErrorNorms, ExactSolution};
use crate::assembly::{
    assemble_bilaplace, assemble_load, assemble_mass, assemble_tep_matrices, assemble_terms, coefficient_range,
    FormKind, FormTerm, TepMatrices,
};
use crate::coefficient::CoefficientField;
use crate::dofmap::{build_dofmap_for, DofMap, Element};
use crate::error::{Error, Result};
use crate::frame::BasisValue;
use crate::linalg::{
    dense_qep_eigenvalues, eig_gen_shift_invert, eig_sym_pencil, qep_linearize, qep_residual, solve_sparse,
    EigenOptions, QepBlocks,
};
use crate::mesh::{Domain, Point, TriMesh};
use crate::quadrature::DEFAULT_DEGREE;
use crate::sparse::SparseMatrix;

/// Discretization used for the fourth-order operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Scheme {
    B3,
    /// Morley element with the Hessian splitting parameter `alpha`.
    Morley {
        alpha: f64,
    },
}

impl Scheme {
    pub fn element(self) -> Element {
        match self {
            Scheme::B3 => Element::B3,
            Scheme::Morley { .. } => Element::Morley,
        }
    }

    pub fn alpha(self) -> Option<f64> {
        match self {
            Scheme::B3 => None,
            Scheme::Morley { alpha } => Some(alpha),
        }
    }

    pub fn label(self) -> String {
        match self {
            Scheme::B3 => "b3".into(),
            Scheme::Morley { alpha } => format!("morley(alpha={alpha})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Bihar,
    Tep,
}

/// Result of one source-problem solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SourceSolution {
    pub subdivisions: usize,
    pub h: f64,
    pub dofs: usize,
    #[serde(skip)]
    pub coeffs: Vec<f64>,
    pub errors: Option<ErrorNorms>,
}

/// Eigenvalues computed on one mesh.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumSolution {
    pub subdivisions: usize,
    pub h: f64,
    pub dofs: usize,
    pub scheme: Scheme,
    pub problem: ProblemKind,
    /// `λ` for the biharmonic problem, `τ` for the transmission problem;
    /// ascending.
    pub values: Vec<f64>,
    /// `√τ` for the transmission problem.
    pub roots: Option<Vec<f64>>,
    pub residuals: Vec<f64>,
    /// Real negative `τ` dropped from the transmission spectrum.
    pub discarded_negative: usize,
    /// Shift used by the final solve.
    pub shift: f64,
    #[serde(skip)]
    pub vectors: Vec<Vec<f64>>,
}

impl SpectrumSolution {
    /// The values tables are built from: `√τ` for transmission runs.
    pub fn reported(&self) -> &[f64] {
        self.roots.as_deref().unwrap_or(&self.values)
    }
}

/// Eigensolver settings shared by the spectral drivers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralSettings {
    /// Spectral shift; each driver has its own default.
    pub shift: Option<f64>,
    pub tol: f64,
    pub max_restarts: usize,
    pub seed: u64,
    /// Number of eigenvalues computed near the shift before filtering the
    /// transmission spectrum; defaults to `2k + 4`.
    pub candidates: Option<usize>,
}

impl Default for SpectralSettings {
    fn default() -> Self {
        let o = EigenOptions::default();
        Self { shift: None, tol: o.tol, max_restarts: o.max_restarts, seed: o.seed, candidates: None }
    }
}

impl SpectralSettings {
    fn options(&self, nev: usize, shift: f64) -> EigenOptions {
        EigenOptions { nev, shift, tol: self.tol, max_restarts: self.max_restarts, seed: self.seed }
    }
}

/// A source problem with known solution.
#[derive(Clone)]
pub struct SourceExample {
    pub name: &'static str,
    pub domain: Domain,
    pub delta: CoefficientField,
    pub load: Arc<dyn Fn(Point) -> f64 + Send + Sync>,
    pub exact: Arc<dyn ExactSolution + Send>,
}

impl std::fmt::Debug for SourceExample {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SourceExample").field("name", &self.name).field("domain", &self.domain).finish()
    }
}

/// `sin²(πx) sin²(πy)` with derivatives.
pub fn sine_bump(p: Point) -> BasisValue {
    let s = |t: f64| (PI * t).sin().powi(2);
    let ds = |t: f64| PI * (2.0 * PI * t).sin();
    let dds = |t: f64| 2.0 * PI * PI * (2.0 * PI * t).cos();
    let [x, y] = p;
    BasisValue {
        value: s(x) * s(y),
        grad: [ds(x) * s(y), s(x) * ds(y)],
        hess: [dds(x) * s(y), ds(x) * ds(y), s(x) * dds(y)],
    }
}

/// `x² y² (1-x-y)²` with derivatives.
pub fn triangle_bubble_squared(p: Point) -> BasisValue {
    let [x, y] = p;
    let g = x * y * (1.0 - x - y);
    let gx = y * (1.0 - 2.0 * x - y);
    let gy = x * (1.0 - x - 2.0 * y);
    let (gxx, gxy, gyy) = (-2.0 * y, 1.0 - 2.0 * x - 2.0 * y, -2.0 * x);
    BasisValue {
        value: g * g,
        grad: [2.0 * g * gx, 2.0 * g * gy],
        hess: [2.0 * (gx * gx + g * gxx), 2.0 * (gx * gy + g * gxy), 2.0 * (gy * gy + g * gyy)],
    }
}

impl SourceExample {
    /// Source examples 1 to 3.
    pub fn numbered(k: usize) -> Result<Self> {
        let ex = match k {
            1 => Self {
                name: "example1",
                domain: Domain::Square,
                delta: CoefficientField::constant(1.0),
                load: Arc::new(|p: Point| {
                    let (cx, cy) = ((2.0 * PI * p[0]).cos(), (2.0 * PI * p[1]).cos());
                    -4.0 * PI.powi(4) * (cx + cy - 4.0 * cx * cy)
                }),
                exact: Arc::new(sine_bump),
            },
            2 => Self {
                name: "example2",
                domain: Domain::Triangle,
                delta: CoefficientField::constant(1.0),
                load: Arc::new(|p: Point| {
                    let s = p[0] + p[1];
                    72.0 * s * s - 48.0 * s + 8.0
                }),
                exact: Arc::new(triangle_bubble_squared),
            },
            3 => Self {
                name: "example3",
                domain: Domain::Triangle,
                delta: CoefficientField::preset("delta_lin")?,
                load: Arc::new(|p: Point| {
                    let [x, y] = p;
                    64.0 * x.powi(3) + 48.0 * x * x * y + 528.0 * x * x - 48.0 * x * y * y + 1152.0 * x * y
                        - 368.0 * x
                        - 64.0 * y.powi(3)
                        + 624.0 * y * y
                        - 400.0 * y
                        + 64.0
                }),
                exact: Arc::new(triangle_bubble_squared),
            },
            other => return Err(Error::InvalidParameter(format!("no source example {other}"))),
        };
        Ok(ex)
    }

    pub fn solve(&self, subdivisions: usize) -> Result<SourceSolution> {
        let load = self.load.clone();
        solve_source(self.domain, subdivisions, &self.delta, move |p| load(p), Some(&*self.exact))
    }
}

fn check_positive(mesh: &TriMesh, c: &CoefficientField) -> Result<(f64, f64)> {
    let (lo, hi) = coefficient_range(mesh, c)?;
    if !(lo > 0.0) || !hi.is_finite() {
        return Err(Error::InvalidCoefficient(format!("'{}' must be positive, reaches {lo}", c.name())));
    }
    Ok((lo, hi))
}

/// Solves `(δ Δ_h u, Δ_h v) = (f, v)` in the B³ space on the mesh of `domain`
/// with `subdivisions` cells per unit length.
pub fn solve_source<F>(
    domain: Domain,
    subdivisions: usize,
    delta: &CoefficientField,
    f: F,
    exact: Option<&dyn ExactSolution>,
) -> Result<SourceSolution>
where
    F: Fn(Point) -> f64 + Sync,
{
    let mesh = domain.build(subdivisions)?;
    check_positive(&mesh, delta)?;
    let map = build_dofmap_for(&mesh, Element::B3);
    let coeffs = if map.num_dofs() == 0 {
        Vec::new()
    } else {
        let k = assemble_bilaplace(&mesh, &map, delta)?;
        let b = assemble_load(&mesh, &map, f)?;
        solve_sparse(&k, &b)?
    };
    let errors = exact.map(|u| error_norms(&mesh, &map, &coeffs, u)).transpose()?;
    Ok(SourceSolution { subdivisions, h: mesh.h(), dofs: map.num_dofs(), coeffs, errors })
}

/// Stiffness and mass matrices of the biharmonic eigenvalue problem.
pub fn bihar_matrices(
    mesh: &TriMesh,
    map: &DofMap,
    delta: &CoefficientField,
    scheme: Scheme,
) -> Result<(SparseMatrix, SparseMatrix)> {
    let (delta_min, _) = check_positive(mesh, delta)?;
    if map.element() != scheme.element() {
        return Err(Error::InvalidParameter("degree-of-freedom map does not match the scheme".into()));
    }
    let stiffness = match scheme {
        Scheme::B3 => assemble_bilaplace(mesh, map, delta)?,
        Scheme::Morley { alpha } => {
            if !(alpha > 0.0 && alpha < delta_min) {
                return Err(Error::InvalidParameter(format!("alpha = {alpha} outside (0, {delta_min})")));
            }
            let rest = delta.map(format!("{}-alpha", delta.name()), move |v| v - alpha);
            let alpha_c = CoefficientField::constant(alpha);
            assemble_terms(
                mesh,
                map,
                &[FormTerm::new(FormKind::Bilaplace, &rest), FormTerm::new(FormKind::Hessian, &alpha_c)],
                DEFAULT_DEGREE,
            )?
        }
    };
    let mass = assemble_mass(mesh, map, &CoefficientField::constant(1.0))?;
    Ok((stiffness, mass))
}

/// The `k` smallest eigenvalues of `(δ Δ_h u, Δ_h v) = λ (u, v)`.
pub fn solve_bihar_evp(
    domain: Domain,
    subdivisions: usize,
    delta: &CoefficientField,
    k: usize,
    scheme: Scheme,
    settings: &SpectralSettings,
) -> Result<SpectrumSolution> {
    let mesh = domain.build(subdivisions)?;
    let map = build_dofmap_for(&mesh, scheme.element());
    let (stiffness, mass) = bihar_matrices(&mesh, &map, delta, scheme)?;
    let shift = settings.shift.unwrap_or(0.0);
    let nev = k.min(map.num_dofs());
    let (values, residuals, vectors) = if nev == 0 {
        (Vec::new(), Vec::new(), Vec::new())
    } else {
        let pairs = eig_sym_pencil(&stiffness, &mass, &settings.options(nev, shift))?;
        let mut v = (Vec::new(), Vec::new(), Vec::new());
        for p in pairs {
            v.0.push(p.value);
            v.1.push(p.residual);
            v.2.push(p.vector);
        }
        v
    };
    Ok(SpectrumSolution {
        subdivisions,
        h: mesh.h(),
        dofs: map.num_dofs(),
        scheme,
        problem: ProblemKind::Bihar,
        values,
        roots: None,
        residuals,
        discarded_negative: 0,
        shift,
        vectors,
    })
}

/// Relative imaginary part below which a computed `τ` counts as real.
const REAL_TOL: f64 = 1e-6;
/// Smallest `τ` reported; the formulation has no zero eigenvalue.
const MIN_TAU: f64 = 1e-6;
const TEP_DEFAULT_SHIFT: f64 = 1.0;
const TEP_RETRY_SHIFT: f64 = 4.0;

struct RealCandidate {
    tau: f64,
    vector: Vec<f64>,
    residual: f64,
}

/// Real eigenpairs near `shift` and the radius of the disc around the shift
/// inside which the computed spectrum is complete.
fn tep_real_pairs(blocks: &QepBlocks, opts: EigenOptions) -> Result<(Vec<RealCandidate>, f64)> {
    let n = blocks.dim();
    let nev = opts.nev.min(2 * n);
    if 2 * n < EigenOptions::krylov_dim(nev + 1) + 2 {
        return dense_tep_pairs(blocks);
    }
    let problem = qep_linearize(blocks.clone(), EigenOptions { nev, ..opts })?;
    let pairs = eig_gen_shift_invert(&problem)?;
    let radius = if pairs.len() < 2 * n {
        pairs.iter().map(|p| (p.value - opts.shift).norm()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let mut out = Vec::new();
    for p in pairs {
        if p.value.im.abs() > REAL_TOL * p.value.norm() {
            continue;
        }
        let x = real_part_aligned(&p.vector[n..]);
        let tau = p.value.re;
        let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let residual = qep_residual(blocks, Complex64::new(tau, 0.0), &xc);
        out.push(RealCandidate { tau, vector: x, residual });
    }
    Ok((out, radius))
}

/// Rotates a complex vector so its largest entry is real and positive, then
/// keeps the real part.
fn real_part_aligned(z: &[Complex64]) -> Vec<f64> {
    let big = z.iter().copied().max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr())).unwrap_or_default();
    if big.norm() == 0.0 {
        return vec![0.0; z.len()];
    }
    let phase = big.conj() / big.norm();
    z.iter().map(|v| (v * phase).re).collect()
}

/// Full dense spectrum for tiny meshes; eigenvectors from the null space of
/// `A + τB + τ²C`.
fn dense_tep_pairs(blocks: &QepBlocks) -> Result<(Vec<RealCandidate>, f64)> {
    let (a, b, c) = (blocks.a.to_dense(), blocks.b.to_dense(), blocks.c.to_dense());
    let mut taus: Vec<f64> = dense_qep_eigenvalues(&a, &b, &c)?
        .into_iter()
        .filter(|t| t.im.abs() <= REAL_TOL * t.norm())
        .map(|t| t.re)
        .collect();
    taus.sort_by(f64::total_cmp);
    let mut out: Vec<RealCandidate> = Vec::new();
    let mut repeat = 0;
    for (i, &tau) in taus.iter().enumerate() {
        let same = i > 0 && (tau - taus[i - 1]).abs() <= 1e-8 * tau.abs().max(1.0);
        repeat = if same { repeat + 1 } else { 0 };
        let q: DMatrix<f64> = &a + &b * tau + &c * (tau * tau);
        let eig = ((&q + q.transpose()) * 0.5).symmetric_eigen();
        let mut order: Vec<usize> = (0..q.nrows()).collect();
        order.sort_by(|&x, &y| eig.eigenvalues[x].abs().total_cmp(&eig.eigenvalues[y].abs()));
        let col = order[repeat.min(order.len() - 1)];
        let x: Vec<f64> = eig.eigenvectors.column(col).iter().copied().collect();
        let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let residual = qep_residual(blocks, Complex64::new(tau, 0.0), &xc);
        out.push(RealCandidate { tau, vector: x, residual });
    }
    Ok((out, f64::INFINITY))
}

/// Scales `x` so that `xᵀ G x = 1` with its largest entry positive.
fn normalize_gradient(grad: &SparseMatrix, x: &mut [f64]) {
    let gx = grad.mul_vec(x);
    let s: f64 = x.iter().zip(&gx).map(|(a, b)| a * b).sum();
    if s > 0.0 {
        let big = x.iter().copied().max_by(|a, b| a.abs().total_cmp(&b.abs())).unwrap_or(1.0);
        let scale = big.signum() / s.sqrt();
        x.iter_mut().for_each(|v| *v *= scale);
    }
}

/// Assembled transmission matrices for one mesh.
pub fn tep_matrices(mesh: &TriMesh, map: &DofMap, n: &CoefficientField, scheme: Scheme) -> Result<TepMatrices> {
    assemble_tep_matrices(mesh, map, n, scheme.alpha())
}

/// The `k` smallest positive real transmission eigenvalues `τ` for
/// refraction index `n`, with `√τ` and gradient-normalized eigenvectors.
///
/// Without an explicit shift the solve starts at 1 and retries once at 4
/// with twice as many candidates when too few real values were certified.
pub fn solve_tep(
    domain: Domain,
    subdivisions: usize,
    n: &CoefficientField,
    k: usize,
    scheme: Scheme,
    settings: &SpectralSettings,
) -> Result<SpectrumSolution> {
    let mesh = domain.build(subdivisions)?;
    let map = build_dofmap_for(&mesh, scheme.element());
    let mats = tep_matrices(&mesh, &map, n, scheme)?;
    let grad = mats.grad.clone();
    let blocks = QepBlocks::new(mats.a, mats.b, mats.c)?;
    let mut shift = settings.shift.unwrap_or(TEP_DEFAULT_SHIFT);
    let mut nev = settings.candidates.unwrap_or(2 * k + 4).max(k);
    let mut chosen = Vec::new();
    let mut negative = 0;
    if map.num_dofs() > 0 && k > 0 {
        for attempt in 0..2 {
            let (cands, radius) = tep_real_pairs(&blocks, settings.options(nev, shift))?;
            negative = cands.iter().filter(|c| c.tau < -MIN_TAU).count();
            let mut pos: Vec<RealCandidate> = cands.into_iter().filter(|c| c.tau >= MIN_TAU).collect();
            pos.sort_by(|a, b| a.tau.total_cmp(&b.tau));
            // values below the disc around the shift may have been missed
            let disc_reaches_zero = shift - radius <= MIN_TAU;
            let certified = pos.iter().filter(|c| c.tau <= shift + radius && disc_reaches_zero).count();
            let done = certified >= k || attempt == 1 || settings.shift.is_some() && settings.candidates.is_some();
            chosen = pos;
            if done {
                break;
            }
            if settings.shift.is_none() {
                shift = TEP_RETRY_SHIFT;
            }
            nev *= 2;
        }
    }
    chosen.truncate(k);
    let mut values = Vec::with_capacity(chosen.len());
    let mut residuals = Vec::with_capacity(chosen.len());
    let mut vectors = Vec::with_capacity(chosen.len());
    for mut c in chosen {
        normalize_gradient(&grad, &mut c.vector);
        values.push(c.tau);
        residuals.push(c.residual);
        vectors.push(c.vector);
    }
    let roots = values.iter().map(|t| t.sqrt()).collect();
    Ok(SpectrumSolution {
        subdivisions,
        h: mesh.h(),
        dofs: map.num_dofs(),
        scheme,
        problem: ProblemKind::Tep,
        values,
        roots: Some(roots),
        residuals,
        discarded_negative: negative,
        shift,
        vectors,
    })
}

/// One `(α, mesh)` cell of a Morley sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepCell {
    pub alpha: f64,
    pub subdivisions: usize,
    pub result: std::result::Result<SpectrumSolution, String>,
}

/// Lowest `k` eigenvalues of the Morley scheme for every `α` and mesh.
/// Failing cells are recorded and the sweep continues.
#[allow(clippy::too_many_arguments)]
pub fn morley_alpha_sweep(
    domain: Domain,
    levels: &[usize],
    coeff: &CoefficientField,
    alphas: &[f64],
    k: usize,
    problem: ProblemKind,
    settings: &SpectralSettings,
) -> Vec<SweepCell> {
    let mut cells = Vec::with_capacity(alphas.len() * levels.len());
    for &alpha in alphas {
        for &n in levels {
            let scheme = Scheme::Morley { alpha };
            let result = match problem {
                ProblemKind::Bihar => solve_bihar_evp(domain, n, coeff, k, scheme, settings),
                ProblemKind::Tep => solve_tep(domain, n, coeff, k, scheme, settings),
            };
            cells.push(SweepCell { alpha, subdivisions: n, result: result.map_err(|e| e.to_string()) });
        }
    }
    cells
}
