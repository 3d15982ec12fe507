//! Global assembly of bilinear forms and load vectors.
//!
//! Local blocks are computed in parallel, then scattered in triangle order so
//! the assembled matrices are bit-identical from run to run.

use rayon::prelude::*;

use crate::b3_element::eval_local_basis;
use crate::coefficient::CoefficientField;
use crate::dofmap::{DofMap, Element};
use crate::error::{Error, Result};
use crate::frame::{BaryFrame, BasisValue, LocalBasisEval};
use crate::mesh::{Point, TriMesh};
use crate::morley_element::eval_morley_basis;
use crate::quadrature::{triangle_rule, TriangleRule, DEFAULT_DEGREE};
use crate::sparse::{SparseBuilder, SparseMatrix};

/// Global basis functions restricted to triangle `t`, at barycentric points.
///
/// Boundary slots are evaluated too; the DofMap marks them absent.
pub fn element_basis(mesh: &TriMesh, map: &DofMap, t: usize, points: &[[f64; 3]]) -> Result<LocalBasisEval> {
    let frame = BaryFrame::new(mesh.triangle_coords(t))?;
    let signs = map.local_signs(t);
    match map.element() {
        Element::B3 => {
            let mut ev = eval_local_basis(&frame, points);
            for i in 0..3 {
                if signs[9 + i] < 0.0 {
                    ev.scale_basis(9 + i, -1.0);
                }
            }
            Ok(ev)
        }
        Element::Morley => eval_morley_basis(&frame, [signs[3], signs[4], signs[5]], points),
    }
}

/// The integrands available to [`assemble_terms`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormKind {
    /// `c Δu Δv`
    Bilaplace,
    /// `c ∇²u : ∇²v`
    Hessian,
    /// `c ∇u · ∇v`
    Grad,
    /// `c u v`
    Mass,
    /// `c (Δu v + u Δv)`
    LaplaceMass,
}

impl FormKind {
    #[inline]
    fn integrand(self, u: &BasisValue, v: &BasisValue) -> f64 {
        match self {
            FormKind::Bilaplace => u.laplacian() * v.laplacian(),
            FormKind::Hessian => u.hess_dot(v),
            FormKind::Grad => u.grad_dot(v),
            FormKind::Mass => u.value * v.value,
            FormKind::LaplaceMass => u.laplacian() * v.value + u.value * v.laplacian(),
        }
    }
}

/// One weighted term `scale * ∫ c · integrand`.
#[derive(Debug, Clone)]
pub struct FormTerm<'a> {
    pub kind: FormKind,
    pub coeff: &'a CoefficientField,
    pub scale: f64,
}

impl<'a> FormTerm<'a> {
    pub fn new(kind: FormKind, coeff: &'a CoefficientField) -> Self {
        Self { kind, coeff, scale: 1.0 }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }
}

fn local_matrix(
    mesh: &TriMesh,
    map: &DofMap,
    t: usize,
    rule: &TriangleRule,
    terms: &[FormTerm<'_>],
) -> Result<Vec<f64>> {
    let ev = element_basis(mesh, map, t, rule.points())?;
    let frame = BaryFrame::new(mesh.triangle_coords(t))?;
    let ls = map.local_size();
    let mut block = vec![0.0; ls * ls];
    for (q, (l, w)) in rule.iter().enumerate() {
        let x = frame.point(l);
        let basis = ev.at(q);
        for term in terms {
            let c = term.coeff.eval(x);
            if c == 0.0 {
                continue;
            }
            let f = w * frame.area * c * term.scale;
            for a in 0..ls {
                for b in a..ls {
                    block[a * ls + b] += f * term.kind.integrand(&basis[a], &basis[b]);
                }
            }
        }
    }
    for a in 0..ls {
        for b in 0..a {
            block[a * ls + b] = block[b * ls + a];
        }
    }
    Ok(block)
}

/// Assembles `sum_terms scale ∫ c · integrand` with a rule of the given degree.
pub fn assemble_terms(mesh: &TriMesh, map: &DofMap, terms: &[FormTerm<'_>], degree: usize) -> Result<SparseMatrix> {
    let rule = triangle_rule(degree)?;
    let n = map.num_dofs();
    let ls = map.local_size();
    let blocks: Vec<Vec<f64>> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| local_matrix(mesh, map, t, &rule, terms))
        .collect::<Result<_>>()?;
    let mut builder = SparseBuilder::with_capacity(n, n, blocks.len() * ls * ls);
    for (t, block) in blocks.iter().enumerate() {
        let l2g = map.local_to_global(t);
        for (a, ga) in l2g.iter().enumerate() {
            let Some(ga) = ga else { continue };
            for (b, gb) in l2g.iter().enumerate() {
                if let Some(gb) = gb {
                    builder.add(*ga, *gb, block[a * ls + b]);
                }
            }
        }
    }
    Ok(builder.finalize())
}

fn single(mesh: &TriMesh, map: &DofMap, kind: FormKind, c: &CoefficientField) -> Result<SparseMatrix> {
    assemble_terms(mesh, map, &[FormTerm::new(kind, c)], DEFAULT_DEGREE)
}

/// `(c Δ_h u, Δ_h v)`.
pub fn assemble_bilaplace(mesh: &TriMesh, map: &DofMap, c: &CoefficientField) -> Result<SparseMatrix> {
    single(mesh, map, FormKind::Bilaplace, c)
}

/// `(c ∇²_h u, ∇²_h v)`.
pub fn assemble_hessian(mesh: &TriMesh, map: &DofMap, c: &CoefficientField) -> Result<SparseMatrix> {
    single(mesh, map, FormKind::Hessian, c)
}

/// `(∇_h u, ∇_h v)`.
pub fn assemble_grad(mesh: &TriMesh, map: &DofMap) -> Result<SparseMatrix> {
    single(mesh, map, FormKind::Grad, &CoefficientField::constant(1.0))
}

/// `(c u, v)`.
pub fn assemble_mass(mesh: &TriMesh, map: &DofMap, c: &CoefficientField) -> Result<SparseMatrix> {
    single(mesh, map, FormKind::Mass, c)
}

/// `(c Δ_h u, v) + (c u, Δ_h v)`.
pub fn assemble_laplace_mass(mesh: &TriMesh, map: &DofMap, c: &CoefficientField) -> Result<SparseMatrix> {
    single(mesh, map, FormKind::LaplaceMass, c)
}

/// Load vector `b_i = ∫ f ξ_i`.
pub fn assemble_load<F>(mesh: &TriMesh, map: &DofMap, f: F) -> Result<Vec<f64>>
where
    F: Fn(Point) -> f64 + Sync,
{
    let rule = triangle_rule(DEFAULT_DEGREE)?;
    let ls = map.local_size();
    let locals: Vec<Vec<f64>> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let ev = element_basis(mesh, map, t, rule.points())?;
            let frame = BaryFrame::new(mesh.triangle_coords(t))?;
            let mut local = vec![0.0; ls];
            for (q, (l, w)) in rule.iter().enumerate() {
                let fw = w * frame.area * f(frame.point(l));
                for (a, v) in ev.at(q).iter().enumerate() {
                    local[a] += fw * v.value;
                }
            }
            Ok(local)
        })
        .collect::<Result<_>>()?;
    let mut b = vec![0.0; map.num_dofs()];
    for (t, local) in locals.iter().enumerate() {
        for (a, g) in map.local_to_global(t).iter().enumerate() {
            if let Some(g) = g {
                b[*g] += local[a];
            }
        }
    }
    Ok(b)
}

/// The three matrices of `(A + τB + τ²C) x = 0`, plus the gradient matrix used
/// to normalize eigenvectors.
#[derive(Debug, Clone)]
pub struct TepMatrices {
    pub a: SparseMatrix,
    pub b: SparseMatrix,
    pub c: SparseMatrix,
    pub grad: SparseMatrix,
}

/// Smallest and largest value of a coefficient over every quadrature point
/// of the mesh.
pub fn coefficient_range(mesh: &TriMesh, c: &CoefficientField) -> Result<(f64, f64)> {
    let rule = triangle_rule(DEFAULT_DEGREE)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for t in 0..mesh.num_triangles() {
        let frame = BaryFrame::new(mesh.triangle_coords(t))?;
        let pts = rule.points().iter().map(|l| frame.point(l)).chain(frame.vertices);
        for x in pts {
            let v = c.eval(x);
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    Ok((lo, hi))
}

/// Assembles the transmission eigenvalue matrices for refraction index `n`.
///
/// For Morley, `morley_alpha` must lie in `(0, min 1/(n-1))`; the stiffness
/// then splits into `(1/(n-1) - α) Δ` and `α ∇²` parts.
pub fn assemble_tep_matrices(
    mesh: &TriMesh,
    map: &DofMap,
    n: &CoefficientField,
    morley_alpha: Option<f64>,
) -> Result<TepMatrices> {
    let (n_min, n_max) = coefficient_range(mesh, n)?;
    if !(n_min > 1.0) || !n_max.is_finite() {
        return Err(Error::InvalidCoefficient(format!(
            "refraction index must exceed 1 everywhere; '{}' reaches {n_min}",
            n.name()
        )));
    }
    let inv = n.map("1/(n-1)", |v| 1.0 / (v - 1.0));
    let ratio = n.map("n/(n-1)", |v| v / (v - 1.0));
    let one = CoefficientField::constant(1.0);
    let a = match (map.element(), morley_alpha) {
        (Element::B3, None) => assemble_bilaplace(mesh, map, &inv)?,
        (Element::B3, Some(_)) => {
            return Err(Error::InvalidParameter("alpha applies to the Morley scheme only".into()))
        }
        (Element::Morley, None) => return Err(Error::InvalidParameter("the Morley scheme requires alpha".into())),
        (Element::Morley, Some(alpha)) => {
            let alpha_s = 1.0 / (n_max - 1.0);
            if !(alpha > 0.0 && alpha < alpha_s) {
                return Err(Error::InvalidParameter(format!("alpha = {alpha} outside (0, {alpha_s})")));
            }
            let rest = inv.map("1/(n-1)-alpha", move |v| v - alpha);
            let alpha_c = CoefficientField::constant(alpha);
            assemble_terms(
                mesh,
                map,
                &[FormTerm::new(FormKind::Bilaplace, &rest), FormTerm::new(FormKind::Hessian, &alpha_c)],
                DEFAULT_DEGREE,
            )?
        }
    };
    let grad = assemble_grad(mesh, map)?;
    let b = assemble_terms(
        mesh,
        map,
        &[FormTerm::new(FormKind::LaplaceMass, &inv), FormTerm::new(FormKind::Grad, &one).with_scale(-1.0)],
        DEFAULT_DEGREE,
    )?;
    let c = assemble_mass(mesh, map, &ratio)?;
    Ok(TepMatrices { a, b, c, grad })
}
