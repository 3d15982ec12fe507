//! The quadratic Morley element.
//!
//! Local order: `[v1, v2, v3, n1, n2, n3]`, vertex values followed by the
//! mean normal derivative on the edge opposite each vertex. The normal of an
//! edge is the counterclockwise quarter turn of its global lower-to-higher
//! unit tangent.

use nalgebra::{Matrix6, Vector6};

use crate::error::{Error, Result};
use crate::frame::{cyc, BaryFrame, BasisValue, Jet2, LocalBasisEval};

pub const LOCAL_SIZE: usize = 6;

/// The six quadratic monomials `l0^2, l1^2, l2^2, l1 l2, l2 l0, l0 l1` as jets
/// in `(a, b) = (l1, l2)`.
fn monomials(l: &[f64; 3]) -> [Jet2; 6] {
    let a = Jet2::var_a(l[1]);
    let b = Jet2::var_b(l[2]);
    let c = Jet2::constant(1.0) - a - b;
    [c * c, a * a, b * b, a * b, b * c, c * a]
}

/// Global unit normals of the three local edges, given their orientation signs.
pub fn global_normals(frame: &BaryFrame, edge_signs: [f64; 3]) -> [[f64; 2]; 3] {
    std::array::from_fn(|i| {
        let t = frame.tangent(i);
        let s = edge_signs[i];
        [-s * t[1], s * t[0]]
    })
}

/// Coefficients of the dual basis in the monomial basis: column `d` holds the
/// basis function attached to DOF `d`.
fn dual_coefficients(frame: &BaryFrame, edge_signs: [f64; 3]) -> Result<Matrix6<f64>> {
    let normals = global_normals(frame, edge_signs);
    let (ga, gb) = (frame.grad[1], frame.grad[2]);
    let mut dofs = Matrix6::zeros();
    for v in 0..3 {
        let mut l = [0.0; 3];
        l[v] = 1.0;
        for (m, jet) in monomials(&l).iter().enumerate() {
            dofs[(v, m)] = jet.v;
        }
    }
    for i in 0..3 {
        // the normal derivative of a quadratic is linear along the edge, so
        // its mean is the midpoint value
        let (j, k) = cyc(i);
        let mut l = [0.0; 3];
        l[j] = 0.5;
        l[k] = 0.5;
        for (m, jet) in monomials(&l).iter().enumerate() {
            let g = jet.to_physical(ga, gb).grad;
            dofs[(3 + i, m)] = g[0] * normals[i][0] + g[1] * normals[i][1];
        }
    }
    dofs.try_inverse().ok_or_else(|| Error::SingularMatrix("Morley DOF matrix is not invertible".into()))
}

/// Evaluates the six Morley basis functions at barycentric points.
///
/// `edge_signs[i]` is +1 when local edge `i` (vertex i+1 to i+2) runs in
/// the global direction.
pub fn eval_morley_basis(frame: &BaryFrame, edge_signs: [f64; 3], points: &[[f64; 3]]) -> Result<LocalBasisEval> {
    let coeffs = dual_coefficients(frame, edge_signs)?;
    let (ga, gb) = (frame.grad[1], frame.grad[2]);
    let mut data = Vec::with_capacity(LOCAL_SIZE * points.len());
    for l in points {
        let mono = monomials(l).map(|j| j.to_physical(ga, gb));
        for d in 0..LOCAL_SIZE {
            let col: Vector6<f64> = coeffs.column(d).into();
            let mut out = BasisValue::default();
            for (m, mv) in mono.iter().enumerate() {
                let c = col[m];
                out.value += c * mv.value;
                for r in 0..2 {
                    out.grad[r] += c * mv.grad[r];
                }
                for r in 0..3 {
                    out.hess[r] += c * mv.hess[r];
                }
            }
            data.push(out);
        }
    }
    Ok(LocalBasisEval::new(LOCAL_SIZE, data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre_unit;

    fn frame() -> BaryFrame {
        BaryFrame::new([[0.1, 0.2], [1.3, 0.1], [0.4, 1.1]]).unwrap()
    }

    const SIGNS: [f64; 3] = [1.0, -1.0, 1.0];

    /// DOF functionals applied to a function given by its value and gradient.
    fn apply_dofs(f: &BaryFrame, value: impl Fn([f64; 3]) -> f64, grad: impl Fn([f64; 3]) -> [f64; 2]) -> [f64; 6] {
        let normals = global_normals(f, SIGNS);
        let (x, w) = gauss_legendre_unit(3);
        let mut out = [0.0; 6];
        for v in 0..3 {
            let mut l = [0.0; 3];
            l[v] = 1.0;
            out[v] = value(l);
        }
        for i in 0..3 {
            let (j, k) = cyc(i);
            out[3 + i] = x
                .iter()
                .zip(&w)
                .map(|(&s, &wt)| {
                    let mut l = [0.0; 3];
                    l[j] = 1.0 - s;
                    l[k] = s;
                    let g = grad(l);
                    wt * (g[0] * normals[i][0] + g[1] * normals[i][1])
                })
                .sum();
        }
        out
    }

    #[test]
    fn duality() {
        let f = frame();
        for d in 0..6 {
            let ev = |l: [f64; 3]| eval_morley_basis(&f, SIGNS, &[l]).unwrap();
            let dofs = apply_dofs(&f, |l| ev(l).get(0, d).value, |l| ev(l).get(0, d).grad);
            for (e, v) in dofs.iter().enumerate() {
                let want = if e == d { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-12, "basis {d}, dof {e}: {v}");
            }
        }
    }

    #[test]
    fn partition_of_unity() {
        let f = frame();
        let pts = [[0.2, 0.3, 0.5], [0.6, 0.3, 0.1], [1.0 / 3.0; 3]];
        let ev = eval_morley_basis(&f, SIGNS, &pts).unwrap();
        for p in 0..pts.len() {
            let s: f64 = (0..3).map(|d| ev.get(p, d).value).sum();
            assert!((s - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn quadratic_reproduction() {
        let f = frame();
        let u = |x: [f64; 2]| 1.0 + 2.0 * x[0] - x[1] + 0.5 * x[0] * x[0] - 3.0 * x[0] * x[1] + 2.0 * x[1] * x[1];
        let gu = |x: [f64; 2]| [2.0 + x[0] - 3.0 * x[1], -1.0 - 3.0 * x[0] + 4.0 * x[1]];
        let dofs = apply_dofs(&f, |l| u(f.point(&l)), |l| gu(f.point(&l)));
        let pts = [[0.2, 0.3, 0.5], [0.05, 0.9, 0.05]];
        let ev = eval_morley_basis(&f, SIGNS, &pts).unwrap();
        for (p, l) in pts.iter().enumerate() {
            let interp: f64 = (0..6).map(|d| dofs[d] * ev.get(p, d).value).sum();
            assert!((interp - u(f.point(l))).abs() < 1e-12);
            let hxx: f64 = (0..6).map(|d| dofs[d] * ev.get(p, d).hess[0]).sum();
            assert!((hxx - 1.0).abs() < 1e-11);
        }
    }

    #[test]
    fn flipping_a_sign_flips_the_edge_function() {
        let f = frame();
        let pts = [[0.2, 0.3, 0.5]];
        let a = eval_morley_basis(&f, SIGNS, &pts).unwrap();
        let b = eval_morley_basis(&f, [-1.0, -1.0, 1.0], &pts).unwrap();
        assert!((a.get(0, 3).value + b.get(0, 3).value).abs() < 1e-14);
        assert!((a.get(0, 4).value - b.get(0, 4).value).abs() < 1e-14);
        assert!((a.get(0, 0).value - b.get(0, 0).value).abs() < 1e-14);
    }
}
