//! Measurements shared by the property tests and the acceptance runner.
//! Each helper returns the observed defect so callers choose the threshold.

#![allow(dead_code)]

use b3fem::analysis::eval_discrete;
use b3fem::b3_element::{bubble_coefficients, eval_local_basis, local_slot, phi_t, tilde_field, LOCAL_SIZE};
use b3fem::linalg::{
    dense_pencil_eigenvalues, dense_qep_eigenvalues, dense_sym_pencil, eig_gen_shift_invert, eig_sym_pencil,
    qep_linearize, qep_residual, EigenOptions, PencilProblem, QepBlocks,
};
use b3fem::quadrature::{barycentric_monomial_integral, triangle_rule, MAX_DEGREE};
use b3fem::{BaryFrame, DofMap, Point, SparseMatrix, TriMesh};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Symmetric positive definite `n x n` matrix with spectrum roughly in
/// `[shift, shift + n]`.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    (&g * g.transpose()) / (n as f64).sqrt() + DMatrix::identity(n, n) * shift
}

/// Random banded sparse symmetric positive definite matrix.
pub fn random_sparse_spd(rng: &mut ChaCha8Rng, n: usize, band: usize) -> SparseMatrix {
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..(i + band + 1).min(n) {
            let v = rng.random_range(-1.0..1.0);
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| f64::abs(d[(i, j)])).sum();
        d[(i, i)] = off + rng.random_range(0.5..2.0);
    }
    SparseMatrix::from_dense(&d)
}

/// Maximum relative error of every degree-`d` rule on every barycentric
/// monomial of total degree `<= d`, over `d = 1..=MAX_DEGREE`.
pub fn quadrature_exactness_defect() -> f64 {
    let mut worst: f64 = 0.0;
    for d in 1..=MAX_DEGREE {
        let rule = triangle_rule(d).expect("supported degree");
        for a in 0..=d as u32 {
            for b in 0..=(d as u32 - a) {
                for c in 0..=(d as u32 - a - b) {
                    let got: f64 = rule
                        .iter()
                        .map(|(l, w)| w * l[0].powi(a as i32) * l[1].powi(b as i32) * l[2].powi(c as i32))
                        .sum();
                    let want = barycentric_monomial_integral(a, b, c, 1.0);
                    worst = worst.max((got - want).abs() / want);
                }
            }
        }
    }
    worst
}

fn random_triangle(rng: &mut ChaCha8Rng) -> BaryFrame {
    loop {
        let v: [Point; 3] = std::array::from_fn(|_| [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]);
        let area2 = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]);
        if area2 > 0.5 {
            return BaryFrame::new(v).expect("nondegenerate");
        }
    }
}

fn random_barycentric(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let a: f64 = rng.random_range(0.0..1.0);
    let b: f64 = rng.random_range(0.0..1.0 - a);
    [a, b, 1.0 - a - b]
}

/// `max |∇w - (φ̃ + (α, β) φ_T)|` over random triangles and points.
pub fn gradient_identity_defect(seed: u64, triangles: usize) -> f64 {
    let mut rng = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..triangles {
        let frame = random_triangle(&mut rng);
        let coeffs = bubble_coefficients(&frame);
        let pts: Vec<[f64; 3]> = (0..12).map(|_| random_barycentric(&mut rng)).collect();
        let ev = eval_local_basis(&frame, &pts);
        for (p, l) in pts.iter().enumerate() {
            for slot in 0..LOCAL_SIZE {
                let (kind, i) = local_slot(slot);
                let t = tilde_field(&frame, kind, i, l);
                let ab = coeffs.get(kind, i);
                let g = ev.get(p, slot).grad;
                for m in 0..2 {
                    worst = worst.max((g[m] - (t[m] + ab[m] * phi_t(l))).abs());
                }
            }
        }
    }
    worst
}

/// Largest weak-continuity defect of the discrete function `coeffs`:
/// zeroth moment of the jump and first two moments of the normal-derivative
/// jump on interior edges, and the same moments of the traces on boundary
/// edges. Each kind of moment is taken relative to the largest matching
/// moment of absolute values over the mesh.
pub fn weak_continuity_defect(mesh: &TriMesh, map: &DofMap, coeffs: &[f64]) -> f64 {
    let (nodes, weights) = b3fem::quadrature::gauss_legendre_unit(6);
    let mut moments = [0.0f64; 3];
    let mut scales = [0.0f64; 3];
    for (e, &[a, b]) in mesh.edges().iter().enumerate() {
        let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
        let len = mesh.edge_length(e);
        let normal = [(pb[1] - pa[1]) / len, -(pb[0] - pa[0]) / len];
        let pts: Vec<Point> =
            nodes.iter().map(|&s| [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])]).collect();
        let (t0, t1) = mesh.edge_triangles(e);
        let side = |t: usize| -> (Vec<f64>, Vec<f64>) {
            let frame = BaryFrame::new(mesh.triangle_coords(t)).expect("valid triangle");
            let bary: Vec<[f64; 3]> = pts.iter().map(|&p| frame.barycentric(p)).collect();
            let vals = eval_discrete(mesh, map, coeffs, t, &bary).expect("evaluation");
            let u = vals.iter().map(|v| v.value).collect();
            let dn = vals.iter().map(|v| v.grad[0] * normal[0] + v.grad[1] * normal[1]).collect();
            (u, dn)
        };
        let (u0, d0) = side(t0);
        let (u1, d1) = t1.map(side).unwrap_or_else(|| (vec![0.0; pts.len()], vec![0.0; pts.len()]));
        let moment = |f: &dyn Fn(usize) -> f64| -> f64 { len * (0..pts.len()).map(|q| weights[q] * f(q)).sum::<f64>() };
        let checks = [
            (moment(&|q| u0[q] - u1[q]), moment(&|q| u0[q].abs() + u1[q].abs())),
            (moment(&|q| d0[q] - d1[q]), moment(&|q| d0[q].abs() + d1[q].abs())),
            (moment(&|q| nodes[q] * len * (d0[q] - d1[q])), moment(&|q| nodes[q] * len * (d0[q].abs() + d1[q].abs()))),
        ];
        for (k, (m, scale)) in checks.into_iter().enumerate() {
            moments[k] = moments[k].max(m.abs());
            scales[k] = scales[k].max(scale);
        }
    }
    (0..3).map(|k| moments[k] / scales[k].max(1e-300)).fold(0.0, f64::max)
}

/// Largest spread of the values of `coeffs` at a vertex as seen from its
/// incident triangles, relative to `max |coeffs|`; boundary vertices are
/// compared against zero.
pub fn vertex_continuity_defect(mesh: &TriMesh, map: &DofMap, coeffs: &[f64]) -> f64 {
    let corners = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut seen: Vec<Vec<f64>> = vec![Vec::new(); mesh.num_vertices()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let vals = eval_discrete(mesh, map, coeffs, t, &corners).expect("evaluation");
        for i in 0..3 {
            seen[tri[i]].push(vals[i].value);
        }
    }
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs())).max(1e-300);
    let mut worst: f64 = 0.0;
    for (v, vals) in seen.iter().enumerate() {
        let reference = if mesh.is_boundary_vertex(v) { 0.0 } else { vals[0] };
        for x in vals {
            worst = worst.max((x - reference).abs() / scale);
        }
    }
    worst
}

/// Smallest eigenvalue of the symmetric part of a sparse matrix, relative
/// to its largest magnitude, together with the relative asymmetry.
pub fn spd_margin(m: &SparseMatrix) -> (f64, f64) {
    let d = m.to_dense();
    let sym = (&d + d.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let lo = eig.eigenvalues.min();
    let hi = eig.eigenvalues.amax();
    (lo / hi, m.asymmetry() / m.max_abs())
}

/// Relative error of the `k` eigenvalues of a random `n x n` symmetric
/// pencil nearest `shift`, Krylov solver against the dense solver.
pub fn sym_pencil_oracle_error(seed: u64, n: usize, k: usize, shift: f64) -> f64 {
    let mut rng = rng(seed);
    let a = random_sparse_spd(&mut rng, n, 4);
    let m = random_sparse_spd(&mut rng, n, 2);
    let got = eig_sym_pencil(&a, &m, &EigenOptions::new(k, shift)).expect("krylov solve");
    let (vals, _) = dense_sym_pencil(&a.to_dense(), &m.to_dense()).expect("dense solve");
    let mut want: Vec<f64> = vals.iter().copied().collect();
    want.sort_by(|x, y| (x - shift).abs().total_cmp(&(y - shift).abs()));
    want.truncate(k);
    want.sort_by(f64::total_cmp);
    got.iter().zip(&want).map(|(g, w)| (g.value - w).abs() / w.abs()).fold(0.0, f64::max)
}

/// Matches each computed value to the nearest unused oracle value and
/// returns the largest relative distance.
pub fn match_complex(got: &[Complex64], oracle: &[Complex64]) -> f64 {
    let mut used = vec![false; oracle.len()];
    let mut worst: f64 = 0.0;
    for g in got {
        let (j, d) = oracle
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, o)| (j, (g - o).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("oracle has enough values");
        used[j] = true;
        worst = worst.max(d / g.norm().max(1.0));
    }
    worst
}

/// Random nonsymmetric `n x n` pencil: Krylov eigenvalues nearest `shift`
/// against the dense oracle.
pub fn general_pencil_oracle_error(seed: u64, n: usize, k: usize, shift: f64) -> f64 {
    let mut rng = rng(seed);
    let l = DMatrix::from_fn(n, n, |i, j| if i == j { i as f64 / 10.0 } else { rng.random_range(-0.05..0.05) });
    let r = random_spd(&mut rng, n, 1.0);
    let problem =
        PencilProblem::new(SparseMatrix::from_dense(&l), SparseMatrix::from_dense(&r), EigenOptions::new(k, shift))
            .expect("valid pencil");
    let got: Vec<Complex64> = eig_gen_shift_invert(&problem).expect("krylov solve").iter().map(|p| p.value).collect();
    let oracle = dense_pencil_eigenvalues(&l, &r).expect("dense solve");
    match_complex(&got, &oracle)
}

/// Random symmetric `n x n` QEP: linearized Krylov eigenvalues against the
/// dense companion oracle, and the worst QEP residual of the returned pairs.
pub fn qep_oracle_error(seed: u64, n: usize, k: usize, shift: f64) -> (f64, f64) {
    let mut rng = rng(seed);
    let a = random_spd(&mut rng, n, 1.0);
    let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-0.3..0.3));
    let b = &g + g.transpose();
    let c = random_spd(&mut rng, n, 1.0);
    let blocks =
        QepBlocks::new(SparseMatrix::from_dense(&a), SparseMatrix::from_dense(&b), SparseMatrix::from_dense(&c))
            .expect("matching blocks");
    let problem = qep_linearize(blocks.clone(), EigenOptions::new(k, shift)).expect("linearization");
    let pairs = eig_gen_shift_invert(&problem).expect("krylov solve");
    let got: Vec<Complex64> = pairs.iter().map(|p| p.value).collect();
    let oracle = dense_qep_eigenvalues(&a, &b, &c).expect("dense solve");
    let residual = pairs.iter().map(|p| qep_residual(&blocks, p.value, &p.vector[n..])).fold(0.0, f64::max);
    (match_complex(&got, &oracle), residual)
}
