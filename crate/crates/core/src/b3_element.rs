//! The cubic nonconforming B3 element from its closed-form local basis.
//!
//! Local order: `[w1x, w1y, wP1, w2x, w2y, wP2, w3x, w3y, wP3, we1, we2, we3]`.
//! Vertex functions of vertex `i` sit at `3i..3i+3`, the edge function of the
//! edge opposite vertex `i` at `9 + i`.

use crate::error::Result;
use crate::frame::{cyc, BaryFrame, BasisValue, Jet2, LocalBasisEval};
use crate::mesh::Point;

pub const LOCAL_SIZE: usize = 12;

/// The four kinds of local function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalKind {
    X,
    Y,
    Patch,
    Edge,
}

/// Kind and vertex/edge index of local slot `slot`.
pub fn local_slot(slot: usize) -> (LocalKind, usize) {
    match slot {
        0..=8 => {
            let kind = [LocalKind::X, LocalKind::Y, LocalKind::Patch][slot % 3];
            (kind, slot / 3)
        }
        9..=11 => (LocalKind::Edge, slot - 9),
        _ => panic!("B3 local slot {slot} out of range"),
    }
}

/// Coefficients `(alpha, beta)` of the curl-free correction, per kind and index.
#[derive(Debug, Clone, Copy)]
pub struct BubbleCoeffs {
    pub x: [[f64; 2]; 3],
    pub y: [[f64; 2]; 3],
    pub edge: [[f64; 2]; 3],
    pub patch: [[f64; 2]; 3],
}

impl BubbleCoeffs {
    pub fn get(&self, kind: LocalKind, i: usize) -> [f64; 2] {
        match kind {
            LocalKind::X => self.x[i],
            LocalKind::Y => self.y[i],
            LocalKind::Edge => self.edge[i],
            LocalKind::Patch => self.patch[i],
        }
    }
}

/// The quadratic bubble `l1^2 + l2^2 + l3^2 - 2/3`.
pub fn phi_t(l: &[f64; 3]) -> f64 {
    l[0] * l[0] + l[1] * l[1] + l[2] * l[2] - 2.0 / 3.0
}

pub fn bubble_coefficients(frame: &BaryFrame) -> BubbleCoeffs {
    let g = &frame.grad;
    let area = frame.area;
    let mut c = BubbleCoeffs { x: [[0.0; 2]; 3], y: [[0.0; 2]; 3], edge: [[0.0; 2]; 3], patch: [[0.0; 2]; 3] };
    for i in 0..3 {
        let (j, k) = cyc(i);
        let (gj, gk) = (g[j], g[k]);
        let d = gk[1] * gj[0] - gk[0] * gj[1];
        c.x[i] = [(gk[0] - gj[0]) * (gk[1] + gj[1]) / d, (gk[1] - gj[1]) * (gk[1] + gj[1]) / d];
        c.y[i] = [(gj[0] - gk[0]) * (gj[0] + gk[0]) / d, (gj[1] - gk[1]) * (gj[0] + gk[0]) / d];
        let s = 6.0 * area / frame.edge_len2[i];
        c.edge[i] = [g[i][0] * s, g[i][1] * s];
        let dot = gj[0] * gk[0] + gj[1] * gk[1];
        let (ej, ek) = (frame.edge_len2[j], frame.edge_len2[k]);
        let patch =
            |m: usize| (-12.0 * area * dot * (gk[m] / ek + gj[m] / ej) - 3.0 / area * (gj[m] + gk[m])) / (2.0 * d);
        c.patch[i] = [patch(0), patch(1)];
    }
    c
}

/// The uncorrected vector field attached to a local function, at barycentric `l`.
pub fn tilde_field(frame: &BaryFrame, kind: LocalKind, i: usize, l: &[f64; 3]) -> [f64; 2] {
    let (j, k) = cyc(i);
    match kind {
        LocalKind::X => [l[i] - 3.0 * l[i] * l[j] - 3.0 * l[i] * l[k], 0.0],
        LocalKind::Y => [0.0, l[i] - 3.0 * l[i] * l[j] - 3.0 * l[i] * l[k]],
        LocalKind::Edge => {
            // 6 l_j l_k / |e_i| times the tangent rotated a quarter turn
            let s = 6.0 * l[j] * l[k] / frame.edge_len2[i];
            [s * frame.eta[i], -s * frame.xi[i]]
        }
        LocalKind::Patch => {
            // tangents of the two edges at vertex i, both pointing away from it
            let sj = 6.0 * l[i] * l[k] / frame.edge_len2[j];
            let sk = 6.0 * l[i] * l[j] / frame.edge_len2[k];
            [sj * frame.xi[j] - sk * frame.xi[k], sj * frame.eta[j] - sk * frame.eta[k]]
        }
    }
}

fn p(t: Jet2) -> Jet2 {
    t * t * t * (2.0 / 3.0) - t * t + t * (1.0 / 3.0)
}

fn q(t: Jet2) -> Jet2 {
    t * t * t * (1.0 / 3.0) - t * t + t * (2.0 / 3.0)
}

fn r(t: Jet2) -> Jet2 {
    t * t * t * (-2.0 / 3.0) + t * t - t * (1.0 / 6.0)
}

/// The four local functions attached to vertex `i` and edge `i`, as jets in
/// `(a, b) = (l_j, l_k)`, in the order `[x, y, patch, edge]`.
fn local_jets(frame: &BaryFrame, i: usize, a: f64, b: f64) -> [Jet2; 4] {
    let (j, k) = cyc(i);
    let (xi, eta, e2) = (&frame.xi, &frame.eta, &frame.edge_len2);
    let a = Jet2::var_a(a);
    let b = Jet2::var_b(b);
    let ab = a * b;
    let aab = a * ab;
    let abb = ab * b;
    let f1 = q(a) + p(b) + aab * 2.0 + abb - ab * 2.0;
    let f2 = p(a) + q(b) + abb * 2.0 + aab - ab * 2.0;
    let wx = f1 * -xi[k] + f2 * xi[j];
    let wy = f1 * -eta[k] + f2 * eta[j];
    let wp = (p(a) * (1.0 / e2[j]) + p(b) * (1.0 / e2[k])) * (-3.0 * (eta[j] * eta[k] + xi[j] * xi[k]))
        + (r(a) + r(b) + ab - aab - abb) * 6.0
        - Jet2::constant(1.0);
    let we = (p(a) + p(b) + aab * 2.0 + abb * 2.0 - ab * 2.0) * (-6.0 * frame.area / e2[i]);
    [wx, wy, wp, we]
}

/// Evaluates the 12 local functions at barycentric points.
///
/// Edge functions use the local edge direction (vertex i+1 to i+2); callers
/// multiply them by the global edge sign.
pub fn eval_local_basis(frame: &BaryFrame, points: &[[f64; 3]]) -> LocalBasisEval {
    let mut data = vec![BasisValue::default(); LOCAL_SIZE * points.len()];
    for (p, l) in points.iter().enumerate() {
        let out = &mut data[p * LOCAL_SIZE..(p + 1) * LOCAL_SIZE];
        for i in 0..3 {
            let (j, k) = cyc(i);
            let jets = local_jets(frame, i, l[j], l[k]);
            let (ga, gb) = (frame.grad[j], frame.grad[k]);
            out[3 * i] = jets[0].to_physical(ga, gb);
            out[3 * i + 1] = jets[1].to_physical(ga, gb);
            out[3 * i + 2] = jets[2].to_physical(ga, gb);
            out[9 + i] = jets[3].to_physical(ga, gb);
        }
    }
    LocalBasisEval::new(LOCAL_SIZE, data)
}

/// Convenience wrapper: frame from coordinates, then evaluation.
pub fn eval_on_triangle(vertices: [Point; 3], points: &[[f64; 3]]) -> Result<LocalBasisEval> {
    Ok(eval_local_basis(&BaryFrame::new(vertices)?, points))
}
