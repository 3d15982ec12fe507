//! Per-triangle barycentric geometry shared by both element families.

use crate::error::{Error, Result};
use crate::mesh::Point;

/// Relative area threshold below which a triangle counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-14;

/// Barycentric frame of a triangle with vertices numbered 0, 1, 2.
///
/// With `(i, j, k)` cyclic, `xi[i] = x_j - x_k`, `eta[i] = y_j - y_k`, and
/// `grad[i] = (eta[i], -xi[i]) / (2|T|)` is the gradient of `lambda_i`.
#[derive(Debug, Clone, Copy)]
pub struct BaryFrame {
    pub vertices: [Point; 3],
    pub grad: [[f64; 2]; 3],
    pub xi: [f64; 3],
    pub eta: [f64; 3],
    /// Squared length of the edge opposite each vertex.
    pub edge_len2: [f64; 3],
    pub area: f64,
}

#[inline]
pub(crate) fn cyc(i: usize) -> (usize, usize) {
    ((i + 1) % 3, (i + 2) % 3)
}

impl BaryFrame {
    pub fn new(vertices: [Point; 3]) -> Result<Self> {
        let mut xi = [0.0; 3];
        let mut eta = [0.0; 3];
        for i in 0..3 {
            let (j, k) = cyc(i);
            xi[i] = vertices[j][0] - vertices[k][0];
            eta[i] = vertices[j][1] - vertices[k][1];
        }
        let edge_len2 = [0, 1, 2].map(|i| xi[i] * xi[i] + eta[i] * eta[i]);
        // 2|T| = xi_j eta_k - xi_k eta_j for any cyclic (i, j, k)
        let area2 = xi[1] * eta[2] - xi[2] * eta[1];
        let diam2 = edge_len2.iter().copied().fold(0.0, f64::max);
        let threshold = DEGENERACY_TOL * diam2;
        if !(area2 > threshold) {
            return Err(Error::DegenerateGeometry { area2, threshold });
        }
        let grad = [0, 1, 2].map(|i| [eta[i] / area2, -xi[i] / area2]);
        Ok(Self { vertices, grad, xi, eta, edge_len2, area: 0.5 * area2 })
    }

    /// Physical point of barycentric coordinates `l`.
    pub fn point(&self, l: &[f64; 3]) -> Point {
        let v = &self.vertices;
        [l[0] * v[0][0] + l[1] * v[1][0] + l[2] * v[2][0], l[0] * v[0][1] + l[1] * v[1][1] + l[2] * v[2][1]]
    }

    /// Barycentric coordinates of a physical point.
    pub fn barycentric(&self, p: Point) -> [f64; 3] {
        let area2 = 2.0 * self.area;
        [0, 1, 2].map(|i| {
            let (j, k) = cyc(i);
            let (a, b) = (self.vertices[j], self.vertices[k]);
            ((a[0] - p[0]) * (b[1] - p[1]) - (b[0] - p[0]) * (a[1] - p[1])) / area2
        })
    }

    pub fn edge_len(&self, i: usize) -> f64 {
        self.edge_len2[i].sqrt()
    }

    /// Unit tangent of the edge opposite vertex `i`, running from vertex
    /// `i+1` to vertex `i+2`.
    pub fn tangent(&self, i: usize) -> [f64; 2] {
        let len = self.edge_len(i);
        [-self.xi[i] / len, -self.eta[i] / len]
    }

    /// Unit outward normal of the edge opposite vertex `i`.
    pub fn outward_normal(&self, i: usize) -> [f64; 2] {
        let t = self.tangent(i);
        [t[1], -t[0]]
    }

    pub fn diameter(&self) -> f64 {
        self.edge_len2.iter().copied().fold(0.0, f64::max).sqrt()
    }
}

/// Value, gradient and Hessian `(xx, xy, yy)` of one scalar function at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BasisValue {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [f64; 3],
}

impl BasisValue {
    pub fn laplacian(&self) -> f64 {
        self.hess[0] + self.hess[2]
    }

    /// Frobenius product of the two Hessians.
    pub fn hess_dot(&self, other: &BasisValue) -> f64 {
        self.hess[0] * other.hess[0] + 2.0 * self.hess[1] * other.hess[1] + self.hess[2] * other.hess[2]
    }

    pub fn grad_dot(&self, other: &BasisValue) -> f64 {
        self.grad[0] * other.grad[0] + self.grad[1] * other.grad[1]
    }

    pub fn scaled(self, s: f64) -> Self {
        Self { value: s * self.value, grad: self.grad.map(|g| s * g), hess: self.hess.map(|h| s * h) }
    }
}

/// Local basis evaluated at a list of points, stored point-major.
#[derive(Debug, Clone)]
pub struct LocalBasisEval {
    num_basis: usize,
    data: Vec<BasisValue>,
}

impl LocalBasisEval {
    pub(crate) fn new(num_basis: usize, data: Vec<BasisValue>) -> Self {
        debug_assert_eq!(data.len() % num_basis, 0);
        Self { num_basis, data }
    }

    pub fn num_basis(&self) -> usize {
        self.num_basis
    }

    pub fn num_points(&self) -> usize {
        self.data.len() / self.num_basis
    }

    pub fn get(&self, point: usize, basis: usize) -> &BasisValue {
        &self.data[point * self.num_basis + basis]
    }

    /// All basis values at one point.
    pub fn at(&self, point: usize) -> &[BasisValue] {
        &self.data[point * self.num_basis..(point + 1) * self.num_basis]
    }

    /// Multiplies basis function `basis` by `sign` at every point.
    pub fn scale_basis(&mut self, basis: usize, sign: f64) {
        for p in 0..self.num_points() {
            let v = &mut self.data[p * self.num_basis + basis];
            *v = v.scaled(sign);
        }
    }
}

/// Second-order jet of a function of two barycentric variables `(a, b)`:
/// value and all partial derivatives through order two.
///
/// Arithmetic follows the product rule exactly, so polynomials written as
/// ordinary expressions carry exact derivatives.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Jet2 {
    pub v: f64,
    pub da: f64,
    pub db: f64,
    pub daa: f64,
    pub dab: f64,
    pub dbb: f64,
}

impl Jet2 {
    pub fn constant(v: f64) -> Self {
        Self { v, ..Default::default() }
    }

    pub fn var_a(a: f64) -> Self {
        Self { v: a, da: 1.0, ..Default::default() }
    }

    pub fn var_b(b: f64) -> Self {
        Self { v: b, db: 1.0, ..Default::default() }
    }

    /// Pushes the jet through the affine map to physical coordinates, where
    /// `ga`, `gb` are the gradients of the two barycentric variables.
    pub fn to_physical(self, ga: [f64; 2], gb: [f64; 2]) -> BasisValue {
        let grad = [self.da * ga[0] + self.db * gb[0], self.da * ga[1] + self.db * gb[1]];
        let h = |r: usize, c: usize| {
            self.daa * ga[r] * ga[c] + self.dab * (ga[r] * gb[c] + gb[r] * ga[c]) + self.dbb * gb[r] * gb[c]
        };
        BasisValue { value: self.v, grad, hess: [h(0, 0), h(0, 1), h(1, 1)] }
    }
}

impl std::ops::Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v + o.v,
            da: self.da + o.da,
            db: self.db + o.db,
            daa: self.daa + o.daa,
            dab: self.dab + o.dab,
            dbb: self.dbb + o.dbb,
        }
    }
}

impl std::ops::Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        self + o * -1.0
    }
}

impl std::ops::Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, s: f64) -> Jet2 {
        Jet2 {
            v: s * self.v,
            da: s * self.da,
            db: s * self.db,
            daa: s * self.daa,
            dab: s * self.dab,
            dbb: s * self.dbb,
        }
    }
}

impl std::ops::Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v * o.v,
            da: self.da * o.v + self.v * o.da,
            db: self.db * o.v + self.v * o.db,
            daa: self.daa * o.v + 2.0 * self.da * o.da + self.v * o.daa,
            dab: self.dab * o.v + self.da * o.db + self.db * o.da + self.v * o.dab,
            dbb: self.dbb * o.v + 2.0 * self.db * o.db + self.v * o.dbb,
        }
    }
}
