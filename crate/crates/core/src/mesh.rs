//! Structured triangular meshes of the unit square, the L-shaped domain and
//! the reference triangle, together with uniform red refinement.
//!
//! Connectivity conventions:
//! - triangles are stored counterclockwise;
//! - local edge `i` of a triangle is the edge opposite local vertex `i`, and
//!   runs from local vertex `i+1` to local vertex `i+2` (cyclic);
//! - global edges store the lower vertex index first.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Direction of the diagonal used to split each square cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Diagonal {
    /// From the lower-right to the upper-left corner of every cell.
    #[default]
    Anti,
    /// From the lower-left to the upper-right corner of every cell.
    Main,
}

/// The computational domains used by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    /// The unit square `[0,1]^2`.
    Square,
    /// `[0,1]^2` without the upper-left quadrant `[0,1/2) x (1/2,1]`.
    #[serde(alias = "lshape")]
    LShape,
    /// The triangle with vertices (0,0), (1,0), (0,1).
    Triangle,
}

impl Domain {
    /// Mesh with `n` subdivisions per unit length.
    pub fn build(self, n: usize) -> Result<TriMesh> {
        match self {
            Domain::Square => build_square_mesh(n),
            Domain::LShape => build_lshape_mesh(n),
            Domain::Triangle => build_reference_triangle_mesh(n),
        }
    }

    pub fn is_convex(self) -> bool {
        !matches!(self, Domain::LShape)
    }

    pub fn name(self) -> &'static str {
        match self {
            Domain::Square => "square",
            Domain::LShape => "lshape",
            Domain::Triangle => "triangle",
        }
    }
}

impl std::str::FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(Domain::Square),
            "lshape" | "l-shape" => Ok(Domain::LShape),
            "triangle" => Ok(Domain::Triangle),
            other => Err(Error::InvalidParameter(format!("unknown domain `{other}`"))),
        }
    }
}

/// A conforming triangulation with full vertex/edge/triangle connectivity.
///
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    triangle_edges: Vec<[usize; 3]>,
    edge_triangles: Vec<(usize, Option<usize>)>,
    vertex_boundary: Vec<bool>,
    edge_boundary: Vec<bool>,
    edge_lengths: Vec<f64>,
    areas: Vec<f64>,
    h: f64,
}

/// Counts reported by `mesh-info`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeshStats {
    pub vertices: usize,
    pub edges: usize,
    pub triangles: usize,
    pub interior_vertices: usize,
    pub interior_edges: usize,
    pub boundary_vertices: usize,
    pub boundary_edges: usize,
}

fn signed_area2(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
}

impl TriMesh {
    /// Builds connectivity from raw vertices and counterclockwise triangles.
    ///
    /// `h` is the nominal mesh size carried along for convergence studies.
    pub fn from_raw(vertices: Vec<Point>, triangles: Vec<[usize; 3]>, h: f64) -> Result<Self> {
        let nv = vertices.len();
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(Error::InvalidParameter(format!("triangle {t} references a missing vertex")));
            }
            let area2 = signed_area2(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if area2 <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "triangle {t} is not counterclockwise (2|T| = {area2:e})"
                )));
            }
        }

        let mut keyed: Vec<([usize; 2], usize, usize)> = Vec::with_capacity(3 * triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            for i in 0..3 {
                let a = tri[(i + 1) % 3];
                let b = tri[(i + 2) % 3];
                keyed.push(([a.min(b), a.max(b)], t, i));
            }
        }
        keyed.sort_unstable();

        let mut edges = Vec::new();
        let mut edge_triangles = Vec::new();
        let mut triangle_edges = vec![[usize::MAX; 3]; triangles.len()];
        let mut k = 0;
        while k < keyed.len() {
            let key = keyed[k].0;
            let mut end = k + 1;
            while end < keyed.len() && keyed[end].0 == key {
                end += 1;
            }
            if end - k > 2 {
                return Err(Error::InvalidParameter(format!("edge {key:?} is shared by {} triangles", end - k)));
            }
            let e = edges.len();
            edges.push(key);
            for &(_, t, i) in &keyed[k..end] {
                triangle_edges[t][i] = e;
            }
            let second = if end - k == 2 { Some(keyed[k + 1].1) } else { None };
            edge_triangles.push((keyed[k].1, second));
            k = end;
        }

        let edge_boundary: Vec<bool> = edge_triangles.iter().map(|(_, s)| s.is_none()).collect();
        let mut vertex_boundary = vec![false; nv];
        for (e, edge) in edges.iter().enumerate() {
            if edge_boundary[e] {
                vertex_boundary[edge[0]] = true;
                vertex_boundary[edge[1]] = true;
            }
        }
        let edge_lengths = edges
            .iter()
            .map(|&[a, b]| {
                let (p, q) = (vertices[a], vertices[b]);
                (q[0] - p[0]).hypot(q[1] - p[1])
            })
            .collect();
        let areas =
            triangles.iter().map(|t| 0.5 * signed_area2(vertices[t[0]], vertices[t[1]], vertices[t[2]])).collect();

        Ok(Self {
            vertices,
            triangles,
            edges,
            triangle_edges,
            edge_triangles,
            vertex_boundary,
            edge_boundary,
            edge_lengths,
            areas,
            h,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Global edge indices of a triangle; entry `i` is the edge opposite local vertex `i`.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.triangle_edges[t]
    }

    /// The one or two triangles incident to an edge.
    pub fn edge_triangles(&self, e: usize) -> (usize, Option<usize>) {
        self.edge_triangles[e]
    }

    /// +1 when local edge `i` of triangle `t` (running from local vertex i+1
    /// to i+2) agrees with the global lower-to-higher orientation, -1 otherwise.
    pub fn edge_sign(&self, t: usize, i: usize) -> f64 {
        let tri = self.triangles[t];
        if tri[(i + 1) % 3] < tri[(i + 2) % 3] {
            1.0
        } else {
            -1.0
        }
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.vertex_boundary[v]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_boundary[e]
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        self.edge_lengths[e]
    }

    pub fn area(&self, t: usize) -> f64 {
        self.areas[t]
    }

    /// Nominal mesh size (1/n for the structured constructors).
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_coords(&self, t: usize) -> [Point; 3] {
        let tri = self.triangles[t];
        [self.vertices[tri[0]], self.vertices[tri[1]], self.vertices[tri[2]]]
    }

    pub fn max_edge_length(&self) -> f64 {
        self.edge_lengths.iter().copied().fold(0.0, f64::max)
    }

    pub fn stats(&self) -> MeshStats {
        let boundary_vertices = self.vertex_boundary.iter().filter(|&&b| b).count();
        let boundary_edges = self.edge_boundary.iter().filter(|&&b| b).count();
        MeshStats {
            vertices: self.num_vertices(),
            edges: self.num_edges(),
            triangles: self.num_triangles(),
            interior_vertices: self.num_vertices() - boundary_vertices,
            interior_edges: self.num_edges() - boundary_edges,
            boundary_vertices,
            boundary_edges,
        }
    }

    /// Re-checks the structural invariants from scratch.
    pub fn validate(&self) -> Result<()> {
        for t in 0..self.num_triangles() {
            if self.areas[t] <= 0.0 {
                return Err(Error::InvalidParameter(format!("triangle {t} has nonpositive area")));
            }
        }
        let mut counts = vec![0usize; self.num_edges()];
        for te in &self.triangle_edges {
            for &e in te {
                counts[e] += 1;
            }
        }
        for (e, &c) in counts.iter().enumerate() {
            let expected = if self.edge_boundary[e] { 1 } else { 2 };
            if c != expected {
                return Err(Error::InvalidParameter(format!(
                    "edge {e} has {c} incident triangles, expected {expected}"
                )));
            }
        }
        Ok(())
    }
}

fn require_positive(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidParameter("number of subdivisions must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Unit square split into `n x n` cells, two triangles per cell, using the
/// default (anti-)diagonal.
pub fn build_square_mesh(n: usize) -> Result<TriMesh> {
    build_square_mesh_with(n, Diagonal::default())
}

pub fn build_square_mesh_with(n: usize, diagonal: Diagonal) -> Result<TriMesh> {
    require_positive(n)?;
    let h = 1.0 / n as f64;
    let vertices = (0..=n).flat_map(|j| (0..=n).map(move |i| [i as f64 * h, j as f64 * h])).collect();
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let a = j * (n + 1) + i;
            let b = a + 1;
            let c = a + n + 2;
            let d = a + n + 1;
            match diagonal {
                Diagonal::Anti => {
                    triangles.push([a, b, d]);
                    triangles.push([b, c, d]);
                }
                Diagonal::Main => {
                    triangles.push([a, b, c]);
                    triangles.push([a, c, d]);
                }
            }
        }
    }
    TriMesh::from_raw(vertices, triangles, h)
}

/// L-shaped domain `[0,1]^2 \ [0,1/2) x (1/2,1]` with `n` (even) subdivisions
/// per unit length.
///
/// Writing `n = 2 c 2^k` with `c` odd, the coarse mesh splits each of the
/// `3 c^2` square cells of size `1/(2c)` into four triangles through the cell
/// centre, and is then red-refined `k` times. For `n = 2^m` this is the
/// criss-cross mesh with `h = 1/2` refined `m - 1` times.
pub fn build_lshape_mesh(n: usize) -> Result<TriMesh> {
    require_positive(n)?;
    if !n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("L-shape needs an even number of subdivisions, got {n}")));
    }
    let mut c = n / 2;
    let mut levels = 0;
    while c.is_multiple_of(2) {
        c /= 2;
        levels += 1;
    }
    let mut mesh = lshape_criss_cross(c)?;
    for _ in 0..levels {
        mesh = refine_uniform(&mesh)?;
    }
    Ok(mesh)
}

fn lshape_criss_cross(c: usize) -> Result<TriMesh> {
    let cells_per_side = 2 * c;
    let h = 1.0 / cells_per_side as f64;
    // Vertex lattice on the full square; unused vertices are compacted below.
    let lattice = cells_per_side + 1;
    let mut index = vec![usize::MAX; lattice * lattice];
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut vid = |i: usize, j: usize, vertices: &mut Vec<Point>| {
        let slot = &mut index[j * lattice + i];
        if *slot == usize::MAX {
            *slot = vertices.len();
            vertices.push([i as f64 * h, j as f64 * h]);
        }
        *slot
    };
    let mut centres = Vec::new();
    for j in 0..cells_per_side {
        for i in 0..cells_per_side {
            // upper-left quadrant removed
            if i < c && j >= c {
                continue;
            }
            let a = vid(i, j, &mut vertices);
            let b = vid(i + 1, j, &mut vertices);
            let cc = vid(i + 1, j + 1, &mut vertices);
            let d = vid(i, j + 1, &mut vertices);
            centres.push(([a, b, cc, d], [(i as f64 + 0.5) * h, (j as f64 + 0.5) * h]));
        }
    }
    for ([a, b, cc, d], centre) in centres {
        let m = vertices.len();
        vertices.push(centre);
        triangles.extend_from_slice(&[[a, b, m], [b, cc, m], [cc, d, m], [d, a, m]]);
    }
    TriMesh::from_raw(vertices, triangles, h)
}

/// Reference triangle (0,0),(1,0),(0,1) split into `n^2` similar triangles.
pub fn build_reference_triangle_mesh(n: usize) -> Result<TriMesh> {
    require_positive(n)?;
    let h = 1.0 / n as f64;
    // row j holds n + 1 - j vertices
    let mut row_start = Vec::with_capacity(n + 1);
    let mut acc = 0;
    for j in 0..=n {
        row_start.push(acc);
        acc += n + 1 - j;
    }
    let id = |i: usize, j: usize| row_start[j] + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 2) / 2);
    for j in 0..=n {
        for i in 0..=(n - j) {
            vertices.push([i as f64 * h, j as f64 * h]);
        }
    }
    let mut triangles = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..(n - j) {
            triangles.push([id(i, j), id(i + 1, j), id(i, j + 1)]);
            if i + j + 1 < n {
                triangles.push([id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
    }
    TriMesh::from_raw(vertices, triangles, h)
}

/// Red refinement: each triangle is split into four congruent children
/// through its edge midpoints. Old vertices keep their indices; the midpoint
/// of edge `e` becomes vertex `num_vertices + e`.
pub fn refine_uniform(mesh: &TriMesh) -> Result<TriMesh> {
    let nv = mesh.num_vertices();
    let mut vertices = mesh.vertices.clone();
    vertices.extend(mesh.edges.iter().map(|&[a, b]| {
        let (p, q) = (mesh.vertices[a], mesh.vertices[b]);
        [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]
    }));
    let mut triangles = Vec::with_capacity(4 * mesh.num_triangles());
    for (t, &[a, b, c]) in mesh.triangles.iter().enumerate() {
        let te = mesh.triangle_edges[t];
        // midpoints opposite a, b, c
        let (m_bc, m_ca, m_ab) = (nv + te[0], nv + te[1], nv + te[2]);
        triangles.push([a, m_ab, m_ca]);
        triangles.push([m_ab, b, m_bc]);
        triangles.push([m_ca, m_bc, c]);
        triangles.push([m_ab, m_bc, m_ca]);
    }
    TriMesh::from_raw(vertices, triangles, 0.5 * mesh.h)
}
