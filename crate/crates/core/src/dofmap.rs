//! Global degree-of-freedom numbering for both element families.

use serde::{Deserialize, Serialize};

use crate::mesh::TriMesh;

/// The two finite element families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Element {
    /// Cubic nonconforming element, 12 local functions.
    B3,
    /// Quadratic Morley element, 6 local functions.
    Morley,
}

impl Element {
    pub fn local_size(self) -> usize {
        match self {
            Element::B3 => 12,
            Element::Morley => 6,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Element::B3 => "b3",
            Element::Morley => "morley",
        }
    }
}

impl std::str::FromStr for Element {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "b3" => Ok(Element::B3),
            "morley" => Ok(Element::Morley),
            other => Err(crate::Error::InvalidParameter(format!("unknown element '{other}'"))),
        }
    }
}

/// Local-to-global index map with clamped boundary DOFs removed.
///
/// Each triangle owns `local_size` slots. A slot is `None` when its DOF sits
/// on the boundary. Each slot also carries the orientation sign of its
/// entity: +1 for vertex slots, and for edge slots +1 when the local edge
/// direction agrees with the global lower-to-higher one.
#[derive(Debug, Clone)]
pub struct DofMap {
    element: Element,
    num_dofs: usize,
    local_size: usize,
    local_to_global: Vec<Option<usize>>,
    signs: Vec<f64>,
}

impl DofMap {
    pub fn element(&self) -> Element {
        self.element
    }

    pub fn num_dofs(&self) -> usize {
        self.num_dofs
    }

    pub fn local_size(&self) -> usize {
        self.local_size
    }

    pub fn num_triangles(&self) -> usize {
        self.local_to_global.len() / self.local_size
    }

    pub fn local_to_global(&self, t: usize) -> &[Option<usize>] {
        &self.local_to_global[t * self.local_size..(t + 1) * self.local_size]
    }

    pub fn local_signs(&self, t: usize) -> &[f64] {
        &self.signs[t * self.local_size..(t + 1) * self.local_size]
    }

    /// Renumbers global DOFs through a permutation `perm[old] = new`.
    pub fn permuted(&self, perm: &[usize]) -> DofMap {
        assert_eq!(perm.len(), self.num_dofs);
        DofMap { local_to_global: self.local_to_global.iter().map(|g| g.map(|g| perm[g])).collect(), ..self.clone() }
    }
}

/// Global numbering of interior vertices and interior edges, in index order.
fn interior_numbering(mesh: &TriMesh) -> (Vec<Option<usize>>, Vec<Option<usize>>) {
    let mut next = 0;
    let vertices = (0..mesh.num_vertices())
        .map(|v| {
            (!mesh.is_boundary_vertex(v)).then(|| {
                next += 1;
                next - 1
            })
        })
        .collect();
    let mut next = 0;
    let edges = (0..mesh.num_edges())
        .map(|e| {
            (!mesh.is_boundary_edge(e)).then(|| {
                next += 1;
                next - 1
            })
        })
        .collect();
    (vertices, edges)
}

/// B3 numbering: three consecutive indices (x, y, patch) per interior vertex,
/// then one per interior edge.
pub fn build_dofmap(mesh: &TriMesh) -> DofMap {
    let (vnum, enum_) = interior_numbering(mesh);
    let nv = vnum.iter().flatten().count();
    let ne = enum_.iter().flatten().count();
    let mut l2g = Vec::with_capacity(12 * mesh.num_triangles());
    let mut signs = Vec::with_capacity(12 * mesh.num_triangles());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        for &v in tri {
            for s in 0..3 {
                l2g.push(vnum[v].map(|g| 3 * g + s));
                signs.push(1.0);
            }
        }
        let edges = mesh.triangle_edges(t);
        for (i, &e) in edges.iter().enumerate() {
            l2g.push(enum_[e].map(|g| 3 * nv + g));
            signs.push(mesh.edge_sign(t, i));
        }
    }
    DofMap { element: Element::B3, num_dofs: 3 * nv + ne, local_size: 12, local_to_global: l2g, signs }
}

/// Morley numbering: one index per interior vertex, then one per interior edge.
pub fn build_morley_dofmap(mesh: &TriMesh) -> DofMap {
    let (vnum, enum_) = interior_numbering(mesh);
    let nv = vnum.iter().flatten().count();
    let ne = enum_.iter().flatten().count();
    let mut l2g = Vec::with_capacity(6 * mesh.num_triangles());
    let mut signs = Vec::with_capacity(6 * mesh.num_triangles());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        for &v in tri {
            l2g.push(vnum[v]);
            signs.push(1.0);
        }
        for (i, &e) in mesh.triangle_edges(t).iter().enumerate() {
            l2g.push(enum_[e].map(|g| nv + g));
            signs.push(mesh.edge_sign(t, i));
        }
    }
    DofMap { element: Element::Morley, num_dofs: nv + ne, local_size: 6, local_to_global: l2g, signs }
}

/// Builds the map for the requested element family.
pub fn build_dofmap_for(mesh: &TriMesh, element: Element) -> DofMap {
    match element {
        Element::B3 => build_dofmap(mesh),
        Element::Morley => build_morley_dofmap(mesh),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::*;

    fn check_structure(mesh: &TriMesh, map: &DofMap) {
        let mut seen = vec![false; map.num_dofs()];
        for t in 0..mesh.num_triangles() {
            for g in map.local_to_global(t).iter().flatten() {
                seen[*g] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn b3_counts() {
        let m = build_square_mesh(2).unwrap();
        let map = build_dofmap(&m);
        assert_eq!(map.num_dofs(), 11);
        check_structure(&m, &map);
        assert_eq!(build_dofmap(&build_square_mesh(1).unwrap()).num_dofs(), 1);
        assert_eq!(build_dofmap(&build_reference_triangle_mesh(1).unwrap()).num_dofs(), 0);
        let m = build_square_mesh(5).unwrap();
        let s = m.stats();
        let map = build_dofmap(&m);
        assert_eq!(map.num_dofs(), 3 * s.interior_vertices + s.interior_edges);
        check_structure(&m, &map);
    }

    #[test]
    fn b3_vertex_triples_are_consecutive() {
        let m = build_square_mesh(3).unwrap();
        let map = build_dofmap(&m);
        for t in 0..m.num_triangles() {
            let l = map.local_to_global(t);
            for i in 0..3 {
                if let Some(g) = l[3 * i] {
                    assert_eq!(g % 3, 0);
                    assert_eq!(l[3 * i + 1], Some(g + 1));
                    assert_eq!(l[3 * i + 2], Some(g + 2));
                } else {
                    assert!(l[3 * i + 1].is_none() && l[3 * i + 2].is_none());
                }
            }
        }
    }

    #[test]
    fn edge_slots_agree_across_neighbours() {
        let m = build_square_mesh(4).unwrap();
        let map = build_dofmap(&m);
        for e in 0..m.num_edges() {
            if let (t0, Some(t1)) = m.edge_triangles(e) {
                let slot = |t: usize| m.triangle_edges(t).iter().position(|&x| x == e).unwrap();
                let (i0, i1) = (slot(t0), slot(t1));
                assert_eq!(map.local_to_global(t0)[9 + i0], map.local_to_global(t1)[9 + i1]);
                // neighbours traverse a shared edge in opposite directions
                assert_eq!(map.local_signs(t0)[9 + i0], -map.local_signs(t1)[9 + i1]);
            }
        }
    }

    #[test]
    fn morley_counts() {
        let count = |n| build_morley_dofmap(&build_square_mesh(n).unwrap()).num_dofs();
        assert_eq!(count(1), 1);
        assert_eq!(count(2), 9);
        assert_eq!(count(4), 49);
        let m = build_square_mesh(4).unwrap();
        check_structure(&m, &build_morley_dofmap(&m));
    }

    #[test]
    fn large_counts() {
        assert_eq!(build_dofmap(&build_square_mesh(128).unwrap()).num_dofs(), 97283);
        assert_eq!(build_dofmap(&build_reference_triangle_mesh(128).unwrap()).num_dofs(), 48387);
        assert_eq!(build_dofmap(&build_lshape_mesh(128).unwrap()).num_dofs(), 146435);
    }

    #[test]
    fn element_parsing() {
        assert_eq!("B3".parse::<Element>().unwrap(), Element::B3);
        assert_eq!("morley".parse::<Element>().unwrap(), Element::Morley);
        assert!("argyris".parse::<Element>().is_err());
    }
}
