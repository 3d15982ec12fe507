//! Cubic nonconforming B3 and Morley finite elements for fourth-order
//! problems: variable-coefficient bi-Laplacian source and eigenvalue
//! problems, and the Helmholtz transmission eigenvalue problem via a
//! quadratic eigenvalue problem.

// `!(x > y)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod assembly;
pub mod b3_element;
pub mod coefficient;
pub mod dofmap;
pub mod error;
pub mod frame;
pub mod linalg;
pub mod mesh;
pub mod morley_element;
pub mod problems;
pub mod quadrature;
pub mod sparse;

pub use coefficient::CoefficientField;
pub use dofmap::{build_dofmap, build_dofmap_for, build_morley_dofmap, DofMap, Element};
pub use error::{Error, Result};
pub use frame::{BaryFrame, BasisValue, LocalBasisEval};
pub use mesh::{Diagonal, Domain, MeshStats, Point, TriMesh};
pub use sparse::{SparseBuilder, SparseMatrix};
