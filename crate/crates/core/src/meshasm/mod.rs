//! Meshes, global degrees of freedom and assembly of the Maxwell system.

pub mod assembly;
pub mod dofmap;
pub mod mesh;

pub use assembly::{assemble, assemble_exact, discrete_gradient, Material, MaterialSpec, System};
pub use dofmap::{gradient_space_dim, BoundaryCondition, GlobalDofMap};
pub use mesh::{Mesh, MeshError, MeshKind};
