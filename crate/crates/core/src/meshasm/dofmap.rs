//! Global numbering of the moment degrees of freedom.

use serde::{Deserialize, Serialize};

use super::mesh::Mesh;
use crate::localspace::{reference_space, Facet, SpaceKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    None,
    /// Vanishing trace on the whole boundary (perfect conductor for `W1`).
    Dirichlet,
}

/// Number of global dofs carried by each facet class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DofCounts {
    pub vertex: usize,
    pub edge: usize,
    pub face: usize,
    pub cell: usize,
}

impl DofCounts {
    pub fn total(&self) -> usize {
        self.vertex + self.edge + self.face + self.cell
    }
}

/// Local-to-global map. Local vertex order follows global order, so every
/// local facet has the global orientation and all signs are `+1`; the sign
/// is kept explicit for callers that combine local contributions.
#[derive(Clone, Debug)]
pub struct GlobalDofMap {
    pub kind: SpaceKind,
    pub p: usize,
    pub bc: BoundaryCondition,
    pub n_dofs: usize,
    pub counts: DofCounts,
    /// Per tetrahedron, per local dof: `(global index, sign)` or `None` if removed.
    pub local: Vec<Vec<Option<(usize, i8)>>>,
}

impl GlobalDofMap {
    pub fn new(mesh: &Mesh, kind: SpaceKind, p: usize, bc: BoundaryCondition) -> Self {
        let space = reference_space(kind, p);
        let per = |f: Facet| space.block(f).len();
        let (nv, ne, nf, nc) = (per(Facet::Vertex(0)), per(Facet::Edge(0)), per(Facet::Face(0)), per(Facet::Cell));
        let dirichlet = bc == BoundaryCondition::Dirichlet;
        let (bv, be, bf) = if dirichlet {
            (mesh.boundary_vertices(), mesh.boundary_edges(), mesh.boundary_faces())
        } else {
            (vec![false; mesh.num_vertices()], vec![false; mesh.edges.len()], vec![false; mesh.faces.len()])
        };
        let mut next = 0;
        let mut number = |removed: &[bool], block: usize| -> Vec<Option<usize>> {
            removed
                .iter()
                .map(|&r| {
                    if r || block == 0 {
                        None
                    } else {
                        next += block;
                        Some(next - block)
                    }
                })
                .collect()
        };
        let vstart = number(&bv, nv);
        let estart = number(&be, ne);
        let fstart = number(&bf, nf);
        let cstart = number(&vec![false; mesh.num_tets()], nc);
        let count = |s: &[Option<usize>], b: usize| s.iter().flatten().count() * b;
        let counts = DofCounts {
            vertex: count(&vstart, nv),
            edge: count(&estart, ne),
            face: count(&fstart, nf),
            cell: count(&cstart, nc),
        };
        let local = (0..mesh.num_tets())
            .map(|t| {
                let mut out = vec![None; space.dim()];
                for (facet, range) in &space.facet_partition {
                    let start = match *facet {
                        Facet::Vertex(v) => vstart[mesh.tets[t][v]],
                        Facet::Edge(e) => estart[mesh.tet_edges[t][e]],
                        Facet::Face(f) => fstart[mesh.tet_faces[t][f]],
                        Facet::Cell => cstart[t],
                    };
                    if let Some(s) = start {
                        for (k, i) in range.clone().enumerate() {
                            out[i] = Some((s + k, 1));
                        }
                    }
                }
                out
            })
            .collect();
        GlobalDofMap {
            kind,
            p,
            bc,
            n_dofs: next,
            counts,
            local,
        }
    }
}

/// Dimension of the discrete gradient range `grad P_{p+1}(M)` inside the
/// global `W1_p` space: scalar dofs minus constants without boundary
/// conditions, interior scalar dofs with them (contractible domains).
pub fn gradient_space_dim(mesh: &Mesh, p: usize, bc: BoundaryCondition) -> usize {
    let s = GlobalDofMap::new(mesh, SpaceKind::Scalar, p, bc);
    match bc {
        BoundaryCondition::None => s.n_dofs - 1,
        BoundaryCondition::Dirichlet => s.n_dofs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localspace::dim_w1;

    #[test]
    fn counts() {
        let r = Mesh::reference_tet();
        assert_eq!(GlobalDofMap::new(&r, SpaceKind::W1, 1, BoundaryCondition::None).n_dofs, 20);
        assert_eq!(GlobalDofMap::new(&r, SpaceKind::W1, 1, BoundaryCondition::Dirichlet).n_dofs, 0);
        assert_eq!(
            GlobalDofMap::new(&r, SpaceKind::W1, 2, BoundaryCondition::Dirichlet).n_dofs,
            dim_w1(2) - 6 * 3 - 4 * 6
        );
        let c = Mesh::cube_grid(1);
        assert_eq!(GlobalDofMap::new(&c, SpaceKind::W1, 0, BoundaryCondition::None).n_dofs, 19);
        let m = GlobalDofMap::new(&c, SpaceKind::W1, 2, BoundaryCondition::None);
        assert_eq!(m.counts, DofCounts { vertex: 0, edge: 19 * 3, face: 18 * 6, cell: 6 * 3 });
        assert_eq!(gradient_space_dim(&c, 0, BoundaryCondition::None), 7);
        assert_eq!(gradient_space_dim(&c, 0, BoundaryCondition::Dirichlet), 0);
    }
}
