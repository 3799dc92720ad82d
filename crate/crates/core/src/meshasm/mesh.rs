//! Tetrahedral meshes with globally oriented edges and faces.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polycore::simplex::{TET_EDGES, TET_FACES};
use crate::polycore::{Rational, Simplex};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MeshError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("tetrahedron {0} references a missing vertex")]
    BadIndex(usize),
    #[error("tetrahedron {0} is degenerate")]
    Degenerate(usize),
    #[error("face {0:?} is shared by more than two tetrahedra")]
    NonManifold([usize; 3]),
}

/// Mesh generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "n")]
pub enum MeshKind {
    ReferenceTet,
    Cube6,
    CubeGrid(usize),
}

/// A conforming tetrahedral mesh. Each tetrahedron stores its vertices in
/// increasing global order, so local edges and faces inherit the global
/// orientation (edges point from lower to higher index, faces are keyed by
/// sorted triples).
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Vec<Rational>>,
    pub tets: Vec<[usize; 4]>,
    pub regions: Vec<usize>,
    pub edges: Vec<[usize; 2]>,
    pub faces: Vec<[usize; 3]>,
    pub tet_edges: Vec<[usize; 6]>,
    pub tet_faces: Vec<[usize; 4]>,
    /// Tetrahedra adjacent to each face.
    pub face_tets: Vec<Vec<usize>>,
}

impl Mesh {
    pub fn new(vertices: Vec<Vec<Rational>>, tets: Vec<[usize; 4]>, regions: Option<Vec<usize>>) -> Result<Self, MeshError> {
        let regions = regions.unwrap_or_else(|| vec![0; tets.len()]);
        let mut sorted = Vec::with_capacity(tets.len());
        for (t, tet) in tets.iter().enumerate() {
            if tet.iter().any(|&v| v >= vertices.len()) {
                return Err(MeshError::BadIndex(t));
            }
            let mut s = *tet;
            s.sort_unstable();
            let pts = s.iter().map(|&v| vertices[v].clone()).collect();
            if s.windows(2).any(|w| w[0] == w[1]) || Simplex::new(pts).is_err() {
                return Err(MeshError::Degenerate(t));
            }
            sorted.push(s);
        }
        let mut edge_ids: BTreeMap<[usize; 2], usize> = BTreeMap::new();
        let mut face_ids: BTreeMap<[usize; 3], usize> = BTreeMap::new();
        for s in &sorted {
            for [a, b] in TET_EDGES {
                edge_ids.entry([s[a], s[b]]).or_insert(0);
            }
            for [a, b, c] in TET_FACES {
                face_ids.entry([s[a], s[b], s[c]]).or_insert(0);
            }
        }
        for (i, v) in edge_ids.values_mut().enumerate() {
            *v = i;
        }
        for (i, v) in face_ids.values_mut().enumerate() {
            *v = i;
        }
        let mut face_tets = vec![Vec::new(); face_ids.len()];
        let mut tet_edges = Vec::with_capacity(sorted.len());
        let mut tet_faces = Vec::with_capacity(sorted.len());
        for (t, s) in sorted.iter().enumerate() {
            tet_edges.push(TET_EDGES.map(|[a, b]| edge_ids[&[s[a], s[b]]]));
            let f = TET_FACES.map(|[a, b, c]| face_ids[&[s[a], s[b], s[c]]]);
            for &fi in &f {
                face_tets[fi].push(t);
            }
            tet_faces.push(f);
        }
        let faces: Vec<[usize; 3]> = face_ids.keys().copied().collect();
        if let Some(i) = face_tets.iter().position(|t| t.len() > 2) {
            return Err(MeshError::NonManifold(faces[i]));
        }
        Ok(Mesh {
            vertices,
            tets: sorted,
            regions,
            edges: edge_ids.keys().copied().collect(),
            faces,
            tet_edges,
            tet_faces,
            face_tets,
        })
    }

    pub fn generate(kind: MeshKind) -> Mesh {
        match kind {
            MeshKind::ReferenceTet => Self::reference_tet(),
            MeshKind::Cube6 => Self::cube_grid(1),
            MeshKind::CubeGrid(n) => Self::cube_grid(n),
        }
    }

    pub fn reference_tet() -> Mesh {
        let t = Simplex::reference(3);
        Mesh::new(t.vertices().to_vec(), vec![[0, 1, 2, 3]], None).expect("valid")
    }

    /// `[0,1]^3` split into `n^3` cubes, each cut into 6 tetrahedra around
    /// its main diagonal.
    pub fn cube_grid(n: usize) -> Mesh {
        assert!(n >= 1, "grid needs at least one cell per direction");
        let m = n + 1;
        let id = |i: usize, j: usize, k: usize| i + m * (j + m * k);
        let mut vertices = Vec::with_capacity(m * m * m);
        for k in 0..m {
            for j in 0..m {
                for i in 0..m {
                    vertices.push(
                        [i, j, k].iter().map(|&c| Rational::new(c as i64, n as i64)).collect(),
                    );
                }
            }
        }
        const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut tets = Vec::with_capacity(6 * n * n * n);
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    for perm in PERMS {
                        let mut c = [i, j, k];
                        let mut t = [id(c[0], c[1], c[2]); 4];
                        for (s, &ax) in perm.iter().enumerate() {
                            c[ax] += 1;
                            t[s + 1] = id(c[0], c[1], c[2]);
                        }
                        tets.push(t);
                    }
                }
            }
        }
        Mesh::new(vertices, tets, None).expect("valid")
    }

    /// Uniformly scaled copy.
    pub fn scaled(&self, s: &Rational) -> Mesh {
        let mut m = self.clone();
        for v in &mut m.vertices {
            for x in v.iter_mut() {
                *x = &*x * s;
            }
        }
        m
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_tets(&self) -> usize {
        self.tets.len()
    }

    pub fn simplex(&self, t: usize) -> Simplex {
        Simplex::new(self.tets[t].iter().map(|&v| self.vertices[v].clone()).collect()).expect("validated")
    }

    pub fn boundary_faces(&self) -> Vec<bool> {
        self.face_tets.iter().map(|t| t.len() == 1).collect()
    }

    pub fn boundary_edges(&self) -> Vec<bool> {
        let bf = self.boundary_faces();
        let index: HashMap<[usize; 2], usize> = self.edges.iter().enumerate().map(|(i, e)| (*e, i)).collect();
        let mut out = vec![false; self.edges.len()];
        for (f, [a, b, c]) in self.faces.iter().enumerate() {
            if bf[f] {
                for e in [[*a, *b], [*a, *c], [*b, *c]] {
                    out[index[&e]] = true;
                }
            }
        }
        out
    }

    pub fn boundary_vertices(&self) -> Vec<bool> {
        let bf = self.boundary_faces();
        let mut out = vec![false; self.vertices.len()];
        for (f, vs) in self.faces.iter().enumerate() {
            if bf[f] {
                for &v in vs {
                    out[v] = true;
                }
            }
        }
        out
    }

    /// Plain text: `nv nt`, then `x y z` per vertex, then `i0 i1 i2 i3 [region]`.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.vertices.len(), self.tets.len());
        for v in &self.vertices {
            let c: Vec<String> = v.iter().map(Rational::to_exact_string).collect();
            writeln!(s, "{}", c.join(" ")).unwrap();
        }
        let with_regions = self.regions.iter().any(|&r| r != 0);
        for (t, r) in self.tets.iter().zip(&self.regions) {
            if with_regions {
                writeln!(s, "{} {} {} {} {}", t[0], t[1], t[2], t[3], r).unwrap();
            } else {
                writeln!(s, "{} {} {} {}", t[0], t[1], t[2], t[3]).unwrap();
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Mesh, MeshError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let perr = |line: usize, msg: &str| MeshError::Parse { line, msg: msg.to_string() };
        let (hl, header) = lines.next().ok_or(perr(1, "missing header `nv nt`"))?;
        let h: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| perr(hl, "header must be two counts `nv nt`"))?;
        let [nv, nt] = h[..] else {
            return Err(perr(hl, "header must be two counts `nv nt`"));
        };
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (l, s) = lines.next().ok_or(perr(hl, "fewer vertex lines than announced"))?;
            let c: Vec<Rational> = s
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|_| perr(l, "vertex coordinates must be decimal numbers"))?;
            if c.len() != 3 {
                return Err(perr(l, "a vertex needs three coordinates"));
            }
            vertices.push(c);
        }
        let mut tets = Vec::with_capacity(nt);
        let mut regions = Vec::with_capacity(nt);
        for _ in 0..nt {
            let (l, s) = lines.next().ok_or(perr(hl, "fewer tetrahedron lines than announced"))?;
            let c: Vec<usize> = s
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|_| perr(l, "tetrahedron entries must be 0-based vertex indices"))?;
            match c[..] {
                [a, b, cc, d] => {
                    tets.push([a, b, cc, d]);
                    regions.push(0);
                }
                [a, b, cc, d, r] => {
                    tets.push([a, b, cc, d]);
                    regions.push(r);
                }
                _ => return Err(perr(l, "a tetrahedron needs four indices and an optional region")),
            }
        }
        if let Some((l, _)) = lines.next() {
            return Err(perr(l, "trailing content after the announced tetrahedra"));
        }
        Mesh::new(vertices, tets, Some(regions))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_counts() {
        let r = Mesh::reference_tet();
        assert_eq!((r.num_vertices(), r.edges.len(), r.faces.len()), (4, 6, 4));
        let c = Mesh::generate(MeshKind::Cube6);
        assert_eq!((c.num_tets(), c.num_vertices(), c.edges.len(), c.faces.len()), (6, 8, 19, 18));
        assert_eq!(Mesh::cube_grid(2).num_tets(), 48);
        let g = Mesh::cube_grid(2);
        let vol: Rational = (0..g.num_tets()).map(|t| g.simplex(t).volume()).sum();
        assert_eq!(vol, Rational::ONE);
        assert_eq!(g.boundary_faces().iter().filter(|&&b| b).count(), 6 * 4 * 2);
    }

    #[test]
    fn text_roundtrip() {
        let m = Mesh::cube_grid(2).scaled(&Rational::new(3, 2));
        let back = Mesh::from_text(&m.to_text()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let e = Mesh::from_text("1 0\n0 0 x\n").unwrap_err();
        assert_eq!(e, MeshError::Parse { line: 2, msg: "vertex coordinates must be decimal numbers".into() });
        let e = Mesh::from_text("4 1\n0 0 0\n1 0 0\n0 1 0\n2 0 0\n0 1 2 3\n").unwrap_err();
        assert_eq!(e, MeshError::Degenerate(0));
    }
}
