//! Mass and curl-curl stiffness matrices of the global `W1_p` space.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::dofmap::{BoundaryCondition, GlobalDofMap};
use super::mesh::Mesh;
use crate::localspace::{field_coordinates, reference_space, SpaceKind};
use crate::polycore::poly::monomials;
use crate::polycore::{curl, grad, Polynomial, QMatrix, Rational, Simplex, VectorPolynomial};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AssemblyError {
    #[error("material tensor {0} is not symmetric positive definite")]
    NotSpd(&'static str),
    #[error("tetrahedron {tet} uses region {region} but only {available} materials are given")]
    MissingRegion { tet: usize, region: usize, available: usize },
    #[error("assembled mass matrix is not positive definite")]
    MassNotSpd,
}

pub type Tensor = [[Rational; 3]; 3];

pub fn identity_tensor() -> Tensor {
    std::array::from_fn(|i| std::array::from_fn(|j| if i == j { Rational::ONE } else { Rational::ZERO }))
}

pub fn diagonal_tensor(d: [Rational; 3]) -> Tensor {
    let mut t = identity_tensor();
    for (i, v) in d.into_iter().enumerate() {
        t[i][i] = v;
    }
    t
}

fn tensor_matrix(t: &Tensor) -> QMatrix {
    QMatrix::from_rows(t.iter().map(|r| r.to_vec()).collect())
}

/// Symmetric with positive leading principal minors.
pub fn is_spd(t: &Tensor) -> bool {
    let sym = (0..3).all(|i| (0..3).all(|j| t[i][j] == t[j][i]));
    let m1 = t[0][0].clone();
    let m2 = &t[0][0] * &t[1][1] - &t[0][1] * &t[1][0];
    let det = crate::polycore::simplex::det3(&[t[0].to_vec(), t[1].to_vec(), t[2].to_vec()]);
    sym && m1.signum() > 0 && m2.signum() > 0 && det.signum() > 0
}

/// Constant permittivity and permeability on one region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub eps: Tensor,
    pub mu: Tensor,
}

impl Default for Material {
    fn default() -> Self {
        Material {
            eps: identity_tensor(),
            mu: identity_tensor(),
        }
    }
}

/// Piecewise-constant materials indexed by the mesh region id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialSpec {
    pub regions: Vec<Material>,
}

impl Default for MaterialSpec {
    fn default() -> Self {
        MaterialSpec {
            regions: vec![Material::default()],
        }
    }
}

impl MaterialSpec {
    pub fn uniform(eps: Tensor, mu: Tensor) -> Result<Self, AssemblyError> {
        let s = MaterialSpec {
            regions: vec![Material { eps, mu }],
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), AssemblyError> {
        for m in &self.regions {
            if !is_spd(&m.eps) {
                return Err(AssemblyError::NotSpd("eps"));
            }
            if !is_spd(&m.mu) {
                return Err(AssemblyError::NotSpd("mu"));
            }
        }
        Ok(())
    }

    fn region(&self, mesh: &Mesh, t: usize) -> Result<&Material, AssemblyError> {
        let r = mesh.regions[t];
        self.regions.get(r).ok_or(AssemblyError::MissingRegion {
            tet: t,
            region: r,
            available: self.regions.len(),
        })
    }
}

/// Componentwise moment matrices of the reference dual basis:
/// `mass[a][b]_ij = int phi_i,a phi_j,b`, `stiff[a][b]_ij = int curl phi_i,a curl phi_j,b`.
pub struct ReferenceMatrices {
    pub p: usize,
    pub mass: Vec<Vec<QMatrix>>,
    pub stiff: Vec<Vec<QMatrix>>,
}

fn monomial_gram(da: i32, db: i32) -> QMatrix {
    let ia = monomials(3, da);
    let ib = monomials(3, db);
    QMatrix::from_rows(
        ia.iter()
            .map(|a| {
                ib.iter()
                    .map(|b| Polynomial::monomial(3, [a[0] + b[0], a[1] + b[1], a[2] + b[2]], Rational::ONE).integrate_reference())
                    .collect()
            })
            .collect(),
    )
}

fn component_coords(fields: &[VectorPolynomial], deg: i32) -> Vec<QMatrix> {
    let m = monomials(3, deg).len();
    let coords = field_coordinates(fields, deg);
    (0..3)
        .map(|a| QMatrix::from_rows(coords.iter().map(|c| c[a * m..(a + 1) * m].to_vec()).collect()))
        .collect()
}

/// `out[a][b]_ij = int f_i,a g_j,b` on the reference tetrahedron.
fn component_moments(f: &[VectorPolynomial], df: i32, g: &[VectorPolynomial], dg: i32) -> Vec<Vec<QMatrix>> {
    let q = monomial_gram(df, dg);
    let cf = component_coords(f, df);
    let cg = component_coords(g, dg);
    let cq: Vec<QMatrix> = cf.iter().map(|c| c.mul(&q)).collect();
    let cgt: Vec<QMatrix> = cg.iter().map(QMatrix::transpose).collect();
    (0..3).map(|a| (0..3).map(|b| cq[a].mul(&cgt[b])).collect()).collect()
}

fn symmetric_moments(f: &[VectorPolynomial], deg: i32) -> Vec<Vec<QMatrix>> {
    let q = monomial_gram(deg, deg);
    let c = component_coords(f, deg);
    let cq: Vec<QMatrix> = c.iter().map(|x| x.mul(&q)).collect();
    let mut out = vec![vec![QMatrix::zeros(0, 0); 3]; 3];
    for a in 0..3 {
        for b in a..3 {
            let g = cq[a].mul(&c[b].transpose());
            out[b][a] = g.transpose();
            out[a][b] = g;
        }
    }
    out
}

/// Cached reference moment matrices for degree `p`.
pub fn reference_matrices(p: usize) -> Arc<ReferenceMatrices> {
    static C: OnceLock<Mutex<HashMap<usize, Arc<ReferenceMatrices>>>> = OnceLock::new();
    let cache = C.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().unwrap().get(&p) {
        return r.clone();
    }
    let w1 = reference_space(SpaceKind::W1, p);
    let curls: Vec<_> = w1.basis.iter().map(curl).collect();
    let r = Arc::new(ReferenceMatrices {
        p,
        mass: symmetric_moments(&w1.basis, p as i32 + 1),
        stiff: symmetric_moments(&curls, p as i32),
    });
    cache.lock().unwrap().insert(p, r.clone());
    r
}

fn weighted_sum(parts: &[Vec<QMatrix>], k: &QMatrix, scale: &Rational) -> QMatrix {
    let mut out = QMatrix::zeros(parts[0][0].nrows(), parts[0][0].ncols());
    for a in 0..3 {
        for b in 0..3 {
            let c = &k[(a, b)] * scale;
            if !c.is_zero() {
                out = out.add(&parts[a][b].scale(&c));
            }
        }
    }
    out
}

/// Exact element matrices `(stiffness, mass)` on `tet` in its dual basis.
pub fn element_matrices(tet: &Simplex, p: usize, mat: &Material) -> (QMatrix, QMatrix) {
    let r = reference_matrices(p);
    let j = tet.jacobian();
    let jinv = j.inverse().expect("nondegenerate");
    let det = tet.det_jacobian().abs();
    let k = jinv.mul(&tensor_matrix(&mat.eps)).mul(&jinv.transpose());
    let muinv = tensor_matrix(&mat.mu).inverse().expect("SPD");
    let l = j.transpose().mul(&muinv).mul(&j);
    (weighted_sum(&r.stiff, &l, &det.recip()), weighted_sum(&r.mass, &k, &det))
}

/// Global system in floating point.
pub struct System {
    pub dofmap: GlobalDofMap,
    pub stiffness: DMatrix<f64>,
    pub mass: DMatrix<f64>,
}

fn element_list(mesh: &Mesh, p: usize, spec: &MaterialSpec) -> Result<Vec<(QMatrix, QMatrix)>, AssemblyError> {
    spec.validate()?;
    let mats: Vec<&Material> = (0..mesh.num_tets()).map(|t| spec.region(mesh, t)).collect::<Result<_, _>>()?;
    reference_matrices(p);
    Ok((0..mesh.num_tets())
        .into_par_iter()
        .map(|t| element_matrices(&mesh.simplex(t), p, mats[t]))
        .collect())
}

fn scatter(dm: &GlobalDofMap, elems: &[(QMatrix, QMatrix)], mut add: impl FnMut(usize, usize, usize, &Rational, &Rational)) {
    for (t, (a, m)) in elems.iter().enumerate() {
        let loc = &dm.local[t];
        for (i, gi) in loc.iter().enumerate() {
            let Some((gi, si)) = gi else { continue };
            for (j, gj) in loc.iter().enumerate() {
                let Some((gj, sj)) = gj else { continue };
                let s = (*si as i64) * (*sj as i64);
                if s > 0 {
                    add(*gi, *gj, t, &a[(i, j)], &m[(i, j)]);
                } else {
                    add(*gi, *gj, t, &-&a[(i, j)], &-&m[(i, j)]);
                }
            }
        }
    }
}

/// Stiffness and mass matrices, element matrices exact and converted once.
pub fn assemble(mesh: &Mesh, p: usize, spec: &MaterialSpec, bc: BoundaryCondition) -> Result<System, AssemblyError> {
    let dofmap = GlobalDofMap::new(mesh, SpaceKind::W1, p, bc);
    let elems = element_list(mesh, p, spec)?;
    let n = dofmap.n_dofs;
    let mut stiffness = DMatrix::zeros(n, n);
    let mut mass = DMatrix::zeros(n, n);
    scatter(&dofmap, &elems, |i, j, _, a, m| {
        stiffness[(i, j)] += a.to_f64();
        mass[(i, j)] += m.to_f64();
    });
    if mass.clone().cholesky().is_none() && n > 0 {
        return Err(AssemblyError::MassNotSpd);
    }
    Ok(System { dofmap, stiffness, mass })
}

/// Exact dense `(stiffness, mass)`; intended for small meshes.
pub fn assemble_exact(mesh: &Mesh, p: usize, spec: &MaterialSpec, bc: BoundaryCondition) -> Result<(QMatrix, QMatrix, GlobalDofMap), AssemblyError> {
    let dofmap = GlobalDofMap::new(mesh, SpaceKind::W1, p, bc);
    let elems = element_list(mesh, p, spec)?;
    let n = dofmap.n_dofs;
    let mut a = QMatrix::zeros(n, n);
    let mut m = QMatrix::zeros(n, n);
    scatter(&dofmap, &elems, |i, j, _, x, y| {
        a[(i, j)] += x;
        m[(i, j)] += y;
    });
    Ok((a, m, dofmap))
}

/// `W1` coordinates of the gradients of the global scalar basis of `P_{p+1}`.
/// Gradients commute with the covariant transport, so the local matrix is
/// the same on every element.
pub fn discrete_gradient(mesh: &Mesh, p: usize, bc: BoundaryCondition) -> (QMatrix, GlobalDofMap, GlobalDofMap) {
    let sdm = GlobalDofMap::new(mesh, SpaceKind::Scalar, p, bc);
    let wdm = GlobalDofMap::new(mesh, SpaceKind::W1, p, bc);
    let s = reference_space(SpaceKind::Scalar, p);
    let w = reference_space(SpaceKind::W1, p);
    let local: Vec<Vec<Rational>> = s.basis.iter().map(|b| w.coordinates(&grad(b.comp(0)))).collect();
    let mut g = QMatrix::zeros(wdm.n_dofs, sdm.n_dofs);
    for t in 0..mesh.num_tets() {
        for (j, sj) in sdm.local[t].iter().enumerate() {
            let Some((gj, _)) = sj else { continue };
            for (i, wi) in wdm.local[t].iter().enumerate() {
                let Some((gi, _)) = wi else { continue };
                g[(*gi, *gj)] = local[j][i].clone();
            }
        }
    }
    (g, sdm, wdm)
}

/// Gradient probes of `P_{q+1}`: the coupling `B_ij = int eps phi_i . grad psi_j`
/// with the `W1_p` basis and the probe energies `int eps |grad psi_j|^2`.
pub struct ProbeMatrices {
    pub coupling: DMatrix<f64>,
    pub energies: Vec<f64>,
    pub probes: GlobalDofMap,
}

pub fn gradient_probes(mesh: &Mesh, p: usize, q: usize, spec: &MaterialSpec, bc: BoundaryCondition) -> Result<ProbeMatrices, AssemblyError> {
    spec.validate()?;
    let w1 = reference_space(SpaceKind::W1, p);
    let s = reference_space(SpaceKind::Scalar, q);
    let grads: Vec<VectorPolynomial> = s.basis.iter().map(|b| grad(b.comp(0))).collect();
    let mixed = component_moments(&w1.basis, p as i32 + 1, &grads, q as i32 + 1);
    let probe = symmetric_moments(&grads, q as i32 + 1);
    let wdm = GlobalDofMap::new(mesh, SpaceKind::W1, p, bc);
    let sdm = GlobalDofMap::new(mesh, SpaceKind::Scalar, q, bc);
    let mut coupling = DMatrix::zeros(wdm.n_dofs, sdm.n_dofs);
    let mut energies = vec![0.0; sdm.n_dofs];
    for t in 0..mesh.num_tets() {
        let tet = mesh.simplex(t);
        let mat = spec.region(mesh, t)?;
        let jinv = tet.jacobian().inverse().expect("nondegenerate");
        let k = jinv.mul(&tensor_matrix(&mat.eps)).mul(&jinv.transpose());
        let det = tet.det_jacobian().abs();
        let b = weighted_sum(&mixed, &k, &det);
        let e = weighted_sum(&probe, &k, &det);
        for (j, sj) in sdm.local[t].iter().enumerate() {
            let Some((gj, _)) = sj else { continue };
            energies[*gj] += e[(j, j)].to_f64();
            for (i, wi) in wdm.local[t].iter().enumerate() {
                let Some((gi, _)) = wi else { continue };
                coupling[(*gi, *gj)] += b[(i, j)].to_f64();
            }
        }
    }
    Ok(ProbeMatrices { coupling, energies, probes: sdm })
}

/// Coordinate text format: one `row col value` line per nonzero.
pub fn to_coo(m: &DMatrix<f64>) -> String {
    let mut s = String::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if v != 0.0 {
                writeln!(s, "{i} {j} {v:e}").unwrap();
            }
        }
    }
    s
}
