//! Local spaces on a tetrahedron: the scalar space `P_{p+1}(T)`, the edge
//! element space `W1_p(T)` and the face element space `W2_p(T)`, their moment
//! degrees of freedom, dual bases, Whitney forms, trace spaces and the
//! barycentric extension operators.
//!
//! Degrees of freedom are moments against monomials in facet chart
//! coordinates, so they commute with affine pullbacks. Dual bases are
//! computed once on the reference tetrahedron and transported with the
//! appropriate Piola map.

use std::collections::HashMap;
use std::ops::Range;
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;
use thiserror::Error;

use crate::poincare::{lift_d, lift_r, lift_r2d, Anchor};
use crate::polycore::linalg::{independent_subset, QMatrix};
use crate::polycore::poly::{
    homogeneous_monomials, monomials, poly_space_dim, rotate90, total_degree, Exponent,
};
use crate::polycore::simplex::{
    chart_edge_restrict, chart_edge_trace, edge_trace, face_flux, face_trace, restrict_edge,
    restrict_face, sub, TET_EDGES, TET_FACES,
};
use crate::polycore::{div, grad, Polynomial, Rational, Simplex, VectorPolynomial};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpaceError {
    #[error("spanning set has rank {got}, expected {expected}")]
    RankDeficient { got: usize, expected: usize },
    #[error("degree-of-freedom matrix is singular")]
    NotUnisolvent,
    #[error("input does not vanish on the facet boundary")]
    NonzeroBoundaryTrace,
    #[error("field is not contained in the target space")]
    NotInSpace,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum SpaceKind {
    /// `P_{p+1}(T)`
    Scalar,
    W1,
    W2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Facet {
    Vertex(usize),
    Edge(usize),
    Face(usize),
    Cell,
}

/// A single moment functional.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DofFunctional {
    pub space: SpaceKind,
    pub facet: Facet,
    /// Exponent of the test monomial in facet chart coordinates.
    pub exponent: Exponent,
    /// Chart component the monomial multiplies (0 for scalar moments).
    pub component: usize,
}

pub fn dim_w1(p: i32) -> usize {
    if p < 0 {
        return 0;
    }
    let p = p as usize;
    (p + 1) * (p + 3) * (p + 4) / 2
}

pub fn dim_w2(p: i32) -> usize {
    if p < 0 {
        return 0;
    }
    let p = p as usize;
    (p + 1) * (p + 2) * (p + 4) / 2
}

/// `int_0^1 xi^k g(xi) dxi`.
pub fn moment_1d(g: &Polynomial, k: u8) -> Rational {
    g.terms()
        .map(|(e, c)| c / Rational::from_integer(e[0] as i64 + k as i64 + 1))
        .sum()
}

/// `int_ref y^a g(y) dy` over the reference simplex of `g.dim()`.
pub fn moment_ref(g: &Polynomial, a: &Exponent) -> Rational {
    let d = g.dim() as u32;
    g.terms()
        .map(|(e, c)| {
            let mut num = Rational::ONE;
            for i in 0..g.dim() {
                num *= crate::polycore::rational::factorial((e[i] + a[i]) as u32);
            }
            c * &(num / crate::polycore::rational::factorial(total_degree(e) + total_degree(a) + d))
        })
        .sum()
}

/// The moment functionals of a space, in canonical order: vertices, edges,
/// faces, cell; monomials lexicographic; components innermost.
pub fn dofs(space: SpaceKind, p: usize) -> Vec<DofFunctional> {
    let mut out = Vec::new();
    let push = |out: &mut Vec<DofFunctional>, facet, dim, deg: i32, ncomp: usize| {
        for e in monomials(dim, deg) {
            for c in 0..ncomp {
                out.push(DofFunctional {
                    space,
                    facet,
                    exponent: e,
                    component: c,
                });
            }
        }
    };
    let p = p as i32;
    match space {
        SpaceKind::Scalar => {
            for v in 0..4 {
                out.push(DofFunctional {
                    space,
                    facet: Facet::Vertex(v),
                    exponent: [0; 3],
                    component: 0,
                });
            }
            (0..6).for_each(|e| push(&mut out, Facet::Edge(e), 1, p - 1, 1));
            (0..4).for_each(|f| push(&mut out, Facet::Face(f), 2, p - 2, 1));
            push(&mut out, Facet::Cell, 3, p - 3, 1);
        }
        SpaceKind::W1 => {
            (0..6).for_each(|e| push(&mut out, Facet::Edge(e), 1, p, 1));
            (0..4).for_each(|f| push(&mut out, Facet::Face(f), 2, p - 1, 2));
            push(&mut out, Facet::Cell, 3, p - 2, 3);
        }
        SpaceKind::W2 => {
            (0..4).for_each(|f| push(&mut out, Facet::Face(f), 2, p, 1));
            push(&mut out, Facet::Cell, 3, p - 1, 3);
        }
    }
    out
}

/// Contiguous dof ranges per facet.
pub fn facet_partition(dofs: &[DofFunctional]) -> Vec<(Facet, Range<usize>)> {
    let mut out: Vec<(Facet, Range<usize>)> = Vec::new();
    for (i, d) in dofs.iter().enumerate() {
        match out.last_mut() {
            Some((f, r)) if *f == d.facet => r.end = i + 1,
            _ => out.push((d.facet, i..i + 1)),
        }
    }
    out
}

/// Cell moment integrand components: covariant `J^T u(F)` for 1-forms,
/// contravariant `adj(J) u(F)` for 2-forms.
fn cell_pullback(space: SpaceKind, tet: &Simplex, u: &VectorPolynomial) -> Vec<Polynomial> {
    let (o, cols) = tet.chart();
    let uf = u.compose_affine(&o, &cols);
    match space {
        SpaceKind::W1 => cols.iter().map(|c| uf.dot_const(c)).collect(),
        SpaceKind::W2 => {
            let adj = adjugate(&cols);
            (0..3).map(|m| uf.dot_const(&adj[m])).collect()
        }
        SpaceKind::Scalar => vec![uf.comp(0).clone()],
    }
}

/// Rows of `adj(J)` where `J` has the given columns.
fn adjugate(cols: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    use crate::polycore::simplex::cross;
    // adj(J) = det(J) J^{-1}; its rows are the cross products of pairs of columns.
    vec![
        cross(&cols[1], &cols[2]),
        cross(&cols[2], &cols[0]),
        cross(&cols[0], &cols[1]),
    ]
}

/// All dof values of `u` (scalar fields are one-component vectors).
pub fn dof_values(space: SpaceKind, p: usize, tet: &Simplex, u: &VectorPolynomial) -> Vec<Rational> {
    let v = tet.vertices();
    let pi = p as i32;
    let mut out = Vec::new();
    match space {
        SpaceKind::Scalar => {
            let s = u.comp(0);
            for x in v {
                out.push(s.eval(x));
            }
            for [a, b] in TET_EDGES {
                let g = restrict_edge(s, &v[a], &v[b]);
                for e in monomials(1, pi - 1) {
                    out.push(moment_1d(&g, e[0]));
                }
            }
            for [a, b, c] in TET_FACES {
                let g = restrict_face(s, &v[a], &v[b], &v[c]);
                for e in monomials(2, pi - 2) {
                    out.push(moment_ref(&g, &e));
                }
            }
            if pi >= 3 {
                let g = cell_pullback(space, tet, u);
                for e in monomials(3, pi - 3) {
                    out.push(moment_ref(&g[0], &e));
                }
            }
        }
        SpaceKind::W1 => {
            for [a, b] in TET_EDGES {
                let g = edge_trace(u, &v[a], &v[b]);
                for e in monomials(1, pi) {
                    out.push(moment_1d(&g, e[0]));
                }
            }
            if pi >= 1 {
                for [a, b, c] in TET_FACES {
                    let g = face_trace(u, &v[a], &v[b], &v[c]);
                    for e in monomials(2, pi - 1) {
                        for k in 0..2 {
                            out.push(moment_ref(g.comp(k), &e));
                        }
                    }
                }
            }
            if pi >= 2 {
                let g = cell_pullback(space, tet, u);
                for e in monomials(3, pi - 2) {
                    for gm in &g {
                        out.push(moment_ref(gm, &e));
                    }
                }
            }
        }
        SpaceKind::W2 => {
            for [a, b, c] in TET_FACES {
                let g = face_flux(u, &v[a], &v[b], &v[c]);
                for e in monomials(2, pi) {
                    out.push(moment_ref(&g, &e));
                }
            }
            if pi >= 1 {
                let g = cell_pullback(space, tet, u);
                for e in monomials(3, pi - 1) {
                    for gm in &g {
                        out.push(moment_ref(gm, &e));
                    }
                }
            }
        }
    }
    out
}

/// Evaluate one functional.
pub fn apply_dof(k: &DofFunctional, tet: &Simplex, u: &VectorPolynomial) -> Rational {
    let v = tet.vertices();
    match (k.space, k.facet) {
        (SpaceKind::Scalar, Facet::Vertex(i)) => u.comp(0).eval(&v[i]),
        (SpaceKind::Scalar, Facet::Edge(e)) => {
            let [a, b] = TET_EDGES[e];
            moment_1d(&restrict_edge(u.comp(0), &v[a], &v[b]), k.exponent[0])
        }
        (SpaceKind::Scalar, Facet::Face(f)) => {
            let [a, b, c] = TET_FACES[f];
            moment_ref(&restrict_face(u.comp(0), &v[a], &v[b], &v[c]), &k.exponent)
        }
        (SpaceKind::W1, Facet::Edge(e)) => {
            let [a, b] = TET_EDGES[e];
            moment_1d(&edge_trace(u, &v[a], &v[b]), k.exponent[0])
        }
        (SpaceKind::W1, Facet::Face(f)) => {
            let [a, b, c] = TET_FACES[f];
            moment_ref(face_trace(u, &v[a], &v[b], &v[c]).comp(k.component), &k.exponent)
        }
        (SpaceKind::W2, Facet::Face(f)) => {
            let [a, b, c] = TET_FACES[f];
            moment_ref(&face_flux(u, &v[a], &v[b], &v[c]), &k.exponent)
        }
        (space, Facet::Cell) => moment_ref(&cell_pullback(space, tet, u)[k.component], &k.exponent),
        _ => panic!("functional {k:?} does not exist"),
    }
}

/// Coefficient vectors of fields with respect to a fixed monomial index.
pub fn field_coordinates(fields: &[VectorPolynomial], max_degree: i32) -> Vec<Vec<Rational>> {
    let Some(first) = fields.first() else {
        return Vec::new();
    };
    let (dim, n) = (first.dim(), first.len());
    let index = monomials(dim, max_degree);
    fields
        .iter()
        .map(|f| {
            assert!(f.degree() <= max_degree, "field exceeds coordinate degree");
            let mut v = Vec::with_capacity(n * index.len());
            for c in f.comps() {
                v.extend(index.iter().map(|e| c.coeff(e)));
            }
            v
        })
        .collect()
}

/// Rebuild a field from coordinates produced by [`field_coordinates`].
pub fn field_from_coordinates(coords: &[Rational], dim: usize, ncomp: usize, max_degree: i32) -> VectorPolynomial {
    let index = monomials(dim, max_degree);
    VectorPolynomial::new(
        (0..ncomp)
            .map(|c| {
                Polynomial::from_terms(
                    dim,
                    index.iter().zip(&coords[c * index.len()..]).map(|(e, v)| (*e, v.clone())),
                )
            })
            .collect(),
    )
}

/// Coordinates of `fields` in an independent `basis` (columns of the result).
pub fn expand_in_basis(basis: &[VectorPolynomial], fields: &[VectorPolynomial]) -> Result<QMatrix, SpaceError> {
    let deg = basis.iter().chain(fields).map(VectorPolynomial::degree).max().unwrap_or(0).max(0);
    let b = field_coordinates(basis, deg);
    let f = field_coordinates(fields, deg);
    let rows = b.first().or(f.first()).map_or(0, Vec::len);
    QMatrix::from_cols(&b, rows)
        .solve_columns(&QMatrix::from_cols(&f, rows))
        .ok_or(SpaceError::NotInSpace)
}

fn independent_fields(fields: Vec<VectorPolynomial>, max_degree: i32) -> Vec<VectorPolynomial> {
    let coords = field_coordinates(&fields, max_degree);
    let keep = independent_subset(&coords);
    keep.into_iter().map(|i| fields[i].clone()).collect()
}

pub fn vector_monomials(dim: usize, ncomp: usize, p: i32) -> Vec<VectorPolynomial> {
    let mut out = Vec::new();
    for c in 0..ncomp {
        for e in monomials(dim, p) {
            out.push(VectorPolynomial::unit(Polynomial::monomial(dim, e, Rational::ONE), ncomp, c));
        }
    }
    out
}

/// Basis of homogeneous degree-`p` divergence-free 3D fields.
pub fn homogeneous_div_free(p: usize) -> Vec<VectorPolynomial> {
    let mut fields = Vec::new();
    for c in 0..3 {
        for e in homogeneous_monomials(3, p as u32) {
            fields.push(VectorPolynomial::unit(Polynomial::monomial(3, e, Rational::ONE), 3, c));
        }
    }
    let divs: Vec<VectorPolynomial> = fields.iter().map(|f| VectorPolynomial::new(vec![div(f)])).collect();
    let dcoords = field_coordinates(&divs, p as i32);
    if dcoords.is_empty() || dcoords[0].is_empty() {
        return fields;
    }
    let m = QMatrix::from_cols(&dcoords, dcoords[0].len());
    m.nullspace()
        .into_iter()
        .map(|w| {
            VectorPolynomial::combine(3, 3, w.iter().zip(&fields).filter(|(c, _)| !c.is_zero()))
        })
        .collect()
}

/// Spanning set of `W1_p` built from `P_p^3` and `R_a` of homogeneous
/// divergence-free fields, reduced to a basis.
pub fn w1_spanning_basis(p: usize, anchor: &Anchor) -> Result<Vec<VectorPolynomial>, SpaceError> {
    let mut fields = vector_monomials(3, 3, p as i32);
    fields.extend(homogeneous_div_free(p).iter().map(|u| lift_r(u, anchor)));
    let basis = independent_fields(fields, p as i32 + 1);
    let expected = dim_w1(p as i32);
    if basis.len() != expected {
        return Err(SpaceError::RankDeficient {
            got: basis.len(),
            expected,
        });
    }
    Ok(basis)
}

/// Spanning set of `W2_p` built from `P_p^3` and `D_a` of homogeneous scalars.
pub fn w2_spanning_basis(p: usize, anchor: &Anchor) -> Result<Vec<VectorPolynomial>, SpaceError> {
    let mut fields = vector_monomials(3, 3, p as i32);
    for e in homogeneous_monomials(3, p as u32) {
        fields.push(lift_d(&Polynomial::monomial(3, e, Rational::ONE), anchor));
    }
    let basis = independent_fields(fields, p as i32 + 1);
    let expected = dim_w2(p as i32);
    if basis.len() != expected {
        return Err(SpaceError::RankDeficient {
            got: basis.len(),
            expected,
        });
    }
    Ok(basis)
}

/// An ordered basis of a local space that is dual to its moment functionals.
#[derive(Clone, Debug)]
pub struct LocalSpace {
    pub kind: SpaceKind,
    pub p: usize,
    pub tet: Simplex,
    pub basis: Vec<VectorPolynomial>,
    pub dofs: Vec<DofFunctional>,
    pub facet_partition: Vec<(Facet, Range<usize>)>,
}

impl LocalSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Indices of the basis functions attached to a facet.
    pub fn block(&self, facet: Facet) -> Range<usize> {
        self.facet_partition
            .iter()
            .find(|(f, _)| *f == facet)
            .map(|(_, r)| r.clone())
            .unwrap_or(0..0)
    }

    /// Coordinates of a field of this space (its dof values).
    pub fn coordinates(&self, u: &VectorPolynomial) -> Vec<Rational> {
        dof_values(self.kind, self.p, &self.tet, u)
    }

    /// Coordinates, failing if `u` is not in the space.
    pub fn coordinates_checked(&self, u: &VectorPolynomial) -> Result<Vec<Rational>, SpaceError> {
        let c = self.coordinates(u);
        if &self.combine(&c) == u {
            Ok(c)
        } else {
            Err(SpaceError::NotInSpace)
        }
    }

    pub fn combine(&self, coeffs: &[Rational]) -> VectorPolynomial {
        assert_eq!(coeffs.len(), self.dim());
        let ncomp = self.basis[0].len();
        VectorPolynomial::combine(
            3,
            ncomp,
            coeffs.iter().zip(&self.basis).filter(|(c, _)| !c.is_zero()),
        )
    }

    /// Scalar members as polynomials.
    pub fn scalar(&self, i: usize) -> &Polynomial {
        self.basis[i].comp(0)
    }
}

/// Dual basis to the dofs within the span of `spanning` (which must be a basis).
pub fn dual_basis(
    space: SpaceKind,
    p: usize,
    tet: &Simplex,
    spanning: &[VectorPolynomial],
) -> Result<Vec<VectorPolynomial>, SpaceError> {
    let n = spanning.len();
    let cols: Vec<Vec<Rational>> = spanning.iter().map(|s| dof_values(space, p, tet, s)).collect();
    if cols.iter().any(|c| c.len() != n) {
        return Err(SpaceError::NotUnisolvent);
    }
    let v = QMatrix::from_cols(&cols, n);
    let vinv = v.inverse().ok_or(SpaceError::NotUnisolvent)?;
    let ncomp = spanning[0].len();
    Ok((0..n)
        .map(|j| {
            let c = vinv.col(j);
            VectorPolynomial::combine(3, ncomp, c.iter().zip(spanning).filter(|(c, _)| !c.is_zero()))
        })
        .collect())
}

/// The generalized Vandermonde matrix `V_ij = kappa_i(s_j)`.
pub fn dof_matrix(space: SpaceKind, p: usize, tet: &Simplex, spanning: &[VectorPolynomial]) -> QMatrix {
    let cols: Vec<Vec<Rational>> = spanning.iter().map(|s| dof_values(space, p, tet, s)).collect();
    QMatrix::from_cols(&cols, cols.first().map_or(0, Vec::len))
}

type Cache = Mutex<HashMap<(SpaceKind, usize), Arc<LocalSpace>>>;

fn cache() -> &'static Cache {
    static C: OnceLock<Cache> = OnceLock::new();
    C.get_or_init(|| Mutex::new(HashMap::new()))
}

fn build_reference(kind: SpaceKind, p: usize) -> Result<LocalSpace, SpaceError> {
    let tet = Simplex::reference(3);
    let anchor = Anchor::origin(3);
    let spanning = match kind {
        SpaceKind::W1 => w1_spanning_basis(p, &anchor)?,
        SpaceKind::W2 => w2_spanning_basis(p, &anchor)?,
        SpaceKind::Scalar => vector_monomials(3, 1, p as i32 + 1),
    };
    let basis = dual_basis(kind, p, &tet, &spanning)?;
    let d = dofs(kind, p);
    let facet_partition = facet_partition(&d);
    Ok(LocalSpace {
        kind,
        p,
        tet,
        basis,
        dofs: d,
        facet_partition,
    })
}

/// Dual basis on the reference tetrahedron (cached).
pub fn reference_space(kind: SpaceKind, p: usize) -> Arc<LocalSpace> {
    if let Some(s) = cache().lock().unwrap().get(&(kind, p)) {
        return s.clone();
    }
    let s = Arc::new(build_reference(kind, p).expect("reference space construction"));
    cache().lock().unwrap().insert((kind, p), s.clone());
    s
}

/// Transport a reference field to `tet`: identity for scalars, covariant Piola
/// for 1-forms, contravariant Piola for 2-forms.
pub fn push_forward(kind: SpaceKind, tet: &Simplex, u: &VectorPolynomial) -> VectorPolynomial {
    let jinv = tet.jacobian().inverse().expect("nondegenerate");
    let v0 = tet.vertex(0);
    let origin: Vec<Rational> = jinv.mul_vec(v0).iter().map(|x| -x).collect();
    let cols: Vec<Vec<Rational>> = (0..3).map(|j| jinv.col(j)).collect();
    let ux = u.compose_affine(&origin, &cols);
    match kind {
        SpaceKind::Scalar => ux,
        SpaceKind::W1 => ux.apply_matrix(&jinv.transpose().rows_vec()),
        SpaceKind::W2 => {
            let j = tet.jacobian();
            let det = tet.det_jacobian();
            ux.apply_matrix(&j.scale(&det.recip()).rows_vec())
        }
    }
}

fn build_physical(kind: SpaceKind, tet: &Simplex, p: usize) -> LocalSpace {
    let r = reference_space(kind, p);
    if *tet == r.tet {
        return (*r).clone();
    }
    LocalSpace {
        kind,
        p,
        tet: tet.clone(),
        basis: r.basis.iter().map(|b| push_forward(kind, tet, b)).collect(),
        dofs: r.dofs.clone(),
        facet_partition: r.facet_partition.clone(),
    }
}

/// `W1_p(T)` with the basis dual to its moment dofs.
pub fn build_w1(tet: &Simplex, p: usize) -> LocalSpace {
    build_physical(SpaceKind::W1, tet, p)
}

/// `W2_p(T)` with the basis dual to its moment dofs.
pub fn build_w2(tet: &Simplex, p: usize) -> LocalSpace {
    build_physical(SpaceKind::W2, tet, p)
}

/// `P_{p+1}(T)` with the basis dual to vertex values and facet moments.
pub fn build_scalar(tet: &Simplex, p: usize) -> LocalSpace {
    build_physical(SpaceKind::Scalar, tet, p)
}

/// Whitney 1-form of local edge `e = (i, j)`: `l_i grad l_j - l_j grad l_i`.
pub fn whitney1(tet: &Simplex, e: usize) -> VectorPolynomial {
    let l = tet.barycentric();
    let [i, j] = TET_EDGES[e];
    &grad(&l[j]).scale_by_poly(&l[i]) - &grad(&l[i]).scale_by_poly(&l[j])
}

/// Whitney 2-form of local face `f = (i, j, k)`, scaled to unit flux.
pub fn whitney2(tet: &Simplex, f: usize) -> VectorPolynomial {
    let l = tet.barycentric();
    let g: Vec<VectorPolynomial> = l.iter().map(grad).collect();
    let [i, j, k] = TET_FACES[f];
    let t1 = g[j].cross(&g[k]).scale_by_poly(&l[i]);
    let t2 = g[k].cross(&g[i]).scale_by_poly(&l[j]);
    let t3 = g[i].cross(&g[j]).scale_by_poly(&l[k]);
    (&(&t1 + &t2) + &t3).scale(&Rational::from_integer(2))
}

/// Homogenize `phi(xi)` on edge `e` of `tet` in the barycentric coordinates of
/// its endpoints; vanishes on every other edge.
pub fn extend_scalar_edge(phi: &Polynomial, tet: &Simplex, e: usize) -> Result<Polynomial, SpaceError> {
    assert_eq!(phi.dim(), 1);
    let zero = Rational::ZERO;
    if !phi.eval(&[zero]).is_zero() || !phi.eval(&[Rational::ONE]).is_zero() {
        return Err(SpaceError::NonzeroBoundaryTrace);
    }
    if phi.is_zero() {
        return Ok(Polynomial::zero(3));
    }
    let l = tet.barycentric();
    let [a, b] = TET_EDGES[e];
    let n = phi.degree() as u32;
    let sum = &l[a] + &l[b];
    let mut out = Polynomial::zero(3);
    for (ex, c) in phi.terms() {
        let k = ex[0] as u32;
        let t = &l[b].pow(k) * &sum.pow(n - k);
        out.axpy(c, &t);
    }
    Ok(out)
}

/// Homogenize `phi(s, t)` on face `f = (A, B, C)` in `(l_A, l_B, l_C)`;
/// vanishes on every other face.
pub fn extend_scalar_face(phi: &Polynomial, tet: &Simplex, f: usize) -> Result<Polynomial, SpaceError> {
    assert_eq!(phi.dim(), 2);
    if (0..3).any(|k| !chart_edge_restrict(phi, k).is_zero()) {
        return Err(SpaceError::NonzeroBoundaryTrace);
    }
    if phi.is_zero() {
        return Ok(Polynomial::zero(3));
    }
    let l = tet.barycentric();
    let [a, b, c] = TET_FACES[f];
    let n = phi.degree() as u32;
    let sum = &(&l[a] + &l[b]) + &l[c];
    let mut out = Polynomial::zero(3);
    for (ex, coef) in phi.terms() {
        let (i, j) = (ex[0] as u32, ex[1] as u32);
        let t = &(&l[b].pow(i) * &l[c].pow(j)) * &sum.pow(n - i - j);
        out.axpy(coef, &t);
    }
    Ok(out)
}

/// Face-dof values of a chart 1-form on face `f` (same functionals as the
/// face block of [`dofs`]).
pub fn face_moments_1form(a: &VectorPolynomial, p: usize) -> Vec<Rational> {
    let mut out = Vec::new();
    for e in monomials(2, p as i32 - 1) {
        for k in 0..2 {
            out.push(moment_ref(a.comp(k), &e));
        }
    }
    out
}

/// Extend a chart 1-form with vanishing boundary trace on face `f` to
/// `W1_p(T)`: tangential trace `a` on `f`, zero on the other faces.
pub fn extend_1form_face(a: &VectorPolynomial, space: &LocalSpace, f: usize) -> Result<VectorPolynomial, SpaceError> {
    assert_eq!(space.kind, SpaceKind::W1);
    if (0..3).any(|k| !chart_edge_trace(a, k).is_zero()) {
        return Err(SpaceError::NonzeroBoundaryTrace);
    }
    let m = face_moments_1form(a, space.p);
    let block = space.block(Facet::Face(f));
    assert_eq!(m.len(), block.len());
    Ok(VectorPolynomial::combine(
        3,
        3,
        m.iter().zip(&space.basis[block]).filter(|(c, _)| !c.is_zero()),
    ))
}

/// Facet trace spaces and their zero-trace subspaces, as bases in chart
/// coordinates (edge: 1 variable, face: 2 variables) or on `T`.
#[derive(Clone, Debug)]
pub struct TraceSpace {
    pub facet: Facet,
    pub p: usize,
    pub zero_trace: bool,
    pub basis: Vec<VectorPolynomial>,
}

impl TraceSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

fn scalars(v: Vec<Polynomial>) -> Vec<VectorPolynomial> {
    v.into_iter().map(|p| VectorPolynomial::new(vec![p])).collect()
}

fn nullspace_combinations(
    fields: &[VectorPolynomial],
    constraints: impl Fn(&VectorPolynomial) -> Vec<VectorPolynomial>,
    max_degree: i32,
) -> Vec<VectorPolynomial> {
    if fields.is_empty() {
        return Vec::new();
    }
    let images: Vec<Vec<Rational>> = fields
        .iter()
        .map(|f| {
            constraints(f)
                .iter()
                .flat_map(|c| field_coordinates(std::slice::from_ref(c), max_degree).remove(0))
                .collect()
        })
        .collect();
    let rows = images[0].len();
    let (dim, n) = (fields[0].dim(), fields[0].len());
    if rows == 0 {
        return fields.to_vec();
    }
    QMatrix::from_cols(&images, rows)
        .nullspace()
        .into_iter()
        .map(|w| VectorPolynomial::combine(dim, n, w.iter().zip(fields).filter(|(c, _)| !c.is_zero())))
        .collect()
}

/// `P_n` on an edge chart.
pub fn scalar_edge_space(n: i32) -> Vec<Polynomial> {
    monomials(1, n).into_iter().map(|e| Polynomial::monomial(1, e, Rational::ONE)).collect()
}

/// `P_n` on a face chart.
pub fn scalar_face_space(n: i32) -> Vec<Polynomial> {
    monomials(2, n).into_iter().map(|e| Polynomial::monomial(2, e, Rational::ONE)).collect()
}

/// Edge bubbles `xi (1 - xi) xi^k` spanning the zero-trace part of `P_n(e)`.
pub fn edge_bubbles(n: usize) -> Vec<Polynomial> {
    let xi = Polynomial::var(1, 0);
    let b = &xi * &(&Polynomial::one(1) - &xi);
    (0..n.saturating_sub(1)).map(|k| &b * &xi.pow(k as u32)).collect()
}

/// Face bubbles `s t (1 - s - t) s^i t^j` spanning the zero-trace part of `P_n(f)`.
pub fn face_bubbles(n: usize) -> Vec<Polynomial> {
    let s = Polynomial::var(2, 0);
    let t = Polynomial::var(2, 1);
    let b = &(&s * &t) * &(&(&Polynomial::one(2) - &s) - &t);
    monomials(2, n as i32 - 3)
        .into_iter()
        .map(|e| &b * &Polynomial::monomial(2, e, Rational::ONE))
        .collect()
}

/// Cell bubbles `l0 l1 l2 l3 l1^a l2^b l3^c` spanning the zero-trace part of `P_n(T)`.
pub fn cell_bubbles(tet: &Simplex, n: usize) -> Vec<Polynomial> {
    let l = tet.barycentric();
    let b = &(&l[0] * &l[1]) * &(&l[2] * &l[3]);
    monomials(3, n as i32 - 4)
        .into_iter()
        .map(|e| &(&(&b * &l[1].pow(e[0] as u32)) * &l[2].pow(e[1] as u32)) * &l[3].pow(e[2] as u32))
        .collect()
}

/// Chart 2D Nedelec space `W1_p(f) = P_p^2 + rot90(R2D_0 of homogeneous P_p)`.
pub fn w1_face_space(p: usize) -> Vec<VectorPolynomial> {
    let mut fields = vector_monomials(2, 2, p as i32);
    for e in homogeneous_monomials(2, p as u32) {
        fields.push(rotate90(&lift_r2d(&Polynomial::monomial(2, e, Rational::ONE), &Anchor::origin(2))));
    }
    independent_fields(fields, p as i32 + 1)
}

/// `W1_p(f)` members with zero tangential trace on the boundary edges.
pub fn w1_face_zero_trace(p: usize) -> Vec<VectorPolynomial> {
    nullspace_combinations(
        &w1_face_space(p),
        |a| (0..3).map(|k| VectorPolynomial::new(vec![chart_edge_trace(a, k)])).collect(),
        p as i32 + 1,
    )
}

/// Zero-mean `P_p` on an edge chart.
pub fn edge_zero_mean(p: usize) -> Vec<Polynomial> {
    nullspace_combinations(
        &scalars(scalar_edge_space(p as i32)),
        |g| vec![VectorPolynomial::new(vec![Polynomial::constant(1, moment_1d(g.comp(0), 0))])],
        0,
    )
    .into_iter()
    .map(|v| v.comp(0).clone())
    .collect()
}

/// Zero-mean `P_p` on a face chart.
pub fn face_zero_mean(p: usize) -> Vec<Polynomial> {
    nullspace_combinations(
        &scalars(scalar_face_space(p as i32)),
        |g| vec![VectorPolynomial::new(vec![Polynomial::constant(2, g.comp(0).integrate_reference())])],
        0,
    )
    .into_iter()
    .map(|v| v.comp(0).clone())
    .collect()
}

/// Zero-mean basis of `P_p(T)`.
pub fn cell_zero_mean(tet: &Simplex, p: usize) -> Vec<Polynomial> {
    let l = tet.barycentric();
    let vol = tet.volume();
    monomials(3, p as i32)
        .into_iter()
        .filter(|e| e.iter().any(|&k| k > 0))
        .map(|e| {
            let m = &(&l[1].pow(e[0] as u32) * &l[2].pow(e[1] as u32)) * &l[3].pow(e[2] as u32);
            let mean = tet.integrate(&m) / vol.clone();
            &m - &Polynomial::constant(3, mean)
        })
        .collect()
}

/// `W1_p(T)` members with vanishing tangential trace on all faces.
pub fn w1_cell_zero_trace(space: &LocalSpace) -> Vec<VectorPolynomial> {
    assert_eq!(space.kind, SpaceKind::W1);
    let v = space.tet.vertices().to_vec();
    nullspace_combinations(
        &space.basis,
        |u| {
            TET_FACES
                .iter()
                .flat_map(|[a, b, c]| face_trace(u, &v[*a], &v[*b], &v[*c]).comps().to_vec())
                .map(|c| VectorPolynomial::new(vec![c]))
                .collect()
        },
        space.p as i32 + 1,
    )
}

/// `W2_p(T)` members with vanishing normal trace on all faces.
pub fn w2_cell_zero_trace(space: &LocalSpace) -> Vec<VectorPolynomial> {
    assert_eq!(space.kind, SpaceKind::W2);
    let v = space.tet.vertices().to_vec();
    nullspace_combinations(
        &space.basis,
        |u| {
            TET_FACES
                .iter()
                .map(|[a, b, c]| VectorPolynomial::new(vec![face_flux(u, &v[*a], &v[*b], &v[*c])]))
                .collect()
        },
        space.p as i32 + 1,
    )
}

/// Builders for the trace spaces: `level` 1 for 1-forms, 2 for 2-forms.
pub fn zero_trace_subspace(facet: Facet, level: usize, p: usize, space: Option<&LocalSpace>) -> TraceSpace {
    let basis = match (facet, level) {
        (Facet::Edge(_), 0) => scalars(edge_bubbles(p + 1)),
        (Facet::Face(_), 0) => scalars(face_bubbles(p + 1)),
        (Facet::Cell, 0) => scalars(cell_bubbles(&space.expect("cell space").tet, p + 1)),
        (Facet::Edge(_), 1) => scalars(edge_zero_mean(p)),
        (Facet::Face(_), 1) => w1_face_zero_trace(p),
        (Facet::Face(_), 2) => scalars(face_zero_mean(p)),
        (Facet::Cell, 1) => w1_cell_zero_trace(space.expect("W1 space")),
        (Facet::Cell, 2) => w2_cell_zero_trace(space.expect("W2 space")),
        _ => panic!("no zero-trace space for {facet:?} at level {level}"),
    };
    TraceSpace {
        facet,
        p,
        zero_trace: true,
        basis,
    }
}

/// Full trace spaces `W1_p(e) = P_p(e)`, `W1_p(f)` and `W2_p(f) = P_p(f)`.
pub fn trace_space(facet: Facet, level: usize, p: usize) -> TraceSpace {
    let basis = match (facet, level) {
        (Facet::Edge(_), 1) => scalars(scalar_edge_space(p as i32)),
        (Facet::Face(_), 1) => w1_face_space(p),
        (Facet::Face(_), 2) => scalars(scalar_face_space(p as i32)),
        _ => panic!("no trace space for {facet:?} at level {level}"),
    };
    TraceSpace {
        facet,
        p,
        zero_trace: false,
        basis,
    }
}

/// Dimension of `P_n` on a `dim`-simplex.
pub fn dim_p(dim: usize, n: i32) -> usize {
    poly_space_dim(dim, n)
}

/// Vertices of `tet` for local edge `e`.
pub fn edge_points(tet: &Simplex, e: usize) -> (Vec<Rational>, Vec<Rational>) {
    let [a, b] = TET_EDGES[e];
    (tet.vertex(a).clone(), tet.vertex(b).clone())
}

/// Tangent vector `Q - P` of local edge `e`.
pub fn edge_vector(tet: &Simplex, e: usize) -> Vec<Rational> {
    let (a, b) = edge_points(tet, e);
    sub(&b, &a)
}
