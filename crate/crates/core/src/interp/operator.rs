//! The local interpolation operators `Pi0`, `Pi1`, `Pi2`.
//!
//! Each operator is a cascade of groups (vertices or Whitney forms, edges,
//! faces, cell). A group reads moments of the current residual on its facets,
//! projects, lifts and extends them, and subtracts the result. All moments
//! are linear in the input, so the residual moments are the input moments
//! minus the exactly known moments of the corrections. The groups are
//! assembled once per element as rational matrices acting on the moment
//! vector; polynomial inputs are processed exactly, callable inputs through
//! the composite matrix in floating point.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use thiserror::Error;

use super::lifting::{lift_l1_edge, lift_l2_cell, lift_l2_face, lift_l3_cell, LiftError};
use super::projection::{legendre_coefficients, shifted_legendre, EdgeProjector, InnerProductSpec, ProjectionError};
use crate::localspace::{
    build_scalar, build_w1, cell_zero_mean, build_w2, cell_bubbles, extend_1form_face, extend_scalar_edge,
    extend_scalar_face, face_bubbles, face_zero_mean, whitney1, whitney2, LocalSpace, SpaceError,
    Facet,
};
use crate::polycore::linalg::independent_subset;
use crate::polycore::quadrature::{points_for_degree, tet_rule, triangle_rule};
use crate::polycore::simplex::{dot, MomentTable, edge_trace, face_flux, face_trace, grad_chart, sub, TET_EDGES, TET_FACES};
use crate::polycore::{curl, div, grad, Polynomial, QMatrix, Rational, Simplex, VectorPolynomial};
use crate::localspace::field_coordinates;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InterpError {
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error(transparent)]
    Lift(#[from] LiftError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("form degree must be 0, 1 or 2")]
    BadLevel,
    #[error("elements disagree on the shared coefficient {dof}")]
    Inconsistent { dof: usize },
}

pub type Closure = Arc<dyn Fn(&[f64; 3]) -> Vec<f64> + Send + Sync>;

/// A smooth field given pointwise, with its exterior derivative
/// (gradient for scalars, curl for 1-forms, divergence for 2-forms).
#[derive(Clone)]
pub struct CallableField {
    pub value: Closure,
    pub derivative: Closure,
    /// Polynomial degree the quadrature rules integrate exactly.
    pub order: usize,
}

impl CallableField {
    pub fn new(
        value: impl Fn(&[f64; 3]) -> Vec<f64> + Send + Sync + 'static,
        derivative: impl Fn(&[f64; 3]) -> Vec<f64> + Send + Sync + 'static,
        order: usize,
    ) -> Self {
        CallableField {
            value: Arc::new(value),
            derivative: Arc::new(derivative),
            order,
        }
    }
}

/// Argument of an interpolation operator.
#[derive(Clone)]
pub enum IntegrableField {
    Exact(VectorPolynomial),
    Callable(CallableField),
}

static FAULT: AtomicBool = AtomicBool::new(false);

/// Test hook: flips the sign of the scalar edge lifting inside `Pi0`.
#[doc(hidden)]
pub fn set_fault_injection(on: bool) {
    FAULT.store(on, Ordering::SeqCst);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Src {
    Value,
    Derivative,
}

#[derive(Clone, Debug)]
enum Block {
    Vertex(usize),
    Edge { e: usize, n: usize, src: Src },
    FaceFlux { f: usize, tests: Vec<Polynomial>, src: Src },
    FaceTangent { f: usize, tests: Vec<VectorPolynomial>, src: Src },
    CellVec { tests: Vec<VectorPolynomial>, src: Src },
    CellScalar { tests: Vec<Polynomial>, src: Src },
}

impl Block {
    fn len(&self) -> usize {
        match self {
            Block::Vertex(_) => 1,
            Block::Edge { n, .. } => n + 1,
            Block::FaceFlux { tests, .. } | Block::CellScalar { tests, .. } => tests.len(),
            Block::FaceTangent { tests, .. } | Block::CellVec { tests, .. } => tests.len(),
        }
    }
}

/// One stage of the cascade.
#[derive(Clone, Debug)]
pub struct Group {
    pub name: &'static str,
    idx: Vec<usize>,
    z: QMatrix,
}

/// Stage-by-stage result for an exact input.
#[derive(Clone, Debug)]
pub struct InterpolationBreakdown {
    /// Names of the stages, in order.
    pub names: Vec<&'static str>,
    /// Corrections `w^(i)`.
    pub corrections: Vec<VectorPolynomial>,
    /// Residuals `u^(i) = u - w^(0) - ... - w^(i)`.
    pub residuals: Vec<VectorPolynomial>,
}

#[derive(Clone, Debug)]
pub struct Interpolant {
    /// Coordinates in the dual basis of the target space.
    pub coeffs: Vec<Rational>,
    pub field: VectorPolynomial,
    pub breakdown: InterpolationBreakdown,
}

/// `Pi^l_{T,p}` assembled for one element.
pub struct LocalInterpolator {
    pub level: usize,
    pub p: usize,
    pub ip: InnerProductSpec,
    pub space: LocalSpace,
    blocks: Vec<Block>,
    total: usize,
    groups: Vec<Group>,
    dmat: QMatrix,
    composite: OnceLock<QMatrix>,
    moments: Mutex<Arc<MomentTable>>,
}

struct Layout {
    blocks: Vec<Block>,
    offsets: Vec<usize>,
    total: usize,
}

impl Layout {
    fn new() -> Self {
        Layout {
            blocks: Vec::new(),
            offsets: Vec::new(),
            total: 0,
        }
    }

    fn add(&mut self, b: Block) -> Vec<usize> {
        let start = self.total;
        self.total += b.len();
        self.offsets.push(start);
        self.blocks.push(b);
        (start..self.total).collect()
    }
}

fn coords(space: &LocalSpace, u: &VectorPolynomial) -> Result<Vec<Rational>, InterpError> {
    Ok(space.coordinates_checked(u)?)
}

fn scalar_field(p: Polynomial) -> VectorPolynomial {
    VectorPolynomial::new(vec![p])
}

/// Place `cols` (each of height `n`) as a dense matrix.
fn cols_matrix(cols: &[Vec<Rational>], n: usize) -> QMatrix {
    QMatrix::from_cols(cols, n)
}

/// `Y * G^{-1}` for the Gram matrix of an `L2`-type projection.
fn with_gram(y: QMatrix, gram: &QMatrix) -> QMatrix {
    if gram.nrows() == 0 {
        return y;
    }
    y.mul(&gram.inverse().expect("Gram matrix is regular"))
}

fn gram<T>(tests: &[T], range: &[T], ip: impl Fn(&T, &T) -> Rational) -> QMatrix {
    let rows: Vec<Vec<Rational>> = tests.iter().map(|a| range.iter().map(|b| ip(a, b)).collect()).collect();
    if rows.is_empty() {
        return QMatrix::zeros(0, 0);
    }
    QMatrix::from_rows(rows)
}

fn hstack_all(mats: Vec<QMatrix>, n: usize) -> QMatrix {
    mats.into_iter().fold(QMatrix::zeros(n, 0), |acc, m| acc.hstack(&m))
}

fn face_points(tet: &Simplex, f: usize) -> [Vec<Rational>; 3] {
    let [a, b, c] = TET_FACES[f];
    [tet.vertex(a).clone(), tet.vertex(b).clone(), tet.vertex(c).clone()]
}

/// Inverse metric of the face chart.
fn face_metric_inverse(tet: &Simplex, f: usize) -> Vec<Vec<Rational>> {
    let [a, b, c] = face_points(tet, f);
    let e1 = sub(&b, &a);
    let e2 = sub(&c, &a);
    let g = QMatrix::from_rows(vec![
        vec![dot(&e1, &e1), dot(&e1, &e2)],
        vec![dot(&e2, &e1), dot(&e2, &e2)],
    ]);
    g.inverse().expect("nondegenerate face").rows_vec()
}

/// Basis of `curl W1_p(T)` restricted to zero tangential trace.
fn curl_zero_trace_basis(w1: &LocalSpace) -> Vec<VectorPolynomial> {
    let curls: Vec<VectorPolynomial> = w1.basis[w1.block(Facet::Cell)].iter().map(curl).collect();
    if curls.is_empty() {
        return curls;
    }
    let c = field_coordinates(&curls, w1.p as i32);
    independent_subset(&c).into_iter().map(|i| curls[i].clone()).collect()
}

fn l2_cell_vec(m: &MomentTable) -> impl Fn(&VectorPolynomial, &VectorPolynomial) -> Rational + '_ {
    move |a, b| m.integrate_dot(a, b)
}

impl LocalInterpolator {
    fn build(level: usize, tet: &Simplex, p: usize, ip: InnerProductSpec, fault: bool) -> Result<Self, InterpError> {
        let mut lay = Layout::new();
        let mut groups = Vec::new();
        let space = match level {
            0 => build_scalar(tet, p),
            1 => build_w1(tet, p),
            2 => build_w2(tet, p),
            _ => return Err(InterpError::BadLevel),
        };
        let n = space.dim();
        let w1 = if level == 1 { space.clone() } else { build_w1(tet, p) };
        let ep = EdgeProjector::new(p, &ip);
        let nleg = ep.n_data() - 1;
        let lam = tet.barycentric();
        let moments = MomentTable::new(tet, 2 * p + 4);

        // Edge lifting images of P~_1..P~_p, extended into T.
        let edge_images = |e: usize| -> Result<Vec<Polynomial>, InterpError> {
            (1..=p)
                .map(|j| Ok(extend_scalar_edge(&lift_l1_edge(&shifted_legendre(j))?, tet, e)?))
                .collect()
        };

        match level {
            0 => {
                let mut idx = Vec::new();
                let mut cols = Vec::new();
                for (i, l) in lam.iter().enumerate() {
                    idx.extend(lay.add(Block::Vertex(i)));
                    cols.push(coords(&space, &scalar_field(l.clone()))?);
                }
                groups.push(Group { name: "vertex", idx, z: cols_matrix(&cols, n) });

                let mut idx = Vec::new();
                let mut zs = Vec::new();
                for e in 0..6 {
                    idx.extend(lay.add(Block::Edge { e, n: nleg, src: Src::Derivative }));
                    let y: Vec<Vec<Rational>> = edge_images(e)?
                        .into_iter()
                        .map(|q| coords(&space, &scalar_field(q)))
                        .collect::<Result<_, _>>()?;
                    let mut z = cols_matrix(&y, n).mul(&ep.matrix);
                    if fault {
                        z = z.scale(&-Rational::ONE);
                    }
                    zs.push(z);
                }
                groups.push(Group { name: "edge", idx, z: hstack_all(zs, n) });

                let bub = face_bubbles(p + 1);
                if !bub.is_empty() {
                    let mut idx = Vec::new();
                    let mut zs = Vec::new();
                    for f in 0..4 {
                        let (tests, g) = face_tangent_tests(tet, f, &bub);
                        idx.extend(lay.add(Block::FaceTangent { f, tests, src: Src::Derivative }));
                        let y: Vec<Vec<Rational>> = bub
                            .iter()
                            .map(|b| Ok(coords(&space, &scalar_field(extend_scalar_face(b, tet, f)?))?))
                            .collect::<Result<_, InterpError>>()?;
                        zs.push(with_gram(cols_matrix(&y, n), &g));
                    }
                    groups.push(Group { name: "face", idx, z: hstack_all(zs, n) });
                }

                let cb = cell_bubbles(tet, p + 1);
                if !cb.is_empty() {
                    let gb: Vec<VectorPolynomial> = cb.iter().map(grad).collect();
                    let g = gram(&gb, &gb, l2_cell_vec(&moments));
                    let idx = lay.add(Block::CellVec { tests: gb, src: Src::Derivative });
                    let y: Vec<Vec<Rational>> =
                        cb.iter().map(|b| coords(&space, &scalar_field(b.clone()))).collect::<Result<_, _>>()?;
                    groups.push(Group { name: "cell", idx, z: with_gram(cols_matrix(&y, n), &g) });
                }
            }
            1 => {
                let mut edge_idx = Vec::new();
                let mut whitney_idx = Vec::new();
                let mut wcols = Vec::new();
                for e in 0..6 {
                    let r = lay.add(Block::Edge { e, n: nleg, src: Src::Value });
                    whitney_idx.push(r[0]);
                    edge_idx.push(r);
                    wcols.push(coords(&space, &whitney1(tet, e))?);
                }
                groups.push(Group { name: "whitney", idx: whitney_idx, z: cols_matrix(&wcols, n) });

                if p > 0 {
                    let mut zs = Vec::new();
                    for e in 0..6 {
                        let y: Vec<Vec<Rational>> = edge_images(e)?
                            .into_iter()
                            .map(|q| coords(&space, &grad(&q)))
                            .collect::<Result<_, _>>()?;
                        zs.push(cols_matrix(&y, n).mul(&ep.matrix));
                    }
                    groups.push(Group { name: "edge", idx: edge_idx.concat(), z: hstack_all(zs, n) });
                }

                let zm = face_zero_mean(p);
                if !zm.is_empty() {
                    let g = gram(&zm, &zm, |a, b| (a * b).integrate_reference());
                    let mut idx = Vec::new();
                    let mut zs = Vec::new();
                    for f in 0..4 {
                        idx.extend(lay.add(Block::FaceFlux { f, tests: zm.clone(), src: Src::Derivative }));
                        let y: Vec<Vec<Rational>> = zm
                            .iter()
                            .map(|r| Ok(coords(&space, &extend_1form_face(&lift_l2_face(r)?, &space, f)?)?))
                            .collect::<Result<_, InterpError>>()?;
                        zs.push(with_gram(cols_matrix(&y, n), &g));
                    }
                    groups.push(Group { name: "face_rot", idx, z: hstack_all(zs, n) });
                }

                let bub = face_bubbles(p + 1);
                if !bub.is_empty() {
                    let mut idx = Vec::new();
                    let mut zs = Vec::new();
                    for f in 0..4 {
                        let (tests, g) = face_tangent_tests(tet, f, &bub);
                        idx.extend(lay.add(Block::FaceTangent { f, tests, src: Src::Value }));
                        let y: Vec<Vec<Rational>> = bub
                            .iter()
                            .map(|b| Ok(coords(&space, &grad(&extend_scalar_face(b, tet, f)?))?))
                            .collect::<Result<_, InterpError>>()?;
                        zs.push(with_gram(cols_matrix(&y, n), &g));
                    }
                    groups.push(Group { name: "face_grad", idx, z: hstack_all(zs, n) });
                }

                let cz = curl_zero_trace_basis(&space);
                if !cz.is_empty() {
                    let g = gram(&cz, &cz, l2_cell_vec(&moments));
                    let y: Vec<Vec<Rational>> = cz
                        .iter()
                        .map(|c| Ok(coords(&space, &lift_l2_cell(&space, c)?)?))
                        .collect::<Result<_, InterpError>>()?;
                    let idx = lay.add(Block::CellVec { tests: cz, src: Src::Derivative });
                    groups.push(Group { name: "cell_curl", idx, z: with_gram(cols_matrix(&y, n), &g) });
                }

                let cb = cell_bubbles(tet, p + 1);
                if !cb.is_empty() {
                    let gb: Vec<VectorPolynomial> = cb.iter().map(grad).collect();
                    let g = gram(&gb, &gb, l2_cell_vec(&moments));
                    let y: Vec<Vec<Rational>> = gb.iter().map(|b| coords(&space, b)).collect::<Result<_, _>>()?;
                    let idx = lay.add(Block::CellVec { tests: gb, src: Src::Value });
                    groups.push(Group { name: "cell_grad", idx, z: with_gram(cols_matrix(&y, n), &g) });
                }
            }
            2 => {
                let zm = face_zero_mean(p);
                let mut tests = vec![Polynomial::one(2)];
                tests.extend(zm.iter().cloned());
                let mut whitney_idx = Vec::new();
                let mut face_idx = Vec::new();
                let mut wcols = Vec::new();
                for f in 0..4 {
                    let r = lay.add(Block::FaceFlux { f, tests: tests.clone(), src: Src::Value });
                    whitney_idx.push(r[0]);
                    face_idx.extend_from_slice(&r[1..]);
                    wcols.push(coords(&space, &whitney2(tet, f))?);
                }
                groups.push(Group { name: "whitney", idx: whitney_idx, z: cols_matrix(&wcols, n) });

                if !zm.is_empty() {
                    let g = gram(&zm, &zm, |a, b| (a * b).integrate_reference());
                    let mut zs = Vec::new();
                    for f in 0..4 {
                        let y: Vec<Vec<Rational>> = zm
                            .iter()
                            .map(|r| Ok(coords(&space, &curl(&extend_1form_face(&lift_l2_face(r)?, &w1, f)?))?))
                            .collect::<Result<_, InterpError>>()?;
                        zs.push(with_gram(cols_matrix(&y, n), &g));
                    }
                    groups.push(Group { name: "face", idx: face_idx, z: hstack_all(zs, n) });
                }

                let czm = cell_zero_mean(tet, p);
                if !czm.is_empty() {
                    let g = gram(&czm, &czm, |a, b| moments.integrate_product(a, b));
                    let y: Vec<Vec<Rational>> = czm
                        .iter()
                        .map(|r| Ok(coords(&space, &lift_l3_cell(&w1, r)?)?))
                        .collect::<Result<_, InterpError>>()?;
                    let idx = lay.add(Block::CellScalar { tests: czm, src: Src::Derivative });
                    groups.push(Group { name: "cell_div", idx, z: with_gram(cols_matrix(&y, n), &g) });
                }

                let cz = curl_zero_trace_basis(&w1);
                if !cz.is_empty() {
                    let g = gram(&cz, &cz, l2_cell_vec(&moments));
                    let y: Vec<Vec<Rational>> = cz.iter().map(|c| coords(&space, c)).collect::<Result<_, _>>()?;
                    let idx = lay.add(Block::CellVec { tests: cz, src: Src::Value });
                    groups.push(Group { name: "cell_curl", idx, z: with_gram(cols_matrix(&y, n), &g) });
                }
            }
            _ => unreachable!(),
        }

        let mut op = LocalInterpolator {
            level,
            p,
            ip,
            space,
            blocks: lay.blocks,
            total: lay.total,
            groups,
            dmat: QMatrix::zeros(0, 0),
            composite: OnceLock::new(),
            moments: Mutex::new(Arc::new(moments)),
        };
        let cols: Vec<Vec<Rational>> = op
            .space
            .basis
            .iter()
            .map(|b| op.data_exact(b))
            .collect::<Result<_, _>>()?;
        op.dmat = QMatrix::from_cols(&cols, op.total);
        Ok(op)
    }

    /// Monomial moments of the element up to at least degree `deg`.
    fn moments(&self, deg: usize) -> Arc<MomentTable> {
        let mut m = self.moments.lock().unwrap();
        if m.max_degree() < deg {
            *m = Arc::new(MomentTable::new(&self.space.tet, deg));
        }
        m.clone()
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn data_len(&self) -> usize {
        self.total
    }

    fn source_exact(&self, u: &VectorPolynomial, src: Src) -> VectorPolynomial {
        match src {
            Src::Value => u.clone(),
            Src::Derivative => match self.level {
                0 => grad(u.comp(0)),
                1 => curl(u),
                _ => VectorPolynomial::new(vec![div(u)]),
            },
        }
    }

    /// Moment vector of a polynomial field.
    pub fn data_exact(&self, u: &VectorPolynomial) -> Result<Vec<Rational>, InterpError> {
        let tet = &self.space.tet;
        let moments = self.moments(u.degree().max(0) as usize + self.p + 2);
        let mut out = Vec::with_capacity(self.total);
        let mut cache: HashMap<bool, VectorPolynomial> = HashMap::new();
        let mut source = |src: Src| -> VectorPolynomial {
            cache
                .entry(src == Src::Derivative)
                .or_insert_with(|| self.source_exact(u, src))
                .clone()
        };
        for b in &self.blocks {
            match b {
                Block::Vertex(i) => out.push(u.comp(0).eval(tet.vertex(*i))),
                Block::Edge { e, n, src } => {
                    let [a, c] = TET_EDGES[*e];
                    let g = edge_trace(&source(*src), tet.vertex(a), tet.vertex(c));
                    if self.ip.epsilon(self.p).is_some() && g.degree() > *n as i32 {
                        return Err(ProjectionError::DegreeTooHigh { degree: g.degree(), max: *n }.into());
                    }
                    out.extend(legendre_coefficients(&g, *n));
                }
                Block::FaceFlux { f, tests, src } => {
                    let [a, bb, c] = face_points(tet, *f);
                    let rho = face_flux(&source(*src), &a, &bb, &c);
                    out.extend(tests.iter().map(|t| (t * &rho).integrate_reference()));
                }
                Block::FaceTangent { f, tests, src } => {
                    let [a, bb, c] = face_points(tet, *f);
                    let tr = face_trace(&source(*src), &a, &bb, &c);
                    out.extend(tests.iter().map(|t| t.dot(&tr).integrate_reference()));
                }
                Block::CellVec { tests, src } => {
                    let s = source(*src);
                    out.extend(tests.iter().map(|t| moments.integrate_dot(t, &s)));
                }
                Block::CellScalar { tests, src } => {
                    let s = source(*src);
                    out.extend(tests.iter().map(|t| moments.integrate_product(t, s.comp(0))));
                }
            }
        }
        Ok(out)
    }

    /// Moment vector of a callable field by quadrature.
    pub fn data_f64(&self, u: &CallableField) -> Vec<f64> {
        let tet = self.space.tet.to_f64();
        let mut out = Vec::with_capacity(self.total);
        let pick = |src: Src, x: &[f64; 3]| -> Vec<f64> {
            match src {
                Src::Value => (u.value)(x),
                Src::Derivative => (u.derivative)(x),
            }
        };
        let tri = triangle_rule(points_for_degree(u.order + self.p + 2));
        let tetq = tet_rule(points_for_degree(u.order + self.p + 2));
        for b in &self.blocks {
            match b {
                Block::Vertex(i) => {
                    let v = &tet[*i];
                    out.push((u.value)(&[v[0], v[1], v[2]])[0]);
                }
                Block::Edge { e, n, src } => {
                    let [a, c] = TET_EDGES[*e];
                    let (pa, pc) = (&tet[a], &tet[c]);
                    let t = [pc[0] - pa[0], pc[1] - pa[1], pc[2] - pa[2]];
                    let g = |xi: f64| {
                        let x = [pa[0] + xi * t[0], pa[1] + xi * t[1], pa[2] + xi * t[2]];
                        let v = pick(*src, &x);
                        v[0] * t[0] + v[1] * t[1] + v[2] * t[2]
                    };
                    out.extend(super::projection::legendre_coefficients_f64(
                        g,
                        *n,
                        points_for_degree(u.order + n),
                    ));
                }
                Block::FaceFlux { f, tests, src } => {
                    let (o, e1, e2) = face_frame(&tet, *f);
                    let nrm = cross3(&e1, &e2);
                    let vals: Vec<(f64, f64, f64)> = tri
                        .iter()
                        .map(|&([s, t], w)| {
                            let x = chart_point(&o, &e1, &e2, s, t);
                            let v = pick(*src, &x);
                            (s, t, w * (v[0] * nrm[0] + v[1] * nrm[1] + v[2] * nrm[2]))
                        })
                        .collect();
                    for q in tests {
                        out.push(vals.iter().map(|(s, t, r)| r * q.eval_f64(&[*s, *t])).sum());
                    }
                }
                Block::FaceTangent { f, tests, src } => {
                    let (o, e1, e2) = face_frame(&tet, *f);
                    let vals: Vec<(f64, f64, f64, f64)> = tri
                        .iter()
                        .map(|&([s, t], w)| {
                            let x = chart_point(&o, &e1, &e2, s, t);
                            let v = pick(*src, &x);
                            (s, t, w * dot3(&v, &e1), w * dot3(&v, &e2))
                        })
                        .collect();
                    for q in tests {
                        out.push(
                            vals.iter()
                                .map(|(s, t, a0, a1)| {
                                    let qv = q.eval_f64(&[*s, *t]);
                                    a0 * qv[0] + a1 * qv[1]
                                })
                                .sum(),
                        );
                    }
                }
                Block::CellVec { tests, src } => {
                    let (pts, wts) = cell_points(&tet, &tetq);
                    let vals: Vec<Vec<f64>> = pts.iter().map(|x| pick(*src, x)).collect();
                    for q in tests {
                        out.push(
                            pts.iter()
                                .zip(&wts)
                                .zip(&vals)
                                .map(|((x, w), v)| w * dot3(&q.eval_f64(x), v))
                                .sum(),
                        );
                    }
                }
                Block::CellScalar { tests, src } => {
                    let (pts, wts) = cell_points(&tet, &tetq);
                    let vals: Vec<f64> = pts.iter().map(|x| pick(*src, x)[0]).collect();
                    for q in tests {
                        out.push(pts.iter().zip(&wts).zip(&vals).map(|((x, w), v)| w * q.eval_f64(x) * v).sum());
                    }
                }
            }
        }
        out
    }

    /// Run the cascade on a moment vector; returns the coefficients and the
    /// per-stage corrections.
    pub fn run(&self, d: &[Rational]) -> (Vec<Rational>, Vec<Vec<Rational>>) {
        let n = self.space.dim();
        let mut c = vec![Rational::ZERO; n];
        let mut stages = Vec::with_capacity(self.groups.len());
        for g in &self.groups {
            let dsel = self.dmat.select_rows(&g.idx);
            let known = dsel.mul_vec(&c);
            let r: Vec<Rational> = g.idx.iter().zip(&known).map(|(&i, k)| &d[i] - k).collect();
            let w = g.z.mul_vec(&r);
            for (ci, wi) in c.iter_mut().zip(&w) {
                *ci += wi;
            }
            stages.push(w);
        }
        (c, stages)
    }

    /// The operator as a matrix from moments to coefficients.
    pub fn composite(&self) -> &QMatrix {
        self.composite.get_or_init(|| {
            let n = self.space.dim();
            let mut c = QMatrix::zeros(n, self.total);
            for g in &self.groups {
                let dsel = self.dmat.select_rows(&g.idx);
                let mut sel = QMatrix::zeros(g.idx.len(), self.total);
                for (r, &i) in g.idx.iter().enumerate() {
                    sel[(r, i)] = Rational::ONE;
                }
                let r = sel.sub(&dsel.mul(&c));
                c = c.add(&g.z.mul(&r));
            }
            c
        })
    }

    pub fn composite_f64(&self) -> DMatrix<f64> {
        self.composite().to_f64()
    }

    /// Exact interpolation of a polynomial field.
    pub fn apply_exact(&self, u: &VectorPolynomial) -> Result<Interpolant, InterpError> {
        let d = self.data_exact(u)?;
        let (coeffs, stages) = self.run(&d);
        let field = self.space.combine(&coeffs);
        let mut residual = u.clone();
        let mut corrections = Vec::new();
        let mut residuals = Vec::new();
        for s in &stages {
            let w = self.space.combine(s);
            residual = &residual - &w;
            corrections.push(w);
            residuals.push(residual.clone());
        }
        Ok(Interpolant {
            coeffs,
            field,
            breakdown: InterpolationBreakdown {
                names: self.groups.iter().map(|g| g.name).collect(),
                corrections,
                residuals,
            },
        })
    }

    /// Floating-point interpolation of a callable field.
    pub fn apply_f64(&self, u: &CallableField) -> Vec<f64> {
        let d = nalgebra::DVector::from_vec(self.data_f64(u));
        let c = self.composite_f64() * d;
        c.iter().copied().collect()
    }

    /// Interpolate either kind of input into floating coefficients.
    pub fn apply(&self, u: &IntegrableField) -> Result<Vec<f64>, InterpError> {
        match u {
            IntegrableField::Exact(p) => Ok(self.apply_exact(p)?.coeffs.iter().map(Rational::to_f64).collect()),
            IntegrableField::Callable(c) => Ok(self.apply_f64(c)),
        }
    }
}

/// Tests `G^{-1} grad b` and their Gram matrix for the face projection
/// onto chart gradients of face bubbles.
fn face_tangent_tests(tet: &Simplex, f: usize, bub: &[Polynomial]) -> (Vec<VectorPolynomial>, QMatrix) {
    let ginv = face_metric_inverse(tet, f);
    let grads: Vec<VectorPolynomial> = bub.iter().map(grad_chart).collect();
    let tests: Vec<VectorPolynomial> = grads.iter().map(|g| g.apply_matrix(&ginv)).collect();
    let gm = gram(&tests, &grads, |a, b| a.dot(b).integrate_reference());
    (tests, gm)
}

fn face_frame(tet: &[Vec<f64>], f: usize) -> ([f64; 3], [f64; 3], [f64; 3]) {
    let [a, b, c] = TET_FACES[f];
    let o = [tet[a][0], tet[a][1], tet[a][2]];
    let e1 = [tet[b][0] - o[0], tet[b][1] - o[1], tet[b][2] - o[2]];
    let e2 = [tet[c][0] - o[0], tet[c][1] - o[1], tet[c][2] - o[2]];
    (o, e1, e2)
}

fn chart_point(o: &[f64; 3], e1: &[f64; 3], e2: &[f64; 3], s: f64, t: f64) -> [f64; 3] {
    [o[0] + s * e1[0] + t * e2[0], o[1] + s * e1[1] + t * e2[1], o[2] + s * e1[2] + t * e2[2]]
}

fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot3(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Physical quadrature points and weights on a tetrahedron.
pub fn cell_points(tet: &[Vec<f64>], rule: &[([f64; 3], f64)]) -> (Vec<[f64; 3]>, Vec<f64>) {
    let o = &tet[0];
    let e: Vec<[f64; 3]> = (1..4).map(|i| [tet[i][0] - o[0], tet[i][1] - o[1], tet[i][2] - o[2]]).collect();
    let det = dot3(&e[0], &cross3(&e[1], &e[2])).abs();
    let pts = rule
        .iter()
        .map(|(y, _)| {
            let mut x = [o[0], o[1], o[2]];
            for k in 0..3 {
                for (j, ej) in e.iter().enumerate() {
                    x[k] += y[j] * ej[k];
                }
            }
            x
        })
        .collect();
    let wts = rule.iter().map(|(_, w)| w * det).collect();
    (pts, wts)
}

type Key = (usize, usize, u64, bool, Vec<Vec<Rational>>);

fn cache() -> &'static Mutex<HashMap<Key, Arc<LocalInterpolator>>> {
    static C: OnceLock<Mutex<HashMap<Key, Arc<LocalInterpolator>>>> = OnceLock::new();
    C.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Cached interpolation operator of form degree `level` on `tet`.
pub fn interpolator(level: usize, tet: &Simplex, p: usize, ip: &InnerProductSpec) -> Result<Arc<LocalInterpolator>, InterpError> {
    let fault = level == 0 && FAULT.load(Ordering::SeqCst);
    let key = (level, p, ip.key(p), fault, tet.vertices().to_vec());
    if let Some(op) = cache().lock().unwrap().get(&key) {
        return Ok(op.clone());
    }
    let op = Arc::new(LocalInterpolator::build(level, tet, p, *ip, fault)?);
    cache().lock().unwrap().insert(key, op.clone());
    Ok(op)
}

/// `Pi0_{T,p} u` in `P_{p+1}(T)`.
pub fn pi0(tet: &Simplex, p: usize, u: &Polynomial, ip: &InnerProductSpec) -> Result<Polynomial, InterpError> {
    let op = interpolator(0, tet, p, ip)?;
    Ok(op.apply_exact(&scalar_field(u.clone()))?.field.comp(0).clone())
}

/// `Pi1_{T,p} u` in `W1_p(T)`.
pub fn pi1(tet: &Simplex, p: usize, u: &VectorPolynomial, ip: &InnerProductSpec) -> Result<VectorPolynomial, InterpError> {
    Ok(interpolator(1, tet, p, ip)?.apply_exact(u)?.field)
}

/// `Pi2_{T,p} u` in `W2_p(T)`.
pub fn pi2(tet: &Simplex, p: usize, u: &VectorPolynomial, ip: &InnerProductSpec) -> Result<VectorPolynomial, InterpError> {
    Ok(interpolator(2, tet, p, ip)?.apply_exact(u)?.field)
}
