//! Right inverses of the differential operators on zero-trace spaces.

use thiserror::Error;

use crate::localspace::{
    cell_bubbles, expand_in_basis, extend_1form_face, face_bubbles, LocalSpace, SpaceError, SpaceKind,
};
use crate::poincare::{lift_d, lift_r, lift_r2d, Anchor};
use crate::polycore::poly::rotate90;
use crate::polycore::simplex::{
    chart_edge_trace, face_flux, face_trace, grad_chart, TET_FACES,
};
use crate::polycore::{grad, Polynomial, Rational, Simplex, VectorPolynomial};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LiftError {
    #[error("input is not in the range of the differential operator")]
    OutsideRange,
    #[error("input does not have zero mean")]
    NonzeroMean,
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// `L1_e`: the antiderivative vanishing at both endpoints of `[0, 1]`.
pub fn lift_l1_edge(v: &Polynomial) -> Result<Polynomial, LiftError> {
    assert_eq!(v.dim(), 1);
    let mut g = Polynomial::zero(1);
    for (e, c) in v.terms() {
        g.add_term([e[0] + 1, 0, 0], c / Rational::from_integer(e[0] as i64 + 1));
    }
    if !g.eval(&[Rational::ONE]).is_zero() {
        return Err(LiftError::NonzeroMean);
    }
    Ok(g)
}

/// `L1_f`: the face bubble whose chart gradient is `a`.
pub fn lift_l1_face(a: &VectorPolynomial, n: usize) -> Result<Polynomial, LiftError> {
    let bubbles = face_bubbles(n);
    if a.is_zero() {
        return Ok(Polynomial::zero(2));
    }
    let grads: Vec<VectorPolynomial> = bubbles.iter().map(grad_chart).collect();
    let c = expand_in_basis(&grads, std::slice::from_ref(a)).map_err(|_| LiftError::OutsideRange)?;
    let coeffs = c.col(0);
    Ok(Polynomial::combine(2, coeffs.iter().zip(&bubbles)))
}

/// `L1_T`: the cell bubble of degree `<= n` whose gradient is `u`.
pub fn lift_l1_cell(tet: &Simplex, u: &VectorPolynomial, n: usize) -> Result<Polynomial, LiftError> {
    let bubbles = cell_bubbles(tet, n);
    if u.is_zero() {
        return Ok(Polynomial::zero(3));
    }
    let grads: Vec<VectorPolynomial> = bubbles.iter().map(grad).collect();
    let c = expand_in_basis(&grads, std::slice::from_ref(u)).map_err(|_| LiftError::OutsideRange)?;
    Ok(Polynomial::combine(3, c.col(0).iter().zip(&bubbles)))
}

/// Homogenize a function on the chart edge from `(1,0)` to `(0,1)` into the
/// face chart, vanishing on the two edges through the origin.
fn extend_chart_far_edge(g: &Polynomial) -> Polynomial {
    if g.is_zero() {
        return Polynomial::zero(2);
    }
    let s = Polynomial::var(2, 0);
    let t = Polynomial::var(2, 1);
    let sum = &s + &t;
    let n = g.degree() as u32;
    let mut out = Polynomial::zero(2);
    for (e, c) in g.terms() {
        let k = e[0] as u32;
        out.axpy(c, &(&t.pow(k) * &sum.pow(n - k)));
    }
    out
}

/// `L2_f`: a chart 1-form with zero boundary trace whose rotation is `rho`.
///
/// Rotates the planar lifting anchored at the chart origin and removes its
/// trace on the far edge with a gradient of an extended edge bubble.
pub fn lift_l2_face(rho: &Polynomial) -> Result<VectorPolynomial, LiftError> {
    assert_eq!(rho.dim(), 2);
    if !rho.integrate_reference().is_zero() {
        return Err(LiftError::NonzeroMean);
    }
    let v = lift_r2d(rho, &Anchor::origin(2));
    let a = rotate90(&v);
    let g = chart_edge_trace(&a, 2);
    let bubble = lift_l1_edge(&g)?;
    let corr = grad_chart(&extend_chart_far_edge(&bubble));
    Ok(&a - &corr)
}

fn chart_points(tet: &Simplex, f: usize) -> [&Vec<Rational>; 3] {
    let [a, b, c] = TET_FACES[f];
    [tet.vertex(a), tet.vertex(b), tet.vertex(c)]
}

/// Extend a face bubble by homogenization (face `f` of `tet`).
fn extend_face_bubble(phi: &Polynomial, tet: &Simplex, f: usize) -> Result<Polynomial, LiftError> {
    Ok(crate::localspace::extend_scalar_face(phi, tet, f)?)
}

/// `L2_T`: a field of `W1_p(T)` with zero tangential trace whose curl is `u`.
///
/// Requires `u` to have vanishing normal trace on the faces through vertex 0.
pub fn lift_l2_cell(space: &LocalSpace, u: &VectorPolynomial) -> Result<VectorPolynomial, LiftError> {
    assert_eq!(space.kind, SpaceKind::W1);
    let tet = &space.tet;
    let r = lift_r(u, &Anchor(tet.vertex(0).clone()));
    let [a, b, c] = chart_points(tet, 3);
    let tr = face_trace(&r, a, b, c);
    let bubble = lift_l1_face(&tr, space.p + 1)?;
    let ext = extend_face_bubble(&bubble, tet, 3)?;
    Ok(&r - &grad(&ext))
}

/// `L3_T`: a field of `W2_p(T)` with zero normal trace whose divergence is `u`.
pub fn lift_l3_cell(w1: &LocalSpace, u: &Polynomial) -> Result<VectorPolynomial, LiftError> {
    assert_eq!(w1.kind, SpaceKind::W1);
    let tet = &w1.tet;
    if !tet.integrate(u).is_zero() {
        return Err(LiftError::NonzeroMean);
    }
    let d = lift_d(u, &Anchor(tet.vertex(0).clone()));
    let [a, b, c] = chart_points(tet, 3);
    let rho = face_flux(&d, a, b, c);
    let a1 = lift_l2_face(&rho)?;
    let ext = extend_1form_face(&a1, w1, 3)?;
    Ok(&d - &crate::polycore::curl(&ext))
}
