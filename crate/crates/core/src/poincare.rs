//! Vertex-anchored Poincare liftings.
//!
//! With `y = x - a` and `u(a + y) = sum_k v_k(y)` split into homogeneous
//! parts, the path integrals reduce to
//! `R_a u = sum_k v_k / (k + 2) x y`, `R2D_a u = sum_k v_k / (k + 2) y` and
//! `D_a u = sum_k v_k / (k + 3) y`.

use crate::polycore::{Polynomial, Rational, VectorPolynomial};

/// Base point of a lifting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Anchor(pub Vec<Rational>);

impl Anchor {
    pub fn origin(dim: usize) -> Self {
        Anchor(vec![Rational::ZERO; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl From<Vec<Rational>> for Anchor {
    fn from(v: Vec<Rational>) -> Self {
        Anchor(v)
    }
}

fn identity_cols(d: usize) -> Vec<Vec<Rational>> {
    (0..d)
        .map(|j| (0..d).map(|i| if i == j { Rational::ONE } else { Rational::ZERO }).collect())
        .collect()
}

fn shift(p: &Polynomial, by: &[Rational]) -> Polynomial {
    p.compose_affine(by, &identity_cols(p.dim()))
}

fn neg(a: &[Rational]) -> Vec<Rational> {
    a.iter().map(|x| -x).collect()
}

/// Homogeneous parts of `p(a + y)` in `y`, each divided by `k + offset`.
fn weighted_in_local(p: &Polynomial, a: &[Rational], offset: i64) -> Polynomial {
    let local = shift(p, a);
    let mut out = Polynomial::zero(p.dim());
    for (e, c) in local.terms() {
        let k = e.iter().map(|&x| x as i64).sum::<i64>();
        out.add_term(*e, c / Rational::from_integer(k + offset));
    }
    out
}

/// 1-form lifting `R_a u = int_0^1 t u(a + t(x - a)) dt x (x - a)`.
pub fn lift_r(u: &VectorPolynomial, a: &Anchor) -> VectorPolynomial {
    assert!(u.dim() == 3 && u.len() == 3 && a.dim() == 3);
    let w = u.map(|c| weighted_in_local(c, &a.0, 2));
    let y = VectorPolynomial::position(3);
    let local = w.cross(&y);
    let back = neg(&a.0);
    local.map(|c| shift(c, &back))
}

/// Planar lifting `R2D_a u = int_0^1 t u(a + t(x - a)) dt (x - a)`.
pub fn lift_r2d(u: &Polynomial, a: &Anchor) -> VectorPolynomial {
    assert!(u.dim() == 2 && a.dim() == 2);
    let w = weighted_in_local(u, &a.0, 2);
    let local = VectorPolynomial::position(2).scale_by_poly(&w);
    let back = neg(&a.0);
    local.map(|c| shift(c, &back))
}

/// 2-form lifting `D_a u = int_0^1 t^2 u(a + t(x - a)) dt (x - a)`.
pub fn lift_d(u: &Polynomial, a: &Anchor) -> VectorPolynomial {
    assert!(u.dim() == 3 && a.dim() == 3);
    let w = weighted_in_local(u, &a.0, 3);
    let local = VectorPolynomial::position(3).scale_by_poly(&w);
    let back = neg(&a.0);
    local.map(|c| shift(c, &back))
}
