//! Simplices with rational vertices, affine charts and facet traces.
//!
//! Facets are parametrized over reference simplices starting at their lowest
//! vertex: an edge `[P, Q]` as `P + xi (Q - P)`, a face `[A, B, C]` as
//! `A + s (B - A) + t (C - A)`. Traces of 1-forms are the pulled-back
//! covariant components in these charts, traces of 2-forms the pulled-back
//! density `u . (e1 x e2)`.

use thiserror::Error;

use super::linalg::QMatrix;
use super::poly::{Exponent, Polynomial, VectorPolynomial};
use super::rational::{factorial, Rational};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimplexError {
    #[error("degenerate simplex (vertices are affinely dependent)")]
    Degenerate,
    #[error("inconsistent vertex coordinates")]
    BadCoordinates,
}

pub type Point = Vec<Rational>;

pub fn sub(a: &[Rational], b: &[Rational]) -> Point {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn cross(a: &[Rational], b: &[Rational]) -> Point {
    vec![
        &a[1] * &b[2] - &a[2] * &b[1],
        &a[2] * &b[0] - &a[0] * &b[2],
        &a[0] * &b[1] - &a[1] * &b[0],
    ]
}

pub fn det3(m: &[Point; 3]) -> Rational {
    dot(&m[0], &cross(&m[1], &m[2]))
}

/// A nondegenerate simplex of dimension `vertices.len() - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Simplex {
    vertices: Vec<Point>,
}

impl Simplex {
    pub fn new(vertices: Vec<Point>) -> Result<Self, SimplexError> {
        let n = vertices.first().map_or(0, Vec::len);
        if vertices.is_empty() || vertices.len() > n + 1 || vertices.iter().any(|v| v.len() != n) {
            return Err(SimplexError::BadCoordinates);
        }
        let s = Simplex { vertices };
        let cols = s.edge_vectors();
        if QMatrix::from_cols(&cols, n).rank() != cols.len() {
            return Err(SimplexError::Degenerate);
        }
        Ok(s)
    }

    /// Reference simplex `{0, e_1, ..., e_d}` in `R^d`.
    pub fn reference(d: usize) -> Self {
        let mut vs = vec![vec![Rational::ZERO; d]];
        for i in 0..d {
            let mut v = vec![Rational::ZERO; d];
            v[i] = Rational::ONE;
            vs.push(v);
        }
        Simplex { vertices: vs }
    }

    pub fn from_i64(vertices: &[[i64; 3]]) -> Result<Self, SimplexError> {
        Self::new(
            vertices
                .iter()
                .map(|v| v.iter().map(|&c| Rational::from_integer(c)).collect())
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn ambient_dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &Point {
        &self.vertices[i]
    }

    /// `v_i - v_0` for `i = 1..=d`.
    pub fn edge_vectors(&self) -> Vec<Point> {
        self.vertices[1..].iter().map(|v| sub(v, &self.vertices[0])).collect()
    }

    /// Jacobian of the map from the reference simplex (ambient x dim).
    pub fn jacobian(&self) -> QMatrix {
        QMatrix::from_cols(&self.edge_vectors(), self.ambient_dim())
    }

    /// Determinant of the Jacobian for a full-dimensional simplex.
    pub fn det_jacobian(&self) -> Rational {
        assert_eq!(self.dim(), self.ambient_dim());
        let e = self.edge_vectors();
        match self.dim() {
            1 => e[0][0].clone(),
            2 => &e[0][0] * &e[1][1] - &e[0][1] * &e[1][0],
            3 => det3(&[e[0].clone(), e[1].clone(), e[2].clone()]),
            d => panic!("unsupported dimension {d}"),
        }
    }

    /// Volume of a full-dimensional simplex.
    pub fn volume(&self) -> Rational {
        self.det_jacobian().abs() / factorial(self.dim() as u32)
    }

    /// Map from reference coordinates: returns `(origin, columns)`.
    pub fn chart(&self) -> (Point, Vec<Point>) {
        (self.vertices[0].clone(), self.edge_vectors())
    }

    /// Pull a polynomial on the ambient space back to reference coordinates.
    pub fn pullback(&self, p: &Polynomial) -> Polynomial {
        let (o, cols) = self.chart();
        p.compose_affine(&o, &cols)
    }

    /// Barycentric coordinate functions as polynomials in ambient coordinates
    /// (full-dimensional simplices only).
    pub fn barycentric(&self) -> Vec<Polynomial> {
        let d = self.dim();
        assert_eq!(d, self.ambient_dim());
        let jinv = self.jacobian().inverse().expect("nondegenerate");
        let v0 = &self.vertices[0];
        let mut lambdas = Vec::with_capacity(d + 1);
        let mut rest = Vec::with_capacity(d);
        for i in 0..d {
            let row = jinv.row(i).to_vec();
            let c0 = -dot(&row, v0);
            rest.push(Polynomial::affine(d, c0, &row));
        }
        let mut l0 = Polynomial::one(d);
        for r in &rest {
            l0 = &l0 - r;
        }
        lambdas.push(l0);
        lambdas.extend(rest);
        lambdas
    }

    /// Exact integral of an ambient polynomial over a full-dimensional simplex.
    pub fn integrate(&self, p: &Polynomial) -> Rational {
        assert_eq!(p.dim(), self.dim(), "dimension mismatch");
        self.pullback(p).integrate_reference() * self.det_jacobian().abs()
    }

    pub fn sub_simplex(&self, idx: &[usize]) -> Simplex {
        Simplex {
            vertices: idx.iter().map(|&i| self.vertices[i].clone()).collect(),
        }
    }

    pub fn centroid(&self) -> Point {
        let n = Rational::from(self.vertices.len());
        (0..self.ambient_dim())
            .map(|k| self.vertices.iter().map(|v| v[k].clone()).sum::<Rational>() / n.clone())
            .collect()
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.vertices
            .iter()
            .map(|v| v.iter().map(Rational::to_f64).collect())
            .collect()
    }
}

/// Local edges of a tetrahedron, as sorted vertex pairs.
pub const TET_EDGES: [[usize; 2]; 6] = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];
/// Local faces of a tetrahedron, as sorted vertex triples.
pub const TET_FACES: [[usize; 3]; 4] = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
/// Local edges of a triangle in its own vertex numbering.
pub const TRI_EDGES: [[usize; 2]; 3] = [[0, 1], [0, 2], [1, 2]];

/// Exact monomial moments `int_T x^a` of a full-dimensional 3-simplex up to
/// a fixed total degree.
#[derive(Clone, Debug)]
pub struct MomentTable {
    max: usize,
    values: Vec<Rational>,
}

impl MomentTable {
    pub fn new(tet: &Simplex, max_deg: usize) -> Self {
        assert_eq!(tet.dim(), 3);
        let n = max_deg + 1;
        let (o, cols) = tet.chart();
        let coord: Vec<Polynomial> = (0..3)
            .map(|i| Polynomial::affine(3, o[i].clone(), &[cols[0][i].clone(), cols[1][i].clone(), cols[2][i].clone()]))
            .collect();
        let det = tet.det_jacobian().abs();
        let mut pulled: Vec<Option<Polynomial>> = vec![None; n * n * n];
        let mut values = vec![Rational::ZERO; n * n * n];
        let idx = |e: [usize; 3]| (e[0] * n + e[1]) * n + e[2];
        for e in super::poly::monomials(3, max_deg as i32) {
            let e = [e[0] as usize, e[1] as usize, e[2] as usize];
            let q = match (0..3).find(|&i| e[i] > 0) {
                None => Polynomial::one(3),
                Some(i) => {
                    let mut prev = e;
                    prev[i] -= 1;
                    pulled[idx(prev)].as_ref().expect("lower degree first") * &coord[i]
                }
            };
            values[idx(e)] = q.integrate_reference() * &det;
            pulled[idx(e)] = Some(q);
        }
        MomentTable { max: max_deg, values }
    }

    pub fn max_degree(&self) -> usize {
        self.max
    }

    fn at(&self, a: &Exponent, b: &Exponent) -> &Rational {
        let n = self.max + 1;
        let e = [0, 1, 2].map(|i| a[i] as usize + b[i] as usize);
        assert!(e.iter().sum::<usize>() <= self.max, "moment table degree exceeded");
        &self.values[(e[0] * n + e[1]) * n + e[2]]
    }

    pub fn integrate(&self, p: &Polynomial) -> Rational {
        p.terms().map(|(e, c)| c * self.at(e, &[0, 0, 0])).sum()
    }

    pub fn integrate_product(&self, a: &Polynomial, b: &Polynomial) -> Rational {
        let mut s = Rational::ZERO;
        for (ea, ca) in a.terms() {
            for (eb, cb) in b.terms() {
                s += &(ca * cb) * self.at(ea, eb);
            }
        }
        s
    }

    pub fn integrate_dot(&self, a: &VectorPolynomial, b: &VectorPolynomial) -> Rational {
        a.comps().iter().zip(b.comps()).map(|(x, y)| self.integrate_product(x, y)).sum()
    }
}

/// Face index of `TET_FACES` opposite to local vertex `v`.
pub fn face_opposite(v: usize) -> usize {
    3 - v
}

/// Edges (indices into `TET_EDGES`) contained in the local face `f`.
pub fn face_edges(f: usize) -> [usize; 3] {
    let fv = TET_FACES[f];
    let mut out = [0; 3];
    for (k, [a, b]) in TRI_EDGES.iter().enumerate() {
        let e = [fv[*a], fv[*b]];
        out[k] = TET_EDGES.iter().position(|x| *x == e).unwrap();
    }
    out
}

/// Restriction of a scalar to the edge `P + xi (Q - P)`.
pub fn restrict_edge(p: &Polynomial, a: &[Rational], b: &[Rational]) -> Polynomial {
    p.compose_affine(a, &[sub(b, a)])
}

/// Restriction of a scalar to the face chart `A + s e1 + t e2`.
pub fn restrict_face(p: &Polynomial, a: &[Rational], b: &[Rational], c: &[Rational]) -> Polynomial {
    p.compose_affine(a, &[sub(b, a), sub(c, a)])
}

/// Tangential trace of a 1-form on an edge: `u(P + xi (Q-P)) . (Q-P)`.
pub fn edge_trace(u: &VectorPolynomial, a: &[Rational], b: &[Rational]) -> Polynomial {
    let t = sub(b, a);
    restrict_edge(&u.dot_const(&t), a, b)
}

/// Tangential trace of a 1-form on a face: covariant chart components
/// `(u . e1, u . e2)` as functions of `(s, t)`.
pub fn face_trace(u: &VectorPolynomial, a: &[Rational], b: &[Rational], c: &[Rational]) -> VectorPolynomial {
    let e1 = sub(b, a);
    let e2 = sub(c, a);
    VectorPolynomial::new(vec![
        restrict_face(&u.dot_const(&e1), a, b, c),
        restrict_face(&u.dot_const(&e2), a, b, c),
    ])
}

/// Normal trace of a 2-form (flux density) on a face: `u . (e1 x e2)` in the chart.
pub fn face_flux(u: &VectorPolynomial, a: &[Rational], b: &[Rational], c: &[Rational]) -> Polynomial {
    let n = cross(&sub(b, a), &sub(c, a));
    restrict_face(&u.dot_const(&n), a, b, c)
}

/// Tangential trace of a chart 1-form on edge `k` of the reference triangle
/// (edges `(0,1)`, `(0,2)`, `(1,2)` of vertices `(0,0)`, `(1,0)`, `(0,1)`).
pub fn chart_edge_trace(a: &VectorPolynomial, k: usize) -> Polynomial {
    let (o, d) = chart_edge(k);
    let tr = a.dot_const(&d);
    let dir: Vec<Rational> = d.clone();
    tr.compose_affine(&o, &[dir])
}

/// Restriction of a chart scalar to edge `k` of the reference triangle.
pub fn chart_edge_restrict(p: &Polynomial, k: usize) -> Polynomial {
    let (o, d) = chart_edge(k);
    p.compose_affine(&o, &[d])
}

/// Start point and direction of reference-triangle edge `k`.
pub fn chart_edge(k: usize) -> (Point, Point) {
    let q = Rational::from_integer;
    match k {
        0 => (vec![q(0), q(0)], vec![q(1), q(0)]),
        1 => (vec![q(0), q(0)], vec![q(0), q(1)]),
        2 => (vec![q(1), q(0)], vec![q(-1), q(1)]),
        _ => panic!("triangle has three edges"),
    }
}

/// Gradient of a chart scalar (covariant components).
pub fn grad_chart(p: &Polynomial) -> VectorPolynomial {
    super::poly::grad(p)
}

/// Exterior derivative of a chart 1-form: `d_s a_t - d_t a_s`.
pub fn rot_chart(a: &VectorPolynomial) -> Polynomial {
    super::poly::rot2d(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::poly::{curl, grad};

    fn q(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    fn tet() -> Simplex {
        Simplex::from_i64(&[[1, 0, 0], [3, 1, 0], [0, 2, 1], [1, 1, 4]]).unwrap()
    }

    #[test]
    fn degenerate_rejected() {
        assert_eq!(
            Simplex::from_i64(&[[0, 0, 0], [1, 0, 0], [2, 0, 0], [0, 0, 1]]),
            Err(SimplexError::Degenerate)
        );
    }

    #[test]
    fn volumes_and_integrals() {
        let r = Simplex::reference(3);
        assert_eq!(r.volume(), Rational::new(1, 6));
        let t = tet();
        let lam = t.barycentric();
        for (i, l) in lam.iter().enumerate() {
            for (j, v) in t.vertices().iter().enumerate() {
                assert_eq!(l.eval(v), if i == j { q(1) } else { q(0) });
            }
            assert_eq!(t.integrate(l), t.volume() / q(4));
        }
        // int lambda_0 lambda_1 = 2 |T| / 5!  * 3! ... = |T| * 3! * 1! 1! / 5!
        let p = &lam[0] * &lam[1];
        assert_eq!(t.integrate(&p), t.volume() * q(6) / q(120));
    }

    #[test]
    fn edge_trace_of_gradient_is_derivative() {
        let x = Polynomial::var(3, 0);
        let y = Polynomial::var(3, 1);
        let p = &(&x * &x) * &y;
        let t = tet();
        let (a, b) = (t.vertex(1), t.vertex(3));
        let lhs = edge_trace(&grad(&p), a, b);
        let rhs = restrict_edge(&p, a, b).derivative(0);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn face_traces_commute() {
        let x = Polynomial::var(3, 0);
        let y = Polynomial::var(3, 1);
        let z = Polynomial::var(3, 2);
        let u = VectorPolynomial::new(vec![&x * &z, &y * &y, &x * &y]);
        let t = tet();
        let (a, b, c) = (t.vertex(0), t.vertex(2), t.vertex(3));
        assert_eq!(rot_chart(&face_trace(&u, a, b, c)), face_flux(&curl(&u), a, b, c));
        let p = &(&x * &y) * &z;
        assert_eq!(face_trace(&grad(&p), a, b, c), grad_chart(&restrict_face(&p, a, b, c)));
    }

    #[test]
    fn rotation_field_on_bottom_face() {
        let x = Polynomial::var(3, 0);
        let y = Polynomial::var(3, 1);
        let u = VectorPolynomial::new(vec![-&y, x.clone(), Polynomial::zero(3)]);
        let r = Simplex::reference(3);
        let tr = face_trace(&u, r.vertex(0), r.vertex(1), r.vertex(2));
        let s = Polynomial::var(2, 0);
        let t = Polynomial::var(2, 1);
        assert_eq!(tr, VectorPolynomial::new(vec![-&t, s]));
        assert_eq!(face_flux(&curl(&u), r.vertex(0), r.vertex(1), r.vertex(2)), Polynomial::constant(2, q(2)));
    }

    #[test]
    fn unit_field_on_x_axis() {
        let u = VectorPolynomial::constant(3, &[q(1), q(0), q(0)]);
        let r = Simplex::reference(3);
        assert_eq!(edge_trace(&u, r.vertex(0), r.vertex(1)), Polynomial::one(1));
    }

    #[test]
    fn chart_edges_match_face_edges() {
        let x = Polynomial::var(3, 0);
        let z = Polynomial::var(3, 2);
        let u = VectorPolynomial::new(vec![&x * &z, z.clone(), &x * &x]);
        let t = tet();
        let f = TET_FACES[3];
        let (a, b, c) = (t.vertex(f[0]), t.vertex(f[1]), t.vertex(f[2]));
        let tr = face_trace(&u, a, b, c);
        let pts = [a, b, c];
        for (k, [i, j]) in TRI_EDGES.iter().enumerate() {
            assert_eq!(chart_edge_trace(&tr, k), edge_trace(&u, pts[*i], pts[*j]));
        }
        assert_eq!(face_edges(3), [3, 4, 5]);
        assert_eq!(face_edges(1), [0, 2, 4]);
    }
}
