//! Discrete differential operators as exact matrices between local spaces,
//! and checks of the local de Rham complexes and their commuting traces.

use serde::Serialize;
use thiserror::Error;

use crate::interp::lifting::{lift_l1_cell, lift_l1_edge, lift_l1_face, lift_l2_cell, lift_l2_face, lift_l3_cell};
use crate::localspace::{
    build_scalar, build_w1, build_w2, cell_bubbles, cell_zero_mean, edge_bubbles, edge_zero_mean, expand_in_basis,
    face_bubbles, face_zero_mean, scalar_edge_space, scalar_face_space, w1_cell_zero_trace, w1_face_space,
    w1_face_zero_trace, w2_cell_zero_trace, LocalSpace,
};
use crate::polycore::linalg::{rank_of, same_span};
use crate::polycore::poly::monomials;
use crate::polycore::simplex::{
    chart_edge_restrict, chart_edge_trace, edge_trace, face_flux, face_trace, grad_chart, restrict_edge,
    restrict_face, rot_chart, TET_EDGES, TET_FACES, TRI_EDGES,
};
use crate::localspace::field_coordinates;
use crate::polycore::{curl, div, grad, Polynomial, QMatrix, Rational, Simplex, VectorPolynomial};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DerhamError {
    #[error("image of {0} is not contained in the target space")]
    NotContained(String),
}

/// A differential operator between two finite-dimensional spaces: column
/// `j` holds the coordinates of the image of source basis function `j`.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub name: String,
    pub src_dim: usize,
    pub dst_dim: usize,
    pub matrix: QMatrix,
}

impl OperatorMatrix {
    pub fn rank(&self) -> usize {
        self.matrix.rank()
    }

    pub fn kernel_dim(&self) -> usize {
        self.src_dim - self.rank()
    }
}

fn wrap(v: Vec<Polynomial>) -> Vec<VectorPolynomial> {
    v.into_iter().map(|p| VectorPolynomial::new(vec![p])).collect()
}

/// Expand `images` in `dst`; fails if some image is outside its span.
pub fn expand_images(name: &str, images: &[VectorPolynomial], dst: &[VectorPolynomial]) -> Result<OperatorMatrix, DerhamError> {
    let err = || DerhamError::NotContained(name.to_string());
    let matrix = if images.is_empty() {
        QMatrix::zeros(dst.len(), 0)
    } else if dst.is_empty() {
        if !images.iter().all(VectorPolynomial::is_zero) {
            return Err(err());
        }
        QMatrix::zeros(0, images.len())
    } else {
        expand_in_basis(dst, images).map_err(|_| err())?
    };
    Ok(OperatorMatrix {
        name: name.to_string(),
        src_dim: images.len(),
        dst_dim: dst.len(),
        matrix,
    })
}

/// Differential operator between local spaces. Dual-basis coordinates are
/// used when the target is a [`LocalSpace`].
pub fn operator_matrix(name: &str, op: impl Fn(&VectorPolynomial) -> VectorPolynomial, src: &[VectorPolynomial], dst: &[VectorPolynomial]) -> Result<OperatorMatrix, DerhamError> {
    let images: Vec<VectorPolynomial> = src.iter().map(op).collect();
    expand_images(name, &images, dst)
}

fn local_operator(name: &str, op: impl Fn(&VectorPolynomial) -> VectorPolynomial, src: &LocalSpace, dst: &LocalSpace) -> Result<OperatorMatrix, DerhamError> {
    let cols: Vec<Vec<Rational>> = src
        .basis
        .iter()
        .map(|b| dst.coordinates_checked(&op(b)).map_err(|_| DerhamError::NotContained(name.to_string())))
        .collect::<Result<_, _>>()?;
    Ok(OperatorMatrix {
        name: name.to_string(),
        src_dim: src.dim(),
        dst_dim: dst.dim(),
        matrix: QMatrix::from_cols(&cols, dst.dim()),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RowReport {
    pub name: String,
    pub spaces: Vec<String>,
    pub dims: Vec<usize>,
    pub ranks: Vec<usize>,
    pub kernel_dims: Vec<usize>,
    pub compositions_zero: bool,
    /// Per space: expected kernel at the head, `ker = im` inside, onto at the tail.
    pub exact: Vec<bool>,
    pub alternating_sum: i64,
}

impl RowReport {
    pub fn passed(&self) -> bool {
        self.compositions_zero && self.exact.iter().all(|&b| b) && self.alternating_sum == 0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SequenceReport {
    pub p: usize,
    pub zero_trace: bool,
    pub rows: Vec<RowReport>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl SequenceReport {
    fn new(p: usize, zero_trace: bool, rows: Vec<RowReport>, checks: Vec<Check>) -> Self {
        let passed = rows.iter().all(RowReport::passed) && checks.iter().all(|c| c.holds);
        SequenceReport {
            p,
            zero_trace,
            rows,
            checks,
            passed,
        }
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> = self.rows.iter().filter(|r| !r.passed()).map(|r| r.name.clone()).collect();
        out.extend(self.checks.iter().filter(|c| !c.holds).map(|c| c.name.clone()));
        out
    }
}

/// Assemble the bookkeeping of a complex `V_0 -> ... -> V_n -> 0`.
/// `head_kernel` is the expected kernel of the first arrow.
fn row(name: &str, spaces: &[&str], ops: &[OperatorMatrix], head_kernel: usize) -> RowReport {
    let dims: Vec<usize> = std::iter::once(ops[0].src_dim).chain(ops.iter().map(|o| o.dst_dim)).collect();
    let ranks: Vec<usize> = ops.iter().map(OperatorMatrix::rank).collect();
    let kernel_dims: Vec<usize> = ops.iter().zip(&ranks).map(|(o, r)| o.src_dim - r).collect();
    let compositions_zero = ops.windows(2).all(|w| w[1].matrix.mul(&w[0].matrix).is_zero());
    let mut exact = vec![kernel_dims[0] == head_kernel];
    for i in 1..ops.len() {
        exact.push(kernel_dims[i] == ranks[i - 1]);
    }
    exact.push(ranks[ops.len() - 1] == dims[ops.len()]);
    let alternating_sum = head_kernel as i64
        + dims
            .iter()
            .enumerate()
            .map(|(i, &d)| if i % 2 == 0 { -(d as i64) } else { d as i64 })
            .sum::<i64>();
    RowReport {
        name: name.to_string(),
        spaces: spaces.iter().map(|s| s.to_string()).collect(),
        dims,
        ranks,
        kernel_dims,
        compositions_zero,
        exact,
        alternating_sum,
    }
}

fn scalar_of(v: &VectorPolynomial) -> &Polynomial {
    v.comp(0)
}

fn sc(p: Polynomial) -> VectorPolynomial {
    VectorPolynomial::new(vec![p])
}

fn d_xi(v: &VectorPolynomial) -> VectorPolynomial {
    sc(scalar_of(v).derivative(0))
}

fn p_cell(p: i32) -> Vec<VectorPolynomial> {
    wrap(monomials(3, p).into_iter().map(|e| Polynomial::monomial(3, e, Rational::ONE)).collect())
}

/// Tet edge index of chart edge `k` of face `f`.
fn chart_edge_of_face(f: usize, k: usize) -> usize {
    let fv = TET_FACES[f];
    let [a, b] = TRI_EDGES[k];
    TET_EDGES.iter().position(|e| *e == [fv[a], fv[b]]).unwrap()
}

fn check(name: impl Into<String>, holds: bool) -> Check {
    Check { name: name.into(), holds }
}

fn spans_equal(a: &[VectorPolynomial], b: &[VectorPolynomial]) -> bool {
    let deg = a.iter().chain(b).map(VectorPolynomial::degree).max().unwrap_or(0).max(0);
    let ca = field_coordinates(a, deg);
    let cb = field_coordinates(b, deg);
    if ca.is_empty() || cb.is_empty() {
        return rank_of(&ca) == rank_of(&cb);
    }
    same_span(&ca, &cb)
}

/// Local complexes on `tet` (3D row, face chart row, edge row), the commuting
/// trace squares and the trace space identities.
pub fn verify_local_sequence(tet: &Simplex, p: usize) -> Result<SequenceReport, DerhamError> {
    let s = build_scalar(tet, p);
    let w1 = build_w1(tet, p);
    let w2 = build_w2(tet, p);
    let pp = p_cell(p as i32);
    let grad_op = local_operator("grad", |u| grad(scalar_of(u)), &s, &w1)?;
    let curl_op = local_operator("curl", curl, &w1, &w2)?;
    let div_op = operator_matrix("div", |u| sc(div(u)), &w2.basis, &pp)?;
    let mut rows = vec![row("cell", &["P_{p+1}(T)", "W1_p(T)", "W2_p(T)", "P_p(T)"], &[grad_op, curl_op, div_op], 1)];

    let pf1 = wrap(scalar_face_space(p as i32 + 1));
    let w1f = w1_face_space(p);
    let pf = wrap(scalar_face_space(p as i32));
    let gf = operator_matrix("grad_face", |u| grad_chart(scalar_of(u)), &pf1, &w1f)?;
    let rf = operator_matrix("rot_face", |u| sc(rot_chart(u)), &w1f, &pf)?;
    rows.push(row("face", &["P_{p+1}(f)", "W1_p(f)", "P_p(f)"], &[gf, rf], 1));

    let pe1 = wrap(scalar_edge_space(p as i32 + 1));
    let pe = wrap(scalar_edge_space(p as i32));
    let de = operator_matrix("d_edge", d_xi, &pe1, &pe)?;
    rows.push(row("edge", &["P_{p+1}(e)", "P_p(e)"], &[de], 1));

    let mut checks = Vec::new();
    let v = tet.vertices();
    let mut sq = [true; 6];
    for (f, [a, b, c]) in TET_FACES.iter().enumerate() {
        let (a, b, c) = (&v[*a], &v[*b], &v[*c]);
        for u in &s.basis {
            let u = scalar_of(u);
            sq[0] &= face_trace(&grad(u), a, b, c) == grad_chart(&restrict_face(u, a, b, c));
            for k in 0..3 {
                let [ea, eb] = TET_EDGES[chart_edge_of_face(f, k)];
                sq[4] &= chart_edge_restrict(&restrict_face(u, a, b, c), k) == restrict_edge(u, &v[ea], &v[eb]);
            }
        }
        for u in &w1.basis {
            sq[1] &= face_flux(&curl(u), a, b, c) == rot_chart(&face_trace(u, a, b, c));
            for k in 0..3 {
                let [ea, eb] = TET_EDGES[chart_edge_of_face(f, k)];
                sq[5] &= chart_edge_trace(&face_trace(u, a, b, c), k) == edge_trace(u, &v[ea], &v[eb]);
            }
        }
    }
    for u in &pf1 {
        for k in 0..3 {
            sq[2] &= chart_edge_trace(&grad_chart(scalar_of(u)), k) == chart_edge_restrict(scalar_of(u), k).derivative(0);
        }
    }
    for u in &s.basis {
        for [a, b] in TET_EDGES {
            sq[3] &= edge_trace(&grad(scalar_of(u)), &v[a], &v[b]) == restrict_edge(scalar_of(u), &v[a], &v[b]).derivative(0);
        }
    }
    let names = [
        "square/face_trace_grad",
        "square/face_flux_curl",
        "square/chart_edge_grad",
        "square/edge_trace_grad",
        "square/restriction_transitive",
        "square/trace_transitive",
    ];
    for (n, h) in names.iter().zip(sq) {
        checks.push(check(*n, h));
    }

    let mut et = Vec::new();
    let mut ft = Vec::new();
    let mut fl = Vec::new();
    for [a, b, c] in TET_FACES.iter() {
        let (a, b, c) = (&v[*a], &v[*b], &v[*c]);
        ft.push(spans_equal(&w1.basis.iter().map(|u| face_trace(u, a, b, c)).collect::<Vec<_>>(), &w1f));
        fl.push(spans_equal(&w2.basis.iter().map(|u| sc(face_flux(u, a, b, c))).collect::<Vec<_>>(), &pf));
    }
    for [a, b] in TET_EDGES {
        et.push(spans_equal(&w1.basis.iter().map(|u| sc(edge_trace(u, &v[a], &v[b]))).collect::<Vec<_>>(), &pe));
    }
    checks.push(check("trace_space/edge_w1", et.iter().all(|&b| b)));
    checks.push(check("trace_space/face_w1", ft.iter().all(|&b| b)));
    checks.push(check("trace_space/face_w2", fl.iter().all(|&b| b)));
    Ok(SequenceReport::new(p, false, rows, checks))
}

/// Zero-trace complexes on `tet` and the liftings as right inverses.
pub fn verify_zero_trace_sequence(tet: &Simplex, p: usize) -> Result<SequenceReport, DerhamError> {
    let w1 = build_w1(tet, p);
    let w2 = build_w2(tet, p);
    let b0 = wrap(cell_bubbles(tet, p + 1));
    let b1 = w1_cell_zero_trace(&w1);
    let b2 = w2_cell_zero_trace(&w2);
    let b3 = wrap(cell_zero_mean(tet, p));
    let g = operator_matrix("grad0", |u| grad(scalar_of(u)), &b0, &b1)?;
    let c = operator_matrix("curl0", curl, &b1, &b2)?;
    let d = operator_matrix("div0", |u| sc(div(u)), &b2, &b3)?;
    let mut rows = vec![row("cell0", &["P0_{p+1}(T)", "W1_0(T)", "W2_0(T)", "Pbar_p(T)"], &[g, c, d], 0)];

    let fb = wrap(face_bubbles(p + 1));
    let fw = w1_face_zero_trace(p);
    let fz = wrap(face_zero_mean(p));
    let gf = operator_matrix("grad_face0", |u| grad_chart(scalar_of(u)), &fb, &fw)?;
    let rf = operator_matrix("rot_face0", |u| sc(rot_chart(u)), &fw, &fz)?;
    rows.push(row("face0", &["P0_{p+1}(f)", "W1_0(f)", "Pbar_p(f)"], &[gf, rf], 0));

    let eb = wrap(edge_bubbles(p + 1));
    let ez = wrap(edge_zero_mean(p));
    let de = operator_matrix("d_edge0", d_xi, &eb, &ez)?;
    rows.push(row("edge0", &["P0_{p+1}(e)", "Pbar_p(e)"], &[de], 0));

    let mut checks = Vec::new();
    let zero = |q: &Polynomial, pts: &[Rational]| q.eval(pts).is_zero();
    checks.push(check(
        "lifting/edge",
        ez.iter().all(|v| {
            lift_l1_edge(scalar_of(v)).is_ok_and(|l| {
                l.derivative(0) == *scalar_of(v) && zero(&l, &[Rational::ZERO]) && zero(&l, &[Rational::ONE])
            })
        }),
    ));
    checks.push(check(
        "lifting/face_grad",
        fb.iter().all(|b| lift_l1_face(&grad_chart(scalar_of(b)), p + 1).is_ok_and(|l| l == *scalar_of(b))),
    ));
    checks.push(check(
        "lifting/face_rot",
        fz.iter().all(|r| {
            lift_l2_face(scalar_of(r)).is_ok_and(|a| {
                rot_chart(&a) == *scalar_of(r) && expand_images("", std::slice::from_ref(&a), &fw).is_ok()
            })
        }),
    ));
    checks.push(check(
        "lifting/cell_grad",
        b0.iter().all(|b| lift_l1_cell(tet, &grad(scalar_of(b)), p + 1).is_ok_and(|l| l == *scalar_of(b))),
    ));
    checks.push(check(
        "lifting/cell_curl",
        b1.iter().all(|w| {
            let cw = curl(w);
            lift_l2_cell(&w1, &cw).is_ok_and(|l| curl(&l) == cw && expand_images("", std::slice::from_ref(&l), &b1).is_ok())
        }),
    ));
    checks.push(check(
        "lifting/cell_div",
        b3.iter().all(|r| {
            lift_l3_cell(&w1, scalar_of(r))
                .is_ok_and(|l| div(&l) == *scalar_of(r) && expand_images("", std::slice::from_ref(&l), &b2).is_ok())
        }),
    ));
    Ok(SequenceReport::new(p, true, rows, checks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowest_order_bookkeeping() {
        let r = verify_local_sequence(&Simplex::reference(3), 0).unwrap();
        assert_eq!(r.rows[0].dims, vec![4, 6, 4, 1]);
        assert!(r.passed, "{:?}", r.failures());
        let z = verify_zero_trace_sequence(&Simplex::reference(3), 0).unwrap();
        assert_eq!(z.rows[0].dims, vec![0, 0, 0, 0]);
        assert!(z.passed, "{:?}", z.failures());
    }

    #[test]
    fn sequences_exact_on_skewed_tet() {
        let t = Simplex::from_i64(&[[1, 0, 0], [3, 1, 0], [0, 2, 1], [1, 1, 4]]).unwrap();
        for p in 0..3 {
            let r = verify_local_sequence(&t, p).unwrap();
            assert!(r.passed, "p={p}: {:?}", r.failures());
            let z = verify_zero_trace_sequence(&t, p).unwrap();
            assert!(z.passed, "p={p}: {:?}", z.failures());
        }
    }

    #[test]
    fn wrong_pairing_is_rejected() {
        let t = Simplex::reference(3);
        let w1 = build_w1(&t, 1);
        let w2 = build_w2(&t, 0);
        assert!(local_operator("curl", curl, &w1, &w2).is_err());
    }
}
