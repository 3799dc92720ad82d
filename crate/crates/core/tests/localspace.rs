use pnedelec::localspace::*;
use pnedelec::polycore::poly::monomials;
use pnedelec::polycore::simplex::{edge_trace, face_flux, face_trace, restrict_edge, restrict_face, TET_EDGES, TET_FACES};
use pnedelec::polycore::{curl, div, Polynomial, Rational, Simplex, VectorPolynomial};
use proptest::prelude::*;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn tet() -> Simplex {
    Simplex::from_i64(&[[1, 0, 0], [3, 1, 0], [0, 2, 1], [1, 1, 4]]).unwrap()
}

fn edge_pts(t: &Simplex, e: usize) -> (&Vec<Rational>, &Vec<Rational>) {
    let [a, b] = TET_EDGES[e];
    (t.vertex(a), t.vertex(b))
}

fn face_pts(t: &Simplex, f: usize) -> [&Vec<Rational>; 3] {
    TET_FACES[f].map(|i| t.vertex(i))
}

#[test]
fn space_dimensions() {
    let t = tet();
    for (p, want) in [(0, 6), (1, 20), (2, 45)] {
        assert_eq!(build_w1(&t, p).dim(), want);
        assert_eq!(dim_w1(p as i32), want);
    }
    for (p, want) in [(0, 4), (1, 15)] {
        assert_eq!(build_w2(&t, p).dim(), want);
    }
    for p in 0..4 {
        assert_eq!(dim_w2(p as i32), (p + 1) * (p + 2) * (p + 4) / 2);
    }
}

#[test]
fn divergence_of_face_space_spans_polynomials() {
    let t = tet();
    for p in 0..3 {
        let divs: Vec<VectorPolynomial> = build_w2(&t, p).basis.iter().map(|b| VectorPolynomial::new(vec![div(b)])).collect();
        let coords = field_coordinates(&divs, p as i32);
        assert_eq!(pnedelec::polycore::linalg::rank_of(&coords), dim_p(3, p as i32));
    }
}

#[test]
fn dof_counts_per_facet() {
    for (p, counts) in [(1usize, [2usize, 2, 0]), (3, [4, 12, 12])] {
        let d = dofs(SpaceKind::W1, p);
        let count = |f: fn(&Facet) -> bool| d.iter().filter(|k| f(&k.facet)).count();
        assert_eq!(count(|f| matches!(f, Facet::Edge(_))), 6 * counts[0]);
        assert_eq!(count(|f| matches!(f, Facet::Face(_))), 4 * counts[1]);
        assert_eq!(count(|f| matches!(f, Facet::Cell)), counts[2]);
        assert_eq!(d.len(), dim_w1(p as i32));
    }
}

#[test]
fn whitney_edge_functions() {
    let t = tet();
    for e in 0..6 {
        let b = whitney1(&t, e);
        for e2 in 0..6 {
            let (a, c) = edge_pts(&t, e2);
            let m = edge_trace(&b, a, c).integrate_reference();
            assert_eq!(m, if e == e2 { Rational::ONE } else { Rational::ZERO });
        }
        for f in 0..4 {
            let [a, c, d] = face_pts(&t, f);
            let circ = face_flux(&curl(&b), a, c, d).integrate_reference();
            let fv = TET_FACES[f];
            let [i, j] = TET_EDGES[e];
            let want = match (fv.iter().position(|&v| v == i), fv.iter().position(|&v| v == j)) {
                (Some(0), Some(2)) => -1,
                (Some(_), Some(_)) => 1,
                _ => 0,
            };
            assert_eq!(circ, q(want, 1), "edge {e} face {f}");
        }
    }
    let r = Simplex::reference(3);
    let mid = [q(1, 2), q(0, 1), q(0, 1)];
    assert_eq!(whitney1(&r, 0).eval(&mid), vec![q(1, 1), q(1, 2), q(1, 2)]);
    let d = dofs(SpaceKind::W1, 0);
    for e in 0..6 {
        assert_eq!(apply_dof(&d[e], &t, &whitney1(&t, e)), Rational::ONE);
    }
}

#[test]
fn whitney_face_functions() {
    let t = tet();
    for f in 0..4 {
        let b = whitney2(&t, f);
        for f2 in 0..4 {
            let [a, c, d] = face_pts(&t, f2);
            let flux = face_flux(&b, a, c, d).integrate_reference();
            assert_eq!(flux.abs(), if f == f2 { Rational::ONE } else { Rational::ZERO });
        }
    }
}

#[test]
fn dual_basis_properties() {
    let t = tet();
    for p in 0..4 {
        let s = build_w1(&t, p);
        for (i, k) in s.dofs.iter().enumerate() {
            for (j, b) in s.basis.iter().enumerate() {
                assert_eq!(apply_dof(k, &t, b), if i == j { Rational::ONE } else { Rational::ZERO });
            }
        }
        for (facet, range) in &s.facet_partition {
            if let Facet::Edge(e) = facet {
                for b in &s.basis[range.clone()] {
                    for e2 in (0..6).filter(|e2| e2 != e) {
                        let (a, c) = edge_pts(&t, e2);
                        assert!(edge_trace(b, a, c).is_zero());
                    }
                }
            }
        }
    }
    let s = build_w1(&t, 0);
    for e in 0..6 {
        assert_eq!(s.basis[e], whitney1(&t, e));
    }
}

#[test]
fn edge_bubble_extension() {
    let t = tet();
    let lam = t.barycentric();
    let xi = Polynomial::var(1, 0);
    let bubble = &xi * &(&Polynomial::one(1) - &xi);
    for (e, [i, j]) in TET_EDGES.iter().enumerate() {
        let ext = extend_scalar_edge(&bubble, &t, e).unwrap();
        assert_eq!(ext, &lam[*i] * &lam[*j]);
        for e2 in (0..6).filter(|&e2| e2 != e) {
            let (a, c) = edge_pts(&t, e2);
            assert!(restrict_edge(&ext, a, c).is_zero());
        }
    }
    assert!(extend_scalar_edge(&Polynomial::zero(1), &t, 0).unwrap().is_zero());
    assert!(extend_scalar_edge(&xi, &t, 0).is_err());
}

#[test]
fn zero_trace_subspaces() {
    let t = tet();
    for p in 0..4 {
        assert_eq!(zero_trace_subspace(Facet::Edge(0), 1, p, None).dim(), p);
        let w1 = build_w1(&t, p);
        let cell = zero_trace_subspace(Facet::Cell, 1, p, Some(&w1));
        if p == 0 {
            assert_eq!(cell.dim(), 0);
        }
        for b in &cell.basis {
            for f in 0..4 {
                let [a, c, d] = face_pts(&t, f);
                assert!(face_trace(b, a, c, d).is_zero());
            }
        }
        let w2 = build_w2(&t, p);
        for b in &zero_trace_subspace(Facet::Cell, 2, p, Some(&w2)).basis {
            for f in 0..4 {
                let [a, c, d] = face_pts(&t, f);
                assert!(face_flux(b, a, c, d).is_zero());
            }
        }
    }
}

fn poly_from(coeffs: &[(i64, i64)], dim: usize, deg: i32) -> Polynomial {
    let mut p = Polynomial::zero(dim);
    for (e, &(n, d)) in monomials(dim, deg).into_iter().zip(coeffs) {
        p.add_term(e, q(n, d));
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn edge_extension_restricts_back(c in prop::collection::vec((-9i64..=9, 1i64..=4), 4), e in 0usize..6) {
        let t = tet();
        let xi = Polynomial::var(1, 0);
        let phi = &(&xi * &(&Polynomial::one(1) - &xi)) * &poly_from(&c, 1, 3);
        let ext = extend_scalar_edge(&phi, &t, e).unwrap();
        let (a, b) = edge_pts(&t, e);
        prop_assert_eq!(restrict_edge(&ext, a, b), phi);
    }

    #[test]
    fn face_extension_restricts_back(c in prop::collection::vec((-9i64..=9, 1i64..=4), 6), f in 0usize..4) {
        let t = tet();
        let s = Polynomial::var(2, 0);
        let r = Polynomial::var(2, 1);
        let cubic = &(&s * &r) * &(&(&Polynomial::one(2) - &s) - &r);
        let phi = &cubic * &poly_from(&c, 2, 2);
        let ext = extend_scalar_face(&phi, &t, f).unwrap();
        let [a, b, d] = face_pts(&t, f);
        prop_assert_eq!(restrict_face(&ext, a, b, d), phi);
        for f2 in (0..4).filter(|&f2| f2 != f) {
            let [a, b, d] = face_pts(&t, f2);
            prop_assert!(restrict_face(&ext, a, b, d).is_zero());
        }
    }
}
