use pnedelec::polycore::poly::monomials;
use pnedelec::polycore::simplex::{face_flux, face_trace, MomentTable};
use pnedelec::polycore::{curl, div, grad, Polynomial, Rational, Simplex, VectorPolynomial};
use proptest::prelude::*;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn var(i: usize) -> Polynomial {
    Polynomial::var(3, i)
}

fn vp(c: [Polynomial; 3]) -> VectorPolynomial {
    VectorPolynomial::new(c.to_vec())
}

fn poly_from(coeffs: &[(i64, i64)], dim: usize, deg: i32) -> Polynomial {
    let mut p = Polynomial::zero(dim);
    for (e, &(n, d)) in monomials(dim, deg).into_iter().zip(coeffs) {
        p.add_term(e, q(n, d));
    }
    p
}

fn coeffs() -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((-9i64..=9, 1i64..=6), 20)
}

fn rational() -> impl Strategy<Value = Rational> {
    (-1_000_000i64..=1_000_000, 1i64..=1_000_000).prop_map(|(n, d)| q(n, d))
}

#[test]
fn curl_hand_expansions() {
    let z = Polynomial::zero(3);
    let c = curl(&vp([z.clone(), z.clone(), var(0)]));
    assert_eq!(c, vp([z.clone(), Polynomial::constant(3, q(-1, 1)), z.clone()]));
    let c = curl(&vp([var(1).scale(&q(-1, 1)), var(0), z.clone()]));
    assert_eq!(c, vp([z.clone(), z, Polynomial::constant(3, q(2, 1))]));
}

#[test]
fn simplex_integrals() {
    let t = Simplex::from_i64(&[[1, 0, 0], [3, 1, 0], [0, 2, 1], [1, 1, 4]]).unwrap();
    let lam = t.barycentric();
    assert_eq!(t.integrate(&lam[1]), t.volume() / q(4, 1));
    let r = Simplex::reference(3);
    assert_eq!(r.integrate(&(&var(0) * &var(1))), q(1, 120));
    assert_eq!(r.volume(), q(1, 6));
}

#[test]
fn face_trace_on_bottom_face() {
    // (-y, x, 0) on z = 0 of the reference tet: chart (s, t) -> (s, t, 0),
    // tangents e1 = (1,0,0), e2 = (0,1,0).
    let u = vp([var(1).scale(&q(-1, 1)), var(0), Polynomial::zero(3)]);
    let o = vec![q(0, 1); 3];
    let a = vec![q(1, 1), q(0, 1), q(0, 1)];
    let b = vec![q(0, 1), q(1, 1), q(0, 1)];
    let tr = face_trace(&u, &o, &a, &b);
    let s = Polynomial::var(2, 0);
    let t = Polynomial::var(2, 1);
    assert_eq!(tr, VectorPolynomial::new(vec![t.scale(&q(-1, 1)), s]));
    assert!(face_flux(&u, &o, &a, &b).is_zero());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rational_field_axioms(a in rational(), b in rational(), c in rational()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&(&a - &b) + &b, a.clone());
        if !b.is_zero() {
            prop_assert_eq!(&(&a / &b) * &b, a.clone());
        }
        let s = a.to_exact_string();
        prop_assert_eq!(s.parse::<Rational>().unwrap(), a);
    }

    #[test]
    fn big_products_stay_exact(a in rational(), k in 1u32..12) {
        let p = a.pow(k);
        if !a.is_zero() {
            prop_assert_eq!(&p / &a.pow(k - 1), a);
        }
    }

    #[test]
    fn vector_calculus_identities(c1 in coeffs(), c2 in coeffs(), c3 in coeffs(), c4 in coeffs()) {
        let f = poly_from(&c1, 3, 3);
        let g = poly_from(&c4, 3, 2);
        let u = vp([poly_from(&c2, 3, 2), poly_from(&c3, 3, 2), poly_from(&c4, 3, 2)]);
        prop_assert!(curl(&grad(&f)).is_zero());
        prop_assert!(div(&curl(&u)).is_zero());
        // product rule
        let fg = &f * &g;
        prop_assert_eq!(grad(&fg), &grad(&f).scale_by_poly(&g) + &grad(&g).scale_by_poly(&f));
    }

    #[test]
    fn ring_and_evaluation(c1 in coeffs(), c2 in coeffs(), x in rational(), y in rational(), z in rational()) {
        let f = poly_from(&c1, 3, 3);
        let g = poly_from(&c2, 3, 3);
        let pt = [x, y, z];
        prop_assert_eq!((&f * &g).eval(&pt), &f.eval(&pt) * &g.eval(&pt));
        prop_assert_eq!((&f + &g).eval(&pt), &f.eval(&pt) + &g.eval(&pt));
        prop_assert!((&f - &f).is_zero());
    }

    #[test]
    fn moment_table_matches_integration(c1 in coeffs(), c2 in coeffs(), v in prop::collection::vec(-4i64..=4, 12)) {
        let verts: Vec<[i64; 3]> = v.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
        prop_assume!(Simplex::from_i64(&verts).is_ok());
        let t = Simplex::from_i64(&verts).unwrap();
        let a = poly_from(&c1, 3, 2);
        let b = poly_from(&c2, 3, 3);
        let m = MomentTable::new(&t, 5);
        prop_assert_eq!(m.integrate_product(&a, &b), t.integrate(&(&a * &b)));
        // affine invariance of the barycentric partition of unity
        let lam = t.barycentric();
        let sum = lam.iter().fold(Polynomial::zero(3), |acc, l| &acc + l);
        prop_assert_eq!(sum, Polynomial::one(3));
    }
}
