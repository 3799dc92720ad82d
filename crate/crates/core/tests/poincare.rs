use pnedelec::poincare::{lift_d, lift_r, lift_r2d, Anchor};
use pnedelec::polycore::poly::{div2d, monomials};
use pnedelec::polycore::{curl, div, Polynomial, Rational, VectorPolynomial};
use proptest::prelude::*;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn anchor(v: &[i64]) -> Anchor {
    Anchor(v.iter().map(|&x| q(x, 1)).collect())
}

fn poly_from(coeffs: &[(i64, i64)], dim: usize, deg: i32) -> Polynomial {
    let mut p = Polynomial::zero(dim);
    for (e, &(n, d)) in monomials(dim, deg).into_iter().zip(coeffs) {
        p.add_term(e, q(n, d));
    }
    p
}

fn coeffs(n: usize) -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((-9i64..=9, 1i64..=5), n)
}

fn anchor3() -> impl Strategy<Value = Anchor> {
    prop::collection::vec((-3i64..=3, 1i64..=3), 3).prop_map(|v| Anchor(v.into_iter().map(|(n, d)| q(n, d)).collect()))
}

#[test]
fn constant_field_lifting() {
    let e3 = VectorPolynomial::new(vec![Polynomial::zero(3), Polynomial::zero(3), Polynomial::one(3)]);
    let r = lift_r(&e3, &Anchor::origin(3));
    let half = q(1, 2);
    let want = VectorPolynomial::new(vec![Polynomial::var(3, 1).scale(&-&half), Polynomial::var(3, 0).scale(&half), Polynomial::zero(3)]);
    assert_eq!(r, want);
}

#[test]
fn cyclic_field_lifting() {
    let u = VectorPolynomial::new(vec![Polynomial::var(3, 1), Polynomial::var(3, 2), Polynomial::var(3, 0)]);
    assert_eq!(curl(&lift_r(&u, &Anchor::origin(3))), u);
}

#[test]
fn planar_liftings() {
    let r = lift_r2d(&Polynomial::one(2), &Anchor::origin(2));
    assert_eq!(r, VectorPolynomial::position(2).scale(&q(1, 2)));
    assert_eq!(div2d(&r), Polynomial::one(2));
    let x2y = Polynomial::monomial(2, [2, 1, 0], q(1, 1));
    assert_eq!(div2d(&lift_r2d(&x2y, &anchor(&[1, 1]))), x2y);
}

#[test]
fn divergence_lifting() {
    let u = &Polynomial::var(3, 0) + &(&Polynomial::var(3, 1) * &Polynomial::var(3, 2));
    assert_eq!(div(&lift_d(&u, &anchor(&[0, 1, 0]))), u);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn curl_right_inverse(c in coeffs(3 * 84), a in anchor3()) {
        let v = VectorPolynomial::new((0..3).map(|i| poly_from(&c[i * 84..(i + 1) * 84], 3, 6)).collect());
        let u = curl(&v);
        prop_assert!(u.degree() <= 5);
        prop_assert_eq!(curl(&lift_r(&u, &a)), u);
    }

    #[test]
    fn div_right_inverse(c in coeffs(56), a in anchor3()) {
        let u = poly_from(&c, 3, 5);
        prop_assert_eq!(div(&lift_d(&u, &a)), u);
    }

    #[test]
    fn planar_right_inverse(c in coeffs(21), a in prop::collection::vec(-3i64..=3, 2)) {
        let u = poly_from(&c, 2, 5);
        prop_assert_eq!(div2d(&lift_r2d(&u, &anchor(&a))), u);
    }

    /// `w = curl R_a w + D_a div w` for every polynomial field.
    #[test]
    fn homotopy_decomposition(c in coeffs(3 * 35), a in anchor3()) {
        let w = VectorPolynomial::new((0..3).map(|i| poly_from(&c[i * 35..(i + 1) * 35], 3, 4)).collect());
        prop_assert_eq!(&curl(&lift_r(&w, &a)) + &lift_d(&div(&w), &a), w);
    }
}
