use pnedelec::interp::global::pi_global;
use pnedelec::interp::lifting::{lift_l1_edge, lift_l2_cell, lift_l2_face, lift_l3_cell};
use pnedelec::interp::operator::{interpolator, pi0, pi1, pi2, CallableField, IntegrableField};
use pnedelec::interp::projection::{legendre_coefficients_f64, shifted_legendre, EdgeProjector, InnerProductSpec};
use pnedelec::interp::study::{interp_error_study, interpolation_error, loglog_slope, AnalyticField};
use pnedelec::localspace::{build_w1, build_w2, edge_bubbles, edge_zero_mean, expand_in_basis, face_zero_mean, reference_space, w1_cell_zero_trace, w2_cell_zero_trace, whitney2, SpaceKind};
use pnedelec::meshasm::{GlobalDofMap, BoundaryCondition, Mesh};
use pnedelec::polycore::poly::rot2d;
use pnedelec::polycore::simplex::{chart_edge_trace, edge_trace, face_flux, face_trace, restrict_edge, restrict_face, TET_EDGES, TET_FACES};
use pnedelec::polycore::{curl, div, grad, Polynomial, Rational, VectorPolynomial};
use pnedelec::suite::{random_field, random_polynomial, random_tet, two_tet_mesh};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn scalar(p: Polynomial) -> VectorPolynomial {
    VectorPolynomial::new(vec![p])
}

fn random_combination<R: Rng>(r: &mut R, basis: &[VectorPolynomial]) -> VectorPolynomial {
    let mut out = VectorPolynomial::zero(basis[0].dim(), basis[0].len());
    for b in basis {
        out.axpy(&Rational::new(r.gen_range(-4..=4), r.gen_range(1..=3)), b);
    }
    out
}

fn modes() -> [InnerProductSpec; 2] {
    [InnerProductSpec::l2(), InnerProductSpec::fractional_auto()]
}

#[test]
fn edge_projection_matches_quadrature_normal_equations() {
    // L2 projection of sin(3 xi) onto zero-mean P_1: coefficient of (xi - 1/2).
    let g = |t: f64| (3.0 * t).sin();
    let n = 20_000;
    let h = 1.0 / n as f64;
    let simpson = |f: &dyn Fn(f64) -> f64| {
        (0..=n).map(|i| {
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            w * f(i as f64 * h)
        }).sum::<f64>() * h / 3.0
    };
    let c = simpson(&|t| g(t) * (t - 0.5)) / simpson(&|t| (t - 0.5) * (t - 0.5));
    let proj = EdgeProjector::new(1, &InnerProductSpec::l2());
    let a = legendre_coefficients_f64(g, proj.n_data() - 1, 24);
    let m = proj.matrix.to_f64();
    let coef: f64 = (0..a.len()).map(|j| m[(0, j)] * a[j]).sum();
    for t in [0.0, 0.3, 0.77, 1.0] {
        let got = coef * shifted_legendre(1).eval_f64(&[t]);
        assert!((got - c * (t - 0.5)).abs() < 1e-10, "{got} vs {}", c * (t - 0.5));
    }
}

#[test]
fn edge_projection_is_a_projector() {
    let mut r = rng(3);
    for ip in modes() {
        for p in 1..5 {
            let proj = EdgeProjector::new(p, &ip);
            for z in edge_zero_mean(p) {
                assert_eq!(proj.project(&z).unwrap(), z);
            }
            for _ in 0..10 {
                let g = random_polynomial(&mut r, 1, p as i32 + 1);
                let once = proj.project(&g).unwrap();
                assert_eq!(proj.project(&once).unwrap(), once);
            }
        }
    }
}

#[test]
fn edge_lifting_matrix_inverts_derivative() {
    for p in 1..6 {
        let bubbles: Vec<VectorPolynomial> = edge_bubbles(p + 1).into_iter().map(scalar).collect();
        let zm: Vec<VectorPolynomial> = edge_zero_mean(p).into_iter().map(scalar).collect();
        let derivs: Vec<VectorPolynomial> = bubbles.iter().map(|b| scalar(b.comp(0).derivative(0))).collect();
        let d = expand_in_basis(&zm, &derivs).unwrap();
        let lifts: Vec<VectorPolynomial> = zm.iter().map(|z| scalar(lift_l1_edge(z.comp(0)).unwrap())).collect();
        let l = expand_in_basis(&bubbles, &lifts).unwrap();
        assert_eq!(l.mul(&d), pnedelec::QMatrix::identity(p));
    }
    let xi = Polynomial::var(1, 0);
    let b = &xi * &(&Polynomial::one(1) - &xi);
    assert_eq!(lift_l1_edge(&b.derivative(0)).unwrap(), b);
}

#[test]
fn face_and_cell_liftings() {
    let mut r = rng(5);
    for p in 1..4 {
        let zm: Vec<VectorPolynomial> = face_zero_mean(p).into_iter().map(scalar).collect();
        for _ in 0..10 {
            let rho = random_combination(&mut r, &zm).comp(0).clone();
            let a = lift_l2_face(&rho).unwrap();
            assert_eq!(rot2d(&a), rho);
            for k in 0..3 {
                assert!(chart_edge_trace(&a, k).is_zero());
            }
        }
    }
    assert!(lift_l2_face(&Polynomial::zero(2)).unwrap().is_zero());
    let t = random_tet(&mut r);
    for p in 1..4 {
        let w1 = build_w1(&t, p);
        let zt = w1_cell_zero_trace(&w1);
        let w2 = build_w2(&t, p);
        let zt2 = w2_cell_zero_trace(&w2);
        for _ in 0..3 {
            if zt.is_empty() || zt2.is_empty() {
                break;
            }
            let cw = curl(&random_combination(&mut r, &zt));
            let l = lift_l2_cell(&w1, &cw).unwrap();
            assert_eq!(curl(&l), cw);
            for f in 0..4 {
                let [a, b, c] = TET_FACES[f].map(|i| t.vertex(i));
                assert!(face_trace(&l, a, b, c).is_zero());
            }
            let dv = div(&random_combination(&mut r, &zt2));
            let l = lift_l3_cell(&w1, &dv).unwrap();
            assert_eq!(div(&l), dv);
            for f in 0..4 {
                let [a, b, c] = TET_FACES[f].map(|i| t.vertex(i));
                assert!(face_flux(&l, a, b, c).is_zero());
            }
        }
    }
}

#[test]
fn scalar_interpolant_vertex_values() {
    let mut r = rng(7);
    let t = random_tet(&mut r);
    for ip in modes() {
        for p in 0..4 {
            assert_eq!(pi0(&t, p, &Polynomial::one(3), &ip).unwrap(), Polynomial::one(3));
            let u = random_polynomial(&mut r, 3, p as i32 + 3);
            let v = pi0(&t, p, &u, &ip).unwrap();
            for x in t.vertices() {
                assert_eq!(v.eval(x), u.eval(x));
            }
            let w = random_polynomial(&mut r, 3, p as i32 + 1);
            assert_eq!(pi0(&t, p, &w, &ip).unwrap(), w);
        }
    }
}

#[test]
fn lowest_order_face_interpolant_is_whitney() {
    let mut r = rng(8);
    let t = random_tet(&mut r);
    let u = random_field(&mut r, 3);
    let mut want = VectorPolynomial::zero(3, 3);
    for f in 0..4 {
        let [a, b, c] = TET_FACES[f].map(|i| t.vertex(i));
        let bf = whitney2(&t, f);
        let scale = &face_flux(&u, a, b, c).integrate_reference() / &face_flux(&bf, a, b, c).integrate_reference();
        want.axpy(&scale, &bf);
    }
    assert_eq!(pi2(&t, 0, &u, &InnerProductSpec::l2()).unwrap(), want);
}

#[test]
fn stage_corrections_vanish_on_lower_facets() {
    let mut r = rng(9);
    let t = random_tet(&mut r);
    let edge = |u: &VectorPolynomial, e: usize| {
        let [a, b] = TET_EDGES[e].map(|i| t.vertex(i));
        edge_trace(u, a, b)
    };
    let face = |_: &VectorPolynomial, f: usize| TET_FACES[f].map(|i| t.vertex(i));
    for ip in modes() {
        for p in 1..4 {
            let u = scalar(random_polynomial(&mut r, 3, p as i32 + 2));
            let b = interpolator(0, &t, p, &ip).unwrap().apply_exact(&u).unwrap().breakdown;
            for (name, w) in b.names.iter().zip(&b.corrections) {
                let s = w.comp(0);
                match *name {
                    "edge" => assert!(t.vertices().iter().all(|x| s.eval(x).is_zero())),
                    "face" => assert!((0..6).all(|e| {
                        let [a, c] = TET_EDGES[e].map(|i| t.vertex(i));
                        restrict_edge(s, a, c).is_zero()
                    })),
                    "cell" => assert!((0..4).all(|f| {
                        let [a, c, d] = face(w, f);
                        restrict_face(s, a, c, d).is_zero()
                    })),
                    _ => {}
                }
            }
            let v = random_field(&mut r, p as i32 + 1);
            let b = interpolator(1, &t, p, &ip).unwrap().apply_exact(&v).unwrap().breakdown;
            for (name, w) in b.names.iter().zip(&b.corrections) {
                match *name {
                    "edge" => assert!((0..6).all(|e| edge(w, e).integrate_reference().is_zero())),
                    "face_rot" | "face_grad" => assert!((0..6).all(|e| edge(w, e).is_zero())),
                    "cell_curl" | "cell_grad" => assert!((0..4).all(|f| {
                        let [a, c, d] = face(w, f);
                        face_trace(w, a, c, d).is_zero()
                    })),
                    _ => {}
                }
            }
            let b = interpolator(2, &t, p, &ip).unwrap().apply_exact(&v).unwrap().breakdown;
            for (name, w) in b.names.iter().zip(&b.corrections) {
                match *name {
                    "face" => assert!((0..4).all(|f| {
                        let [a, c, d] = face(w, f);
                        face_flux(w, a, c, d).integrate_reference().is_zero()
                    })),
                    "cell_div" | "cell_curl" => assert!((0..4).all(|f| {
                        let [a, c, d] = face(w, f);
                        face_flux(w, a, c, d).is_zero()
                    })),
                    _ => {}
                }
            }
            let last = b.residuals.last().unwrap();
            let field = interpolator(2, &t, p, &ip).unwrap().apply_exact(&v).unwrap().field;
            assert_eq!(&v - &field, *last);
        }
    }
}

#[test]
fn commuting_diagrams_fifty_samples() {
    let mut r = rng(10);
    let t = random_tet(&mut r);
    for ip in modes() {
        for p in 0..3 {
            for _ in 0..50 {
                let u = random_polynomial(&mut r, 3, p as i32 + 3);
                assert_eq!(grad(&pi0(&t, p, &u, &ip).unwrap()), pi1(&t, p, &grad(&u), &ip).unwrap());
                let v = random_field(&mut r, p as i32 + 2);
                assert_eq!(curl(&pi1(&t, p, &v, &ip).unwrap()), pi2(&t, p, &curl(&v), &ip).unwrap());
            }
        }
    }
}

#[test]
fn global_interpolant_reproduces_global_space() {
    let mut r = rng(12);
    let mesh = two_tet_mesh();
    for ip in modes() {
        for p in 0..3 {
            let basis = &reference_space(SpaceKind::W1, p).basis;
            let u = random_combination(&mut r, basis);
            let g = pi_global(&mesh, p, 1, &IntegrableField::Exact(u.clone()), &ip).unwrap();
            let exact = g.exact.unwrap();
            let dm = GlobalDofMap::new(&mesh, SpaceKind::W1, p, BoundaryCondition::None);
            for t in 0..mesh.num_tets() {
                let op = interpolator(1, &mesh.simplex(t), p, &ip).unwrap();
                let local: Vec<Rational> = dm.local[t].iter().map(|d| {
                    let (i, s) = d.unwrap();
                    if s > 0 { exact[i].clone() } else { -&exact[i] }
                }).collect();
                assert_eq!(op.space.combine(&local), u);
            }
        }
    }
}

#[test]
fn callable_inputs_in_the_space_have_zero_error() {
    let mesh = Mesh::reference_tet();
    let v = VectorPolynomial::new(vec![Polynomial::var(3, 1), Polynomial::var(3, 2), Polynomial::var(3, 0)]);
    let cv = curl(&v);
    let f = CallableField::new(move |x| v.eval_f64(x), move |x| cv.eval_f64(x), 8);
    for p in 1..3 {
        let g = pi_global(&mesh, p, 1, &IntegrableField::Callable(f.clone()), &InnerProductSpec::l2()).unwrap();
        let op = interpolator(1, &mesh.simplex(0), p, &InnerProductSpec::l2()).unwrap();
        let exact = op.apply_exact(&VectorPolynomial::new(vec![Polynomial::var(3, 1), Polynomial::var(3, 2), Polynomial::var(3, 0)])).unwrap();
        for (a, b) in g.coeffs.iter().zip(&exact.coeffs) {
            assert!((a - b.to_f64()).abs() < 1e-12);
        }
    }
}

#[test]
fn analytic_fields_converge() {
    let mesh = Mesh::reference_tet();
    for field in AnalyticField::ALL {
        let rows = interp_error_study(&mesh, field, &[1, 2, 3, 4], &InnerProductSpec::l2()).unwrap();
        assert!(rows.windows(2).all(|w| w[1].l2_error < w[0].l2_error), "{field:?}");
        assert!(loglog_slope(&rows) >= 0.9);
    }
    let (e, h, _) = interpolation_error(&mesh, 2, AnalyticField::CurlSine, &InnerProductSpec::fractional_auto()).unwrap();
    assert!(e > 0.0 && h >= e);
}
