//! Seeded verification suite over the local spaces, complexes and projectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::derham::{verify_local_sequence, verify_zero_trace_sequence, Check};
use crate::interp::global::{pi_global, space_kind};
use crate::interp::operator::{interpolator, pi0, pi1, pi2, IntegrableField};
use crate::interp::projection::InnerProductSpec;
use crate::localspace::{dim_p, dim_w1, dim_w2, dof_matrix, vector_monomials, w1_spanning_basis, w2_spanning_basis, Facet, SpaceKind};
use crate::meshasm::{BoundaryCondition, GlobalDofMap, Mesh};
use crate::poincare::Anchor;
use crate::polycore::poly::monomials;
use crate::polycore::simplex::{cross, dot, sub, TET_EDGES, TET_FACES};
use crate::polycore::{curl, grad, Polynomial, Rational, Simplex, VectorPolynomial};

/// Sparse polynomial of total degree `<= deg` with small rational coefficients.
pub fn random_polynomial(rng: &mut impl Rng, dim: usize, deg: i32) -> Polynomial {
    let mut p = Polynomial::zero(dim);
    for e in monomials(dim, deg) {
        if rng.gen_bool(0.5) {
            p.add_term(e, Rational::new(rng.gen_range(-5..=5), rng.gen_range(1..=4)));
        }
    }
    p
}

pub fn random_field(rng: &mut impl Rng, deg: i32) -> VectorPolynomial {
    VectorPolynomial::new((0..3).map(|_| random_polynomial(rng, 3, deg)).collect())
}

/// Nondegenerate tetrahedron with small integer vertices.
pub fn random_tet(rng: &mut impl Rng) -> Simplex {
    loop {
        let v: Vec<[i64; 3]> = (0..4).map(|_| [0; 3].map(|_| rng.gen_range(-3..=3))).collect();
        if let Ok(t) = Simplex::from_i64(&v) {
            return t;
        }
    }
}

/// Two tetrahedra sharing the face `{(1,0,0), (0,1,0), (0,0,1)}`.
pub fn two_tet_mesh() -> Mesh {
    let v: Vec<Vec<Rational>> = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]]
        .iter()
        .map(|p| p.iter().map(|&x| Rational::from_integer(x)).collect())
        .collect();
    Mesh::new(v, vec![[0, 1, 2, 3], [1, 2, 3, 4]], None).expect("valid mesh")
}

/// Product of affine functions vanishing on the boundary faces of `mesh`.
pub fn boundary_bubble(mesh: &Mesh) -> Polynomial {
    let mut b = Polynomial::one(3);
    for (f, on) in mesh.faces.iter().zip(mesh.boundary_faces()) {
        if on {
            let [a, q, r] = f.map(|i| &mesh.vertices[i]);
            let n = cross(&sub(q, a), &sub(r, a));
            b = &b * &Polynomial::affine(3, -dot(&n, a), &n);
        }
    }
    b
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteOptions {
    pub samples: usize,
    pub seed: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { samples: 10, seed: 0 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub p: usize,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl SuiteReport {
    pub fn failures(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.holds).map(|c| c.name.as_str()).collect()
    }
}

fn check(out: &mut Vec<Check>, name: impl Into<String>, holds: bool) {
    out.push(Check { name: name.into(), holds });
}

pub fn dimension_checks(p: usize, out: &mut Vec<Check>) {
    let pi = p as i32;
    let space = |k| crate::localspace::reference_space(k, p).dim();
    check(out, "dimension/w1", space(SpaceKind::W1) == (1 + p) * (3 + p) * (4 + p) / 2 && dim_w1(pi) == space(SpaceKind::W1));
    check(out, "dimension/w2", space(SpaceKind::W2) == dim_w2(pi));
    check(out, "dimension/scalar", space(SpaceKind::Scalar) == dim_p(3, pi + 1));
    let alt = 1 - dim_p(3, pi + 1) as i64 + dim_w1(pi) as i64 - dim_w2(pi) as i64 + dim_p(3, pi) as i64;
    check(out, "dimension/alternating_sum", alt == 0);
}

pub fn unisolvence_checks(p: usize, tets: &[(&str, &Simplex)], out: &mut Vec<Check>) {
    let anchor = Anchor::origin(3);
    let spans = [
        ("scalar", SpaceKind::Scalar, vector_monomials(3, 1, p as i32 + 1)),
        ("w1", SpaceKind::W1, w1_spanning_basis(p, &anchor).unwrap_or_default()),
        ("w2", SpaceKind::W2, w2_spanning_basis(p, &anchor).unwrap_or_default()),
    ];
    for (tag, tet) in tets {
        for (name, kind, s) in &spans {
            let v = dof_matrix(*kind, p, tet, s);
            check(out, format!("unisolvence/{tag}/{name}"), v.nrows() == v.ncols() && v.inverse().is_some());
        }
    }
}

pub fn exactness_checks(p: usize, tets: &[(&str, &Simplex)], out: &mut Vec<Check>) {
    for (tag, tet) in tets {
        for (kind, r) in [("full", verify_local_sequence(tet, p)), ("zero_trace", verify_zero_trace_sequence(tet, p))] {
            match r {
                Ok(rep) => {
                    let failures = rep.failures();
                    check(out, format!("exactness/{tag}/{kind}"), failures.is_empty());
                    for f in failures {
                        check(out, format!("exactness/{tag}/{kind}/{f}"), false);
                    }
                }
                Err(_) => check(out, format!("exactness/{tag}/{kind}"), false),
            }
        }
    }
}

pub fn projector_checks(p: usize, tet: &Simplex, ip: &InnerProductSpec, rng: &mut impl Rng, samples: usize, out: &mut Vec<Check>) {
    let tag = ip.tag();
    for level in 0..3 {
        let holds = interpolator(level, tet, p, ip).is_ok_and(|op| {
            op.space.basis.iter().enumerate().all(|(i, b)| {
                op.apply_exact(b).is_ok_and(|r| r.coeffs.iter().enumerate().all(|(j, c)| *c == if i == j { Rational::ONE } else { Rational::ZERO }))
            })
        });
        check(out, format!("projector/level{level}/{tag}"), holds);
        let idem = (0..samples.min(5)).all(|_| {
            let u = match level {
                0 => VectorPolynomial::new(vec![random_polynomial(rng, 3, p as i32 + 3)]),
                _ => random_field(rng, p as i32 + 2),
            };
            interpolator(level, tet, p, ip).is_ok_and(|op| match op.apply_exact(&u) {
                Ok(once) => op.apply_exact(&once.field).is_ok_and(|twice| twice.field == once.field),
                Err(_) => false,
            })
        });
        check(out, format!("idempotent/level{level}/{tag}"), idem);
    }
    let mut grad_ok = true;
    let mut curl_ok = true;
    for _ in 0..samples {
        let u = random_polynomial(rng, 3, p as i32 + 3);
        grad_ok &= matches!((pi0(tet, p, &u, ip), pi1(tet, p, &grad(&u), ip)), (Ok(a), Ok(b)) if grad(&a) == b);
        let v = random_field(rng, p as i32 + 2);
        curl_ok &= matches!((pi1(tet, p, &v, ip), pi2(tet, p, &curl(&v), ip)), (Ok(a), Ok(b)) if curl(&a) == b);
    }
    check(out, format!("commuting/grad/{tag}"), grad_ok);
    check(out, format!("commuting/curl/{tag}"), curl_ok);
}

fn closure_of_face(f: usize) -> Vec<Facet> {
    let fv = TET_FACES[f];
    let mut out: Vec<Facet> = fv.iter().map(|&v| Facet::Vertex(v)).collect();
    out.extend(TET_EDGES.iter().enumerate().filter(|(_, e)| fv.contains(&e[0]) && fv.contains(&e[1])).map(|(i, _)| Facet::Edge(i)));
    out.push(Facet::Face(f));
    out
}

fn as_level(level: usize, s: Polynomial, v: VectorPolynomial) -> VectorPolynomial {
    if level == 0 {
        VectorPolynomial::new(vec![s])
    } else {
        v
    }
}

/// Shared-face agreement, boundary-zero preservation and per-face locality.
pub fn locality_checks(p: usize, tet: &Simplex, ip: &InnerProductSpec, rng: &mut impl Rng, out: &mut Vec<Check>) {
    let mesh = two_tet_mesh();
    let tag = ip.tag();
    let bubble = boundary_bubble(&mesh);
    for level in 0..3 {
        let u = as_level(level, random_polynomial(rng, 3, p as i32 + 2), random_field(rng, p as i32 + 1));
        let conform = pi_global(&mesh, p, level, &IntegrableField::Exact(u.clone()), ip).is_ok_and(|g| g.exact.is_some());
        check(out, format!("conformity/level{level}/{tag}"), conform);

        let c = random_polynomial(rng, 3, 0);
        let z = as_level(level, &bubble * &c, VectorPolynomial::new((0..3).map(|_| &bubble * &random_polynomial(rng, 3, 0)).collect()));
        let zero = match (pi_global(&mesh, p, level, &IntegrableField::Exact(z), ip), space_kind(level)) {
            (Ok(g), Ok(kind)) => {
                let free = GlobalDofMap::new(&mesh, kind, p, BoundaryCondition::None);
                let inner = GlobalDofMap::new(&mesh, kind, p, BoundaryCondition::Dirichlet);
                let exact = g.exact.unwrap_or_default();
                (0..mesh.num_tets()).all(|t| {
                    free.local[t].iter().zip(&inner.local[t]).all(|(f, i)| match (f, i) {
                        (Some((gi, _)), None) => exact.get(*gi).is_some_and(Rational::is_zero),
                        _ => true,
                    })
                })
            }
            _ => false,
        };
        check(out, format!("boundary_zero/level{level}/{tag}"), zero);

        let local = interpolator(level, tet, p, ip).is_ok_and(|op| {
            let bary = tet.barycentric();
            (0..4).all(|f| {
                let opposite = (0..4).find(|v| !TET_FACES[f].contains(v)).expect("four vertices");
                let w = as_level(level, random_polynomial(rng, 3, p as i32), random_field(rng, p as i32)).scale_by_poly(&bary[opposite]);
                let keep = closure_of_face(f);
                match (op.apply_exact(&u), op.apply_exact(&(&u + &w))) {
                    (Ok(a), Ok(b)) => op
                        .space
                        .facet_partition
                        .iter()
                        .filter(|(fc, _)| keep.contains(fc))
                        .all(|(_, r)| a.coeffs[r.clone()] == b.coeffs[r.clone()]),
                    _ => false,
                }
            })
        });
        check(out, format!("trace_locality/level{level}/{tag}"), local);
    }
}

/// Every check for one degree on the reference and a seeded random tetrahedron.
pub fn run_suite(p: usize, opts: &SuiteOptions) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(p as u64));
    let reference = Simplex::reference(3);
    let random = random_tet(&mut rng);
    let tets = [("reference", &reference), ("random", &random)];
    let mut checks = Vec::new();
    dimension_checks(p, &mut checks);
    unisolvence_checks(p, &tets, &mut checks);
    exactness_checks(p, &tets, &mut checks);
    for ip in [InnerProductSpec::l2(), InnerProductSpec::fractional_auto()] {
        projector_checks(p, &random, &ip, &mut rng, opts.samples, &mut checks);
        locality_checks(p, &random, &ip, &mut rng, &mut checks);
    }
    let passed = checks.iter().all(|c| c.holds);
    SuiteReport { p, checks, passed }
}
