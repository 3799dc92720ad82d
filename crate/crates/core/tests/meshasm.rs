use nalgebra::DMatrix;
use pnedelec::eigen::gevp_solve;
use pnedelec::localspace::SpaceKind;
use pnedelec::meshasm::assembly::{diagonal_tensor, identity_tensor, to_coo, AssemblyError};
use pnedelec::meshasm::*;
use pnedelec::polycore::simplex::face_trace;
use pnedelec::suite::two_tet_mesh;
use pnedelec::{Rational, VectorPolynomial};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

#[test]
fn generated_mesh_counts() {
    let r = Mesh::reference_tet();
    assert_eq!((r.num_tets(), r.num_vertices(), r.edges.len(), r.faces.len()), (1, 4, 6, 4));
    let c = Mesh::generate(MeshKind::Cube6);
    assert_eq!((c.num_tets(), c.num_vertices(), c.edges.len(), c.faces.len()), (6, 8, 19, 18));
    assert_eq!(Mesh::cube_grid(2).num_tets(), 48);
    let vol: Rational = (0..c.num_tets()).map(|t| c.simplex(t).volume()).fold(Rational::ZERO, |a, b| &a + &b);
    assert_eq!(vol, Rational::ONE);
}

#[test]
fn dof_counts() {
    let r = Mesh::reference_tet();
    assert_eq!(GlobalDofMap::new(&r, SpaceKind::W1, 1, BoundaryCondition::None).n_dofs, 20);
    assert_eq!(GlobalDofMap::new(&r, SpaceKind::W1, 1, BoundaryCondition::Dirichlet).n_dofs, 0);
    let c = Mesh::generate(MeshKind::Cube6);
    assert_eq!(GlobalDofMap::new(&c, SpaceKind::W1, 0, BoundaryCondition::None).n_dofs, 19);
}

#[test]
fn single_tet_lowest_order_stiffness_rank() {
    let (a, m, _) = assemble_exact(&Mesh::reference_tet(), 0, &MaterialSpec::default(), BoundaryCondition::None).unwrap();
    assert_eq!(a.rank(), 3);
    assert_eq!(a, a.transpose());
    assert_eq!(m, m.transpose());
}

/// One interior edge: the diagonal Whitney function of the unit Kuhn cube has
/// Rayleigh quotient `4 / (1/5) = 20` (computed independently by symbolic
/// integration over the six tetrahedra).
#[test]
fn kuhn_cube_whitney_rayleigh_quotient() {
    let (a, m, dm) = assemble_exact(&Mesh::generate(MeshKind::Cube6), 0, &MaterialSpec::default(), BoundaryCondition::Dirichlet).unwrap();
    assert_eq!(dm.n_dofs, 1);
    assert_eq!(&a[(0, 0)] / &m[(0, 0)], q(20, 1));
}

#[test]
fn mass_is_positive_definite() {
    let s = assemble(&Mesh::generate(MeshKind::Cube6), 1, &MaterialSpec::default(), BoundaryCondition::None).unwrap();
    let ev = s.mass.clone().symmetric_eigenvalues();
    assert!(ev.min() > 0.0);
    assert!((&s.stiffness - s.stiffness.transpose()).amax() == 0.0);
}

#[test]
fn stiffness_kernel_is_the_gradient_space() {
    let c = Mesh::generate(MeshKind::Cube6);
    for bc in [BoundaryCondition::None, BoundaryCondition::Dirichlet] {
        for p in 1..3 {
            let (a, _, _) = assemble_exact(&c, p, &MaterialSpec::default(), bc).unwrap();
            let (g, _, w1) = discrete_gradient(&c, p, bc);
            assert!(a.mul(&g).is_zero());
            assert_eq!(g.rank(), gradient_space_dim(&c, p, bc));
            assert_eq!(w1.n_dofs - a.rank(), gradient_space_dim(&c, p, bc));
        }
    }
}

#[test]
fn conformity_across_shared_face() {
    let mesh = two_tet_mesh();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let shared = mesh.face_tets.iter().position(|t| t.len() == 2).unwrap();
    let [a, b, c] = mesh.faces[shared].map(|i| mesh.vertices[i].clone());
    for p in 0..4 {
        let dm = GlobalDofMap::new(&mesh, SpaceKind::W1, p, BoundaryCondition::None);
        let x: Vec<Rational> = (0..dm.n_dofs).map(|_| q(rng.gen_range(-5..=5), rng.gen_range(1..=3))).collect();
        let traces: Vec<VectorPolynomial> = (0..2)
            .map(|t| {
                let space = pnedelec::localspace::build_w1(&mesh.simplex(t), p);
                let local: Vec<Rational> = dm.local[t].iter().map(|d| {
                    let (i, s) = d.unwrap();
                    if s > 0 { x[i].clone() } else { -&x[i] }
                }).collect();
                face_trace(&space.combine(&local), &a, &b, &c)
            })
            .collect();
        assert_eq!(traces[0], traces[1], "p={p}");
    }
}

#[test]
fn anisotropic_material_and_rejection() {
    let c = Mesh::generate(MeshKind::Cube6);
    let eps = diagonal_tensor([q(1, 1), q(2, 1), q(4, 1)]);
    let spec = MaterialSpec::uniform(eps, identity_tensor()).unwrap();
    let (a, m, _) = assemble_exact(&c, 1, &spec, BoundaryCondition::Dirichlet).unwrap();
    let (a0, m0, _) = assemble_exact(&c, 1, &MaterialSpec::default(), BoundaryCondition::Dirichlet).unwrap();
    assert_eq!(a, a0);
    assert_ne!(m, m0);
    let bad = diagonal_tensor([q(1, 1), q(-1, 1), q(1, 1)]);
    assert!(matches!(MaterialSpec::uniform(bad, identity_tensor()), Err(AssemblyError::NotSpd(_))));
}

#[test]
fn region_materials() {
    let c = Mesh::generate(MeshKind::Cube6);
    let text = c.to_text();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let n = lines.len();
    lines[n - 1].push_str(" 1");
    for l in &mut lines[n - 6..n - 1] {
        l.push_str(" 0");
    }
    let two = Mesh::from_text(&lines.join("\n")).unwrap();
    assert_eq!(two.regions[5], 1);
    let spec = MaterialSpec {
        regions: vec![Material::default(), Material { eps: diagonal_tensor([q(3, 1), q(3, 1), q(3, 1)]), mu: identity_tensor() }],
    };
    assert!(assemble(&two, 1, &spec, BoundaryCondition::None).is_ok());
    assert!(assemble(&two, 1, &MaterialSpec::default(), BoundaryCondition::None).is_err());
}

#[test]
fn assembly_is_deterministic_across_thread_counts() {
    let c = Mesh::cube_grid(2);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
            assemble(&c, 1, &MaterialSpec::default(), BoundaryCondition::Dirichlet).unwrap()
        })
    };
    let (s1, s4) = (run(1), run(4));
    assert_eq!(s1.stiffness, s4.stiffness);
    assert_eq!(s1.mass, s4.mass);
    assert_eq!(to_coo(&s1.mass), to_coo(&s4.mass));
}

#[test]
fn coordinate_export() {
    let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, -2.5, 3.0]);
    let text = to_coo(&m);
    assert_eq!(text.lines().count(), 3);
    assert!(text.contains("1 0 -2.5e0"));
}

#[test]
fn mesh_parse_errors() {
    assert!(matches!(Mesh::from_text("2 1\n0 0 0\n"), Err(MeshError::Parse { .. })));
    assert!(Mesh::from_text("4 1\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n0 1 2 9\n").is_err());
    assert!(Mesh::from_text("4 1\n0 0 0\n1 0 0\n2 0 0\n0 0 1\n0 1 2 3\n").is_err());
}

#[test]
fn eigen_mass_cholesky_on_grid() {
    let s = assemble(&Mesh::cube_grid(2), 0, &MaterialSpec::default(), BoundaryCondition::Dirichlet).unwrap();
    assert!(gevp_solve(&s.stiffness, &s.mass).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn text_round_trip(n in 1usize..3, num in 1i64..50, den in 1i64..8) {
        let m = Mesh::cube_grid(n).scaled(&q(num, den));
        let back = Mesh::from_text(&m.to_text()).unwrap();
        prop_assert_eq!(back, m);
    }
}
