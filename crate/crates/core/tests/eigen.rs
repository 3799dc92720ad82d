use nalgebra::{DMatrix, DVector};
use pnedelec::eigen::*;
use pnedelec::interp::global::pi_global;
use pnedelec::interp::operator::{CallableField, IntegrableField};
use pnedelec::interp::projection::InnerProductSpec;
use pnedelec::interp::study::AnalyticField;
use pnedelec::localspace::SpaceKind;
use pnedelec::meshasm::*;
use pnedelec::Rational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn pi_cube() -> Mesh {
    Mesh::cube_grid(1).scaled(&"3.14159265358979323846".parse::<Rational>().unwrap())
}

fn cavity_options() -> SpectrumOptions {
    SpectrumOptions {
        analytic: Some(analytic_cube_spectrum(PI, 60)),
        ..Default::default()
    }
}

fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    &b * b.transpose() + DMatrix::identity(n, n) * (n as f64)
}

#[test]
fn random_pencil_residuals() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let a = random_spd(50, &mut rng);
    let m = random_spd(50, &mut rng);
    let s = gevp_solve(&a, &m).unwrap();
    for k in 0..50 {
        let x = s.vectors.column(k).into_owned();
        assert!(relative_residual(&a, &m, s.values[k], &x) <= 1e-8);
    }
    let gram = s.vectors.transpose() * &m * &s.vectors;
    assert!((gram - DMatrix::identity(50, 50)).amax() <= 1e-8);
    assert!(s.values.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn missing_gap_is_an_error() {
    let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1e-9, 1e-7, 1.0]));
    let m = DMatrix::identity(3, 3);
    let s = gevp_solve(&a, &m).unwrap();
    let r = classify(1, BoundaryCondition::None, &a, &m, &s, None, 1, &SpectrumOptions::default());
    assert!(matches!(r, Err(EigenError::NoSpectralGap { .. })));
}

#[test]
fn pec_cube_cavity() {
    let mesh = pi_cube();
    let mut errs = Vec::new();
    for p in 1..=3 {
        let r = maxwell_spectrum(&mesh, p, &MaterialSpec::default(), BoundaryCondition::Dirichlet, &cavity_options()).unwrap();
        assert_eq!(r.kernel_count, r.expected_kernel);
        assert!(r.max_residual <= 1e-8);
        for m in r.physical() {
            assert!(m.divergence_defect.unwrap() <= 1e-8);
        }
        errs.push(r.physical().next().unwrap().rel_err.unwrap());
        if p >= 2 {
            assert_eq!(r.spurious_count, 0);
            let below = r.eigenvalues.iter().filter(|&&l| l > r.kernel_tol && l < 1.9).count();
            assert_eq!(below, 0);
        }
        let csv = spectrum_csv(std::slice::from_ref(&r));
        assert!(csv.starts_with("p,dofs,idx,lambda,exact,rel_err,class\n"));
        assert_eq!(csv.lines().count(), r.dofs + 1);
    }
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    assert!(errs[2] <= 0.05);
}

#[test]
fn kernel_dimension_both_conditions() {
    let mesh = Mesh::cube_grid(1);
    for bc in [BoundaryCondition::None, BoundaryCondition::Dirichlet] {
        for p in 1..=3 {
            let r = maxwell_spectrum(&mesh, p, &MaterialSpec::default(), bc, &SpectrumOptions::default()).unwrap();
            assert_eq!(r.kernel_count, gradient_space_dim(&mesh, p, bc), "{bc:?} p={p}");
        }
    }
}

/// The lowest p = 1 mode sits below the analytic value but is the resolved
/// form of the symmetric combination of the three lowest cavity modes.
#[test]
fn lowest_p1_mode_is_physical() {
    let mesh = pi_cube();
    let p = 1;
    let r = maxwell_spectrum(&mesh, p, &MaterialSpec::default(), BoundaryCondition::Dirichlet, &cavity_options()).unwrap();
    let first = r.physical().next().unwrap();
    assert!(first.lambda < 1.9);
    let sys = assemble(&mesh, p, &MaterialSpec::default(), BoundaryCondition::Dirichlet).unwrap();
    let sol = gevp_solve(&sys.stiffness, &sys.mass).unwrap();
    let x = sol.vectors.column(first.idx).into_owned();

    let u = CallableField::new(
        |x: &[f64; 3]| vec![x[1].sin() * x[2].sin(), x[0].sin() * x[2].sin(), x[0].sin() * x[1].sin()],
        |x: &[f64; 3]| {
            let (s, c) = (x.map(f64::sin), x.map(f64::cos));
            vec![s[0] * (c[1] - c[2]), s[1] * (c[2] - c[0]), s[2] * (c[0] - c[1])]
        },
        12,
    );
    let gi = pi_global(&mesh, p, 1, &IntegrableField::Callable(u), &InnerProductSpec::l2()).unwrap();
    let free = GlobalDofMap::new(&mesh, SpaceKind::W1, p, BoundaryCondition::None);
    let mut y = DVector::zeros(sys.dofmap.n_dofs);
    for t in 0..mesh.num_tets() {
        for (i, d) in sys.dofmap.local[t].iter().enumerate() {
            if let (Some((g, _)), Some((h, _))) = (d, free.local[t][i]) {
                y[*g] = gi.coeffs[h];
            }
        }
    }
    let m = &sys.mass;
    let cos = x.dot(&(m * &y)).abs() / (x.dot(&(m * &x)).sqrt() * y.dot(&(m * &y)).sqrt());
    assert!(cos > 0.9, "{cos}");
}

#[test]
fn compactness_series() {
    let mesh = pi_cube();
    let pts = compactness_trend(&mesh, &[1, 2, 3], 3, &MaterialSpec::default(), BoundaryCondition::Dirichlet, AnalyticField::CurlSine, &InnerProductSpec::l2()).unwrap();
    for pt in &pts {
        assert!(pt.d_inner <= 1e-8);
        assert!(pt.d_p.is_finite());
    }
    assert!(pts.windows(2).all(|w| w[1].g_p < w[0].g_p));
}
