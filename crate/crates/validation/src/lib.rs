//! Acceptance criteria for the pnedelec library, each returning a verdict
//! with a one-line detail string.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pnedelec::derham::Check;
use pnedelec::eigen::{analytic_cube_spectrum, compactness_trend, maxwell_spectrum, SpectrumOptions, SpectrumReport};
use pnedelec::interp::projection::InnerProductSpec;
use pnedelec::interp::study::{interp_error_study, loglog_slope, AnalyticField};
use pnedelec::localspace::{dim_w1, reference_space, SpaceKind};
use pnedelec::meshasm::assembly::{diagonal_tensor, identity_tensor};
use pnedelec::meshasm::{BoundaryCondition, MaterialSpec, Mesh, MeshKind};
use pnedelec::poincare::{lift_d, lift_r, lift_r2d, Anchor};
use pnedelec::polycore::poly::div2d;
use pnedelec::polycore::{curl, div, Rational, Simplex};
use pnedelec::suite::{dimension_checks, exactness_checks, locality_checks, projector_checks, random_field, random_polynomial, random_tet, unisolvence_checks};

pub const PI_DECIMAL: &str = "3.14159265358979323846";
const SEED: u64 = 2024;

pub struct Verdict {
    pub id: usize,
    pub passed: bool,
    pub detail: String,
}

fn verdict(id: usize, checks: &[Check], what: String) -> Verdict {
    let failed: Vec<&str> = checks.iter().filter(|c| !c.holds).map(|c| c.name.as_str()).collect();
    let detail = if failed.is_empty() {
        format!("{what}: {} checks hold", checks.len())
    } else {
        format!("{what}: {} of {} checks fail ({})", failed.len(), checks.len(), failed.join(", "))
    };
    Verdict { id, passed: failed.is_empty(), detail }
}

fn tagged(checks: Vec<Check>, p: usize) -> Vec<Check> {
    checks
        .into_iter()
        .map(|c| Check {
            name: format!("p{p}/{}", c.name),
            holds: c.holds,
        })
        .collect()
}

fn pi_cube() -> Mesh {
    Mesh::generate(MeshKind::Cube6).scaled(&PI_DECIMAL.parse::<Rational>().expect("decimal"))
}

fn rng(p: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED + p as u64)
}

pub fn dimensions() -> Verdict {
    let mut checks = Vec::new();
    for p in 0..=5usize {
        let built = reference_space(SpaceKind::W1, p).dim();
        let formula = (1 + p) * (3 + p) * (4 + p) / 2;
        checks.push(Check {
            name: format!("p{p}/w1 {built} vs {formula}"),
            holds: built == formula && dim_w1(p as i32) == formula,
        });
    }
    for p in 0..=3 {
        let mut c = Vec::new();
        dimension_checks(p, &mut c);
        checks.extend(tagged(c, p));
    }
    verdict(1, &checks, "dim W1 for p=0..5, alternating sums for p=0..3".into())
}

pub fn unisolvence() -> Verdict {
    let mut checks = Vec::new();
    for p in 0..=4 {
        let reference = Simplex::reference(3);
        let random = random_tet(&mut rng(p));
        let mut c = Vec::new();
        unisolvence_checks(p, &[("reference", &reference), ("random", &random)], &mut c);
        checks.extend(tagged(c, p));
    }
    verdict(2, &checks, "exact dof matrices for p=0..4".into())
}

pub fn poincare_inverses() -> Verdict {
    let mut r = ChaCha8Rng::seed_from_u64(SEED);
    let q = |n, d| Rational::new(n, d);
    let anchors3 = [
        Anchor::origin(3),
        Anchor(vec![q(1, 1), q(1, 2), q(-1, 1)]),
        Anchor(vec![q(-2, 3), q(3, 1), q(1, 5)]),
    ];
    let anchors2 = [Anchor::origin(2), Anchor(vec![q(1, 3), q(-2, 1)]), Anchor(vec![q(5, 2), q(1, 1)])];
    let (mut curl_ok, mut div_ok, mut planar_ok) = (0usize, 0usize, 0usize);
    let n = 200;
    for _ in 0..n {
        let u = curl(&random_field(&mut r, 6));
        let s = random_polynomial(&mut r, 3, 5);
        let t = random_polynomial(&mut r, 2, 5);
        curl_ok += anchors3.iter().all(|a| u.degree() <= 5 && curl(&lift_r(&u, a)) == u) as usize;
        div_ok += anchors3.iter().all(|a| div(&lift_d(&s, a)) == s) as usize;
        planar_ok += anchors2.iter().all(|a| div2d(&lift_r2d(&t, a)) == t) as usize;
    }
    let checks = [("curl R", curl_ok), ("div D", div_ok), ("div2d R2d", planar_ok)].map(|(name, k)| Check {
        name: format!("{name} {k}/{n}"),
        holds: k == n,
    });
    let detail = format!("{n} random inputs of degree <= 5 at 3 anchors: curl R {curl_ok}/{n}, div D {div_ok}/{n}, div2d R2d {planar_ok}/{n}");
    Verdict {
        id: 3,
        passed: checks.iter().all(|c| c.holds),
        detail,
    }
}

pub fn exact_sequences() -> Verdict {
    let mut checks = Vec::new();
    for p in 0..=3 {
        let reference = Simplex::reference(3);
        let random = random_tet(&mut rng(p));
        let mut c = Vec::new();
        exactness_checks(p, &[("reference", &reference), ("random", &random)], &mut c);
        checks.extend(tagged(c, p));
    }
    verdict(4, &checks, "full and zero-trace sequences for p=0..3 on two tetrahedra".into())
}

pub fn projectors(samples: usize) -> Verdict {
    let mut checks = Vec::new();
    for p in 0..=3 {
        let mut r = rng(p);
        let tet = random_tet(&mut r);
        for ip in [InnerProductSpec::l2(), InnerProductSpec::fractional_auto()] {
            let mut c = Vec::new();
            projector_checks(p, &tet, &ip, &mut r, samples, &mut c);
            checks.extend(tagged(c, p));
        }
    }
    verdict(5, &checks, format!("idempotence and commuting diagrams, {samples} samples per p, p=0..3, both inner products"))
}

pub fn trace_locality() -> Verdict {
    let mut checks = Vec::new();
    for p in 0..=3 {
        let mut r = rng(p);
        let tet = random_tet(&mut r);
        for ip in [InnerProductSpec::l2(), InnerProductSpec::fractional_auto()] {
            let mut c = Vec::new();
            locality_checks(p, &tet, &ip, &mut r, &mut c);
            checks.extend(tagged(c, p));
        }
    }
    verdict(6, &checks, "two-tet conformity, boundary zero and face locality for p=0..3".into())
}

fn spectra(spec: &MaterialSpec, ps: &[usize], opts: &SpectrumOptions) -> Result<Vec<SpectrumReport>, String> {
    let mesh = pi_cube();
    ps.iter().map(|&p| maxwell_spectrum(&mesh, p, spec, BoundaryCondition::Dirichlet, opts).map_err(|e| e.to_string())).collect()
}

fn failure(id: usize, what: &str, e: String) -> Verdict {
    Verdict {
        id,
        passed: false,
        detail: format!("{what}: {e}"),
    }
}

pub fn cavity() -> Verdict {
    let spec = MaterialSpec::uniform(identity_tensor(), identity_tensor()).expect("identity material");
    let opts = SpectrumOptions {
        analytic: Some(analytic_cube_spectrum(std::f64::consts::PI, 64)),
        window: Some(1.9),
        ..Default::default()
    };
    let reports = match spectra(&spec, &[1, 2, 3], &opts) {
        Ok(r) => r,
        Err(e) => return failure(7, "cavity", e),
    };
    let kernel = reports.iter().all(|r| r.kernel_count == r.expected_kernel);
    let spurious = reports.iter().all(|r| r.spurious_count == 0);
    let errs: Vec<f64> = reports.iter().map(|r| r.physical().next().and_then(|m| m.rel_err).unwrap_or(f64::INFINITY)).collect();
    let decay = errs.windows(2).all(|w| w[1] < w[0]) && errs[2] <= 0.05;
    let per_p: Vec<String> = reports
        .iter()
        .zip(&errs)
        .map(|(r, e)| format!("p={} kernel {}/{} below 1.9 {} rel err {e:.3e}", r.p, r.kernel_count, r.expected_kernel, r.spurious_count))
        .collect();
    Verdict {
        id: 7,
        passed: kernel && spurious && decay,
        detail: format!("(a) {} (b) {} (c) {}; {}", pf(kernel), pf(spurious), pf(decay), per_p.join("; ")),
    }
}

fn pf(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "fail"
    }
}

pub fn interpolation_decay() -> Verdict {
    let l2 = InnerProductSpec::l2();
    let rows = match interp_error_study(&Mesh::generate(MeshKind::ReferenceTet), AnalyticField::GradSine, &[1, 2, 3, 4], &l2) {
        Ok(r) => r,
        Err(e) => return failure(8, "interpolation", e.to_string()),
    };
    let decreasing = rows.windows(2).all(|w| w[1].l2_error < w[0].l2_error);
    let slope = loglog_slope(&rows);
    let spec = MaterialSpec::uniform(identity_tensor(), identity_tensor()).expect("identity material");
    let trend = match compactness_trend(&pi_cube(), &[1, 2, 3], 3, &spec, BoundaryCondition::Dirichlet, AnalyticField::CurlSine, &l2) {
        Ok(t) => t,
        Err(e) => return failure(8, "compactness trend", e.to_string()),
    };
    let gap = trend.windows(2).all(|w| w[1].g_p < w[0].g_p);
    let errs: Vec<String> = rows.iter().map(|r| format!("{:.2e}", r.l2_error)).collect();
    let gs: Vec<String> = trend.iter().map(|t| format!("{:.3}", t.g_p)).collect();
    Verdict {
        id: 8,
        passed: decreasing && slope >= 0.9 && gap,
        detail: format!("L2 errors p=1..4 [{}] slope {slope:.2}; g_p p=1..3 [{}]", errs.join(", "), gs.join(", ")),
    }
}

pub fn anisotropic_material() -> Verdict {
    let d = |x| Rational::from_integer(x);
    let spec = MaterialSpec::uniform(diagonal_tensor([d(1), d(2), d(4)]), identity_tensor()).expect("spd material");
    let reference = match spectra(&spec, &[5], &SpectrumOptions { window: Some(0.0), ..Default::default() }) {
        Ok(r) => r,
        Err(e) => return failure(9, "reference run", e),
    };
    let Some(lambda1) = reference[0].first_physical() else {
        return failure(9, "reference run", "no physical eigenvalue".into());
    };
    let defaults = SpectrumOptions::default();
    let window = (1.0 - defaults.delta) * lambda1;
    let opts = SpectrumOptions { window: Some(window), ..defaults };
    let reports = match spectra(&spec, &[1, 2, 3], &opts) {
        Ok(r) => r,
        Err(e) => return failure(9, "anisotropic cavity", e),
    };
    let kernel = reports.iter().all(|r| r.kernel_count == r.expected_kernel);
    let spurious = reports.iter().all(|r| r.spurious_count == 0);
    let per_p: Vec<String> = reports
        .iter()
        .map(|r| format!("p={} kernel {}/{} spurious {} first {:.4}", r.p, r.kernel_count, r.expected_kernel, r.spurious_count, r.first_physical().unwrap_or(f64::NAN)))
        .collect();
    Verdict {
        id: 9,
        passed: kernel && spurious,
        detail: format!("eps=diag(1,2,4), p=5 lambda1 {lambda1:.6}, window {window:.6}; (a) {} (b) {}; {}", pf(kernel), pf(spurious), per_p.join("; ")),
    }
}
