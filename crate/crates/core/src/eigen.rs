//! Dense generalized eigensolver and Maxwell cavity spectrum diagnostics.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interp::operator::InterpError;
use crate::interp::projection::InnerProductSpec;
use crate::interp::study::{interpolation_error, AnalyticField};
use crate::meshasm::assembly::{gradient_probes, AssemblyError};
use crate::meshasm::{assemble, discrete_gradient, gradient_space_dim, BoundaryCondition, MaterialSpec, Mesh};

#[derive(Debug, Error)]
pub enum EigenError {
    #[error("mass matrix is not positive definite")]
    MassNotSpd,
    #[error("matrix shapes differ: {0}x{0} vs {1}x{1}")]
    DimensionMismatch(usize, usize),
    #[error("no spectral gap between kernel ({kernel_max:e}) and physical ({physical_min:e}) eigenvalues")]
    NoSpectralGap { kernel_max: f64, physical_min: f64 },
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Interp(#[from] InterpError),
}

/// Eigenpairs of `A x = lambda M x`, ascending, `M`-orthonormal vectors.
#[derive(Clone, Debug)]
pub struct Gevp {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

/// Cholesky reduction `L^-1 A L^-T` and a symmetric eigensolve.
pub fn gevp_solve(a: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<Gevp, EigenError> {
    let n = a.nrows();
    if a.ncols() != n || m.nrows() != n || m.ncols() != n {
        return Err(EigenError::DimensionMismatch(n, m.nrows()));
    }
    if n == 0 {
        return Ok(Gevp {
            values: Vec::new(),
            vectors: DMatrix::zeros(0, 0),
        });
    }
    let chol = m.clone().cholesky().ok_or(EigenError::MassNotSpd)?;
    let l = chol.l();
    let y = l.solve_lower_triangular(a).expect("regular factor");
    let c = l.solve_lower_triangular(&y.transpose()).expect("regular factor");
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let lt = l.transpose();
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        let x = lt.solve_upper_triangular(&eig.eigenvectors.column(i).into_owned()).expect("regular factor");
        vectors.set_column(k, &x);
    }
    Ok(Gevp {
        values: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        vectors,
    })
}

/// `||A x - lambda M x|| / (||A|| ||x||)` with Frobenius norms.
pub fn relative_residual(a: &DMatrix<f64>, m: &DMatrix<f64>, lambda: f64, x: &DVector<f64>) -> f64 {
    let r = a * x - m * x * lambda;
    let scale = a.norm().max(m.norm() * lambda.abs()).max(f64::MIN_POSITIVE);
    r.norm() / (scale * x.norm())
}

/// Nonzero eigenvalues of the perfectly conducting cube `(0, side)^3`,
/// `(pi/side)^2 (k^2 + l^2 + m^2)` with multiplicity, ascending.
pub fn analytic_cube_spectrum(side: f64, count: usize) -> Vec<f64> {
    let s = (std::f64::consts::PI / side).powi(2);
    let mut out = Vec::new();
    let kmax = (count as f64).cbrt() as usize + 3;
    for k in 0..=kmax {
        for l in 0..=kmax {
            for m in 0..=kmax {
                let zeros = [k, l, m].iter().filter(|&&v| v == 0).count();
                let mult = match zeros {
                    0 => 2,
                    1 => 1,
                    _ => 0,
                };
                for _ in 0..mult {
                    out.push(((k * k + l * l + m * m) as f64) * s);
                }
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out.truncate(count);
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeClass {
    Kernel,
    Physical,
    Spurious,
}

impl ModeClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModeClass::Kernel => "kernel",
            ModeClass::Physical => "physical",
            ModeClass::Spurious => "spurious",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Mode {
    pub idx: usize,
    pub lambda: f64,
    pub class: ModeClass,
    pub exact: Option<f64>,
    pub rel_err: Option<f64>,
    pub residual: f64,
    /// Largest normalized `|(eps u, grad phi)|` over the discrete gradients.
    pub divergence_defect: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumOptions {
    pub kernel_rel_tol: f64,
    pub min_gap: f64,
    pub delta: f64,
    /// Reference nonzero eigenvalues, ascending.
    pub analytic: Option<Vec<f64>>,
    /// Upper end of the spurious scan window; defaults to `(1 - delta)`
    /// times the first reference eigenvalue.
    pub window: Option<f64>,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            kernel_rel_tol: 1e-8,
            min_gap: 1e3,
            delta: 0.05,
            analytic: None,
            window: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub p: usize,
    pub dofs: usize,
    pub bc: BoundaryCondition,
    pub eigenvalues: Vec<f64>,
    pub kernel_tol: f64,
    pub kernel_count: usize,
    /// Dimension of the discrete gradient space.
    pub expected_kernel: usize,
    pub nonzero_count: usize,
    pub spurious_count: usize,
    pub window_upper: Option<f64>,
    pub gap: f64,
    pub max_residual: f64,
    pub modes: Vec<Mode>,
}

impl SpectrumReport {
    pub fn physical(&self) -> impl Iterator<Item = &Mode> {
        self.modes.iter().filter(|m| m.class != ModeClass::Kernel)
    }

    pub fn first_physical(&self) -> Option<f64> {
        self.physical().next().map(|m| m.lambda)
    }
}

/// Classify a solved pencil. `gradients` are coefficient vectors of the
/// discrete gradients used for the divergence defect.
pub fn classify(p: usize, bc: BoundaryCondition, a: &DMatrix<f64>, m: &DMatrix<f64>, sol: &Gevp, gradients: Option<&DMatrix<f64>>, expected_kernel: usize, opts: &SpectrumOptions) -> Result<SpectrumReport, EigenError> {
    let n = sol.values.len();
    let lmax = sol.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let tol = opts.kernel_rel_tol * lmax;
    let kernel_count = sol.values.iter().filter(|&&v| v < tol).count();
    let gap = match (kernel_count, sol.values.get(kernel_count)) {
        (0, _) | (_, None) => f64::INFINITY,
        (k, Some(&first)) => first / sol.values[k - 1].abs().max(f64::MIN_POSITIVE),
    };
    if gap < opts.min_gap {
        return Err(EigenError::NoSpectralGap {
            kernel_max: sol.values[kernel_count - 1],
            physical_min: sol.values[kernel_count],
        });
    }
    let window = opts
        .window
        .or_else(|| opts.analytic.as_ref().and_then(|a| a.first()).map(|l| (1.0 - opts.delta) * l));
    let mg = gradients.map(|g| {
        let mg = m * g;
        let norms: Vec<f64> = (0..g.ncols()).map(|j| g.column(j).dot(&mg.column(j)).sqrt()).collect();
        (mg, norms)
    });
    let mut modes = Vec::with_capacity(n);
    let mut physical_idx = 0;
    let mut spurious_count = 0;
    let mut max_residual = 0.0f64;
    for (k, &lambda) in sol.values.iter().enumerate() {
        let x = sol.vectors.column(k).into_owned();
        let residual = relative_residual(a, m, lambda, &x);
        max_residual = max_residual.max(residual);
        let mut class = if k < kernel_count { ModeClass::Kernel } else { ModeClass::Physical };
        if class == ModeClass::Physical && window.is_some_and(|w| lambda < w) {
            class = ModeClass::Spurious;
            spurious_count += 1;
        }
        let (exact, rel_err) = if class == ModeClass::Kernel {
            (None, None)
        } else {
            let e = opts.analytic.as_ref().and_then(|a| a.get(physical_idx)).copied();
            physical_idx += 1;
            (e, e.map(|e| (lambda - e).abs() / e))
        };
        let divergence_defect = match (&mg, class) {
            (Some((mg, norms)), ModeClass::Physical | ModeClass::Spurious) => {
                let xn = x.dot(&(m * &x)).sqrt();
                let d = (0..mg.ncols())
                    .filter(|&j| norms[j] > 0.0)
                    .map(|j| (x.dot(&mg.column(j)) / (xn * norms[j])).abs())
                    .fold(0.0, f64::max);
                Some(d)
            }
            _ => None,
        };
        modes.push(Mode {
            idx: k,
            lambda,
            class,
            exact,
            rel_err,
            residual,
            divergence_defect,
        });
    }
    Ok(SpectrumReport {
        p,
        dofs: n,
        bc,
        eigenvalues: sol.values.clone(),
        kernel_tol: tol,
        kernel_count,
        expected_kernel,
        nonzero_count: n - kernel_count,
        spurious_count,
        window_upper: window,
        gap,
        max_residual,
        modes,
    })
}

/// Assemble, solve and classify the Maxwell pencil on `mesh`.
pub fn maxwell_spectrum(mesh: &Mesh, p: usize, spec: &MaterialSpec, bc: BoundaryCondition, opts: &SpectrumOptions) -> Result<SpectrumReport, EigenError> {
    let sys = assemble(mesh, p, spec, bc)?;
    let sol = gevp_solve(&sys.stiffness, &sys.mass)?;
    let (g, _, _) = discrete_gradient(mesh, p, bc);
    let g = g.to_f64();
    classify(p, bc, &sys.stiffness, &sys.mass, &sol, Some(&g), gradient_space_dim(mesh, p, bc), opts)
}

/// One entry of the discrete compactness trend.
#[derive(Clone, Debug, Serialize)]
pub struct CompactnessPoint {
    pub p: usize,
    pub dofs: usize,
    /// Largest normalized defect of the first `k` physical modes against
    /// gradients of degree `p + 2` probes.
    pub d_p: f64,
    /// The same against gradients of degree `p + 1`, which lie in the space.
    pub d_inner: f64,
    /// `||u - Pi1_p u||_L2` for the reference field.
    pub g_p: f64,
}

fn probe_defect(mesh: &Mesh, p: usize, q: usize, spec: &MaterialSpec, bc: BoundaryCondition, sol: &Gevp, m: &DMatrix<f64>, modes: &[usize]) -> Result<f64, EigenError> {
    let probes = gradient_probes(mesh, p, q, spec, bc)?;
    let mut d = 0.0f64;
    for &k in modes {
        let x = sol.vectors.column(k).into_owned();
        let xn = x.dot(&(m * &x)).sqrt();
        let b = probes.coupling.transpose() * &x;
        for (j, e) in probes.energies.iter().enumerate() {
            if *e > 0.0 {
                d = d.max(b[j].abs() / (xn * e.sqrt()));
            }
        }
    }
    Ok(d)
}

/// `d_p` and `g_p` over a range of degrees.
pub fn compactness_trend(mesh: &Mesh, ps: &[usize], k: usize, spec: &MaterialSpec, bc: BoundaryCondition, field: AnalyticField, ip: &InnerProductSpec) -> Result<Vec<CompactnessPoint>, EigenError> {
    ps.iter()
        .map(|&p| {
            let sys = assemble(mesh, p, spec, bc)?;
            let sol = gevp_solve(&sys.stiffness, &sys.mass)?;
            let report = classify(p, bc, &sys.stiffness, &sys.mass, &sol, None, 0, &SpectrumOptions::default())?;
            let modes: Vec<usize> = (report.kernel_count..sol.values.len()).take(k).collect();
            let d_p = probe_defect(mesh, p, p + 1, spec, bc, &sol, &sys.mass, &modes)?;
            let d_inner = probe_defect(mesh, p, p, spec, bc, &sol, &sys.mass, &modes)?;
            let (g_p, _, _) = interpolation_error(mesh, p, field, ip)?;
            Ok(CompactnessPoint {
                p,
                dofs: sys.dofmap.n_dofs,
                d_p,
                d_inner,
                g_p,
            })
        })
        .collect()
}

#[derive(Serialize)]
struct CsvRow<'a> {
    p: usize,
    dofs: usize,
    idx: usize,
    lambda: f64,
    exact: Option<f64>,
    rel_err: Option<f64>,
    class: &'a str,
}

/// Columns `p,dofs,idx,lambda,exact,rel_err,class`.
pub fn spectrum_csv(reports: &[SpectrumReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in reports {
        for m in &r.modes {
            w.serialize(CsvRow {
                p: r.p,
                dofs: r.dofs,
                idx: m.idx,
                lambda: m.lambda,
                exact: m.exact,
                rel_err: m.rel_err,
                class: m.class.as_str(),
            })
            .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_pencils() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let s = gevp_solve(&m, &m).unwrap();
        assert!(s.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0]));
        let s = gevp_solve(&a, &DMatrix::identity(2, 2)).unwrap();
        assert!((s.values[0] - 1.0).abs() < 1e-12 && (s.values[1] - 2.0).abs() < 1e-12);
        assert!(matches!(gevp_solve(&a, &(-DMatrix::<f64>::identity(2, 2))), Err(EigenError::MassNotSpd)));
    }

    #[test]
    fn cube_spectrum() {
        let s = analytic_cube_spectrum(std::f64::consts::PI, 7);
        let want = [2.0, 2.0, 2.0, 3.0, 3.0, 5.0, 5.0];
        for (a, b) in s.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
