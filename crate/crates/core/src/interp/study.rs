//! Interpolation error studies for smooth fields.

use serde::{Deserialize, Serialize};

use super::global::pi_global;
use super::operator::{cell_points, interpolator, CallableField, IntegrableField, InterpError};
use super::projection::InnerProductSpec;
use crate::meshasm::{BoundaryCondition, GlobalDofMap, Mesh};
use crate::polycore::quadrature::{points_for_degree, tet_rule};
use crate::polycore::{curl, Polynomial, VectorPolynomial};
use crate::localspace::SpaceKind;

/// Smooth test fields with closed-form curls.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalyticField {
    /// `grad(sin x sin y sin z)`, curl-free.
    GradSine,
    /// `curl(0, 0, sin x sin y)`, divergence-free.
    CurlSine,
    /// `(e^y, e^z, e^x)`.
    ExpCycle,
}

impl AnalyticField {
    pub const ALL: [AnalyticField; 3] = [AnalyticField::GradSine, AnalyticField::CurlSine, AnalyticField::ExpCycle];

    pub fn name(&self) -> &'static str {
        match self {
            AnalyticField::GradSine => "grad_sine",
            AnalyticField::CurlSine => "curl_sine",
            AnalyticField::ExpCycle => "exp_cycle",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s)
    }

    pub fn value(&self, x: &[f64; 3]) -> [f64; 3] {
        let (sx, sy, sz) = (x[0].sin(), x[1].sin(), x[2].sin());
        let (cx, cy, cz) = (x[0].cos(), x[1].cos(), x[2].cos());
        match self {
            AnalyticField::GradSine => [cx * sy * sz, sx * cy * sz, sx * sy * cz],
            AnalyticField::CurlSine => [sx * cy, -cx * sy, 0.0],
            AnalyticField::ExpCycle => [x[1].exp(), x[2].exp(), x[0].exp()],
        }
    }

    pub fn curl(&self, x: &[f64; 3]) -> [f64; 3] {
        match self {
            AnalyticField::GradSine => [0.0; 3],
            AnalyticField::CurlSine => [0.0, 0.0, 2.0 * x[0].sin() * x[1].sin()],
            AnalyticField::ExpCycle => [-x[2].exp(), -x[0].exp(), -x[1].exp()],
        }
    }

    /// The field as an interpolation argument with quadrature order `order`.
    pub fn callable(self, order: usize) -> CallableField {
        CallableField::new(move |x| self.value(x).to_vec(), move |x| self.curl(x).to_vec(), order)
    }
}

/// Default quadrature order for callable inputs at degree `p`.
pub fn default_order(p: usize) -> usize {
    2 * p + 6
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorRow {
    pub p: usize,
    pub dofs: usize,
    #[serde(rename = "L2_error")]
    pub l2_error: f64,
    #[serde(rename = "Hcurl_error")]
    pub hcurl_error: f64,
    pub ip_mode: String,
}

/// Polynomial with floating coefficients for fast evaluation.
struct FloatPoly(Vec<([u8; 3], f64)>);

impl FloatPoly {
    fn new(p: &Polynomial) -> Self {
        FloatPoly(p.terms().map(|(e, c)| (*e, c.to_f64())).collect())
    }

    fn eval(&self, x: &[f64; 3]) -> f64 {
        self.0
            .iter()
            .map(|(e, c)| c * x[0].powi(e[0] as i32) * x[1].powi(e[1] as i32) * x[2].powi(e[2] as i32))
            .sum()
    }
}

fn float_field(v: &VectorPolynomial) -> Vec<FloatPoly> {
    v.comps().iter().map(FloatPoly::new).collect()
}

/// `(||u - Pi1 u||_L2, ||u - Pi1 u||_Hcurl, dofs)` over the mesh.
pub fn interpolation_error(mesh: &Mesh, p: usize, field: AnalyticField, ip: &InnerProductSpec) -> Result<(f64, f64, usize), InterpError> {
    let f = IntegrableField::Callable(field.callable(default_order(p)));
    let g = pi_global(mesh, p, 1, &f, ip)?;
    let dm = GlobalDofMap::new(mesh, SpaceKind::W1, p, BoundaryCondition::None);
    let rule = tet_rule(points_for_degree(2 * p + 10));
    let (mut l2, mut c2) = (0.0, 0.0);
    for t in 0..mesh.num_tets() {
        let op = interpolator(1, &mesh.simplex(t), p, ip)?;
        let coeffs: Vec<f64> = dm.local[t]
            .iter()
            .map(|m| m.map_or(0.0, |(i, s)| g.coeffs[i] * s as f64))
            .collect();
        let vals: Vec<Vec<FloatPoly>> = op.space.basis.iter().map(float_field).collect();
        let curls: Vec<Vec<FloatPoly>> = op.space.basis.iter().map(|b| float_field(&curl(b))).collect();
        let (pts, wts) = cell_points(&mesh.simplex(t).to_f64(), &rule);
        for (x, w) in pts.iter().zip(&wts) {
            let mut u = field.value(x);
            let mut cu = field.curl(x);
            for (i, c) in coeffs.iter().enumerate() {
                if *c == 0.0 {
                    continue;
                }
                for k in 0..3 {
                    u[k] -= c * vals[i][k].eval(x);
                    cu[k] -= c * curls[i][k].eval(x);
                }
            }
            l2 += w * u.iter().map(|v| v * v).sum::<f64>();
            c2 += w * cu.iter().map(|v| v * v).sum::<f64>();
        }
    }
    Ok((l2.sqrt(), (l2 + c2).sqrt(), dm.n_dofs))
}

/// Error table over a range of degrees.
pub fn interp_error_study(mesh: &Mesh, field: AnalyticField, ps: &[usize], ip: &InnerProductSpec) -> Result<Vec<ErrorRow>, InterpError> {
    ps.iter()
        .map(|&p| {
            let (l2, hc, dofs) = interpolation_error(mesh, p, field, ip)?;
            Ok(ErrorRow {
                p,
                dofs,
                l2_error: l2,
                hcurl_error: hc,
                ip_mode: ip.tag().to_string(),
            })
        })
        .collect()
}

/// Least-squares slope of `log(err)` against `log(p)`, negated.
pub fn loglog_slope(rows: &[ErrorRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| ((r.p as f64).ln(), r.l2_error.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    -sxy / sxx
}

pub fn error_table_csv(rows: &[ErrorRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf8")
}
