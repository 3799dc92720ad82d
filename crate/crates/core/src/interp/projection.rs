//! Inner products and the edge projection onto zero-mean polynomials.
//!
//! Edge functions are handled through their shifted Legendre coefficients.
//! The `L2` projection truncates the expansion. The fractional
//! `H^{-1+eps}` projection uses the cosine spectral norm
//! `sum_m (1 + (m pi)^2)^{-1+eps} g_m h_m`; each higher Legendre mode is
//! mapped to its oblique image in the range, computed in floating point and
//! frozen to a fixed dyadic rational so that the projector stays exact.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polycore::quadrature::gauss_legendre_01;
use crate::polycore::{Polynomial, QMatrix, Rational};

/// Legendre modes beyond `p` represented exactly in fractional mode.
pub const FRACTIONAL_HEADROOM: usize = 12;
const COSINE_MODES: usize = 400;
const DYADIC_BITS: i64 = 40;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProjectionError {
    #[error("edge trace of degree {degree} exceeds the fractional projector range {max}")]
    DegreeTooHigh { degree: i32, max: usize },
}

/// Edge inner product.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum IpMode {
    L2,
    /// `H^{-1+eps}`; `eps = None` selects `1 / (10 ln(p + 1))`.
    Fractional { eps: Option<f64> },
}

/// Inner products used by the facet projections. Faces and cells always use
/// `L2`-type products; only edges are configurable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnerProductSpec {
    pub edge: IpMode,
}

impl Default for InnerProductSpec {
    fn default() -> Self {
        Self::l2()
    }
}

impl InnerProductSpec {
    pub fn l2() -> Self {
        InnerProductSpec { edge: IpMode::L2 }
    }

    pub fn fractional(eps: f64) -> Self {
        assert!(eps > 0.0 && eps < 0.5, "eps must lie in (0, 1/2)");
        InnerProductSpec {
            edge: IpMode::Fractional { eps: Some(eps) },
        }
    }

    pub fn fractional_auto() -> Self {
        InnerProductSpec {
            edge: IpMode::Fractional { eps: None },
        }
    }

    /// Effective `eps` at degree `p` (None for `L2`).
    pub fn epsilon(&self, p: usize) -> Option<f64> {
        match self.edge {
            IpMode::L2 => None,
            IpMode::Fractional { eps: Some(e) } => Some(e),
            IpMode::Fractional { eps: None } => Some(epsilon_schedule(p)),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self.edge {
            IpMode::L2 => "l2",
            IpMode::Fractional { .. } => "fractional",
        }
    }

    pub(crate) fn key(&self, p: usize) -> u64 {
        self.epsilon(p).map_or(0, f64::to_bits)
    }
}

/// `eps(p) = 1 / (10 ln(p + 1))`, with `p` clamped to at least 1.
pub fn epsilon_schedule(p: usize) -> f64 {
    let p = p.max(1) as f64;
    1.0 / (10.0 * (p + 1.0).ln())
}

fn binomial(n: u64, k: u64) -> Rational {
    let mut r = Rational::ONE;
    for i in 0..k {
        r = r * Rational::from_integer((n - i) as i64) / Rational::from_integer((i + 1) as i64);
    }
    r
}

/// Shifted Legendre polynomial `P_j(2 xi - 1)` on `[0, 1]`.
pub fn shifted_legendre(j: usize) -> Polynomial {
    static CACHE: OnceLock<Mutex<HashMap<usize, Polynomial>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&j) {
        return p.clone();
    }
    let mut out = Polynomial::zero(1);
    for k in 0..=j as u64 {
        let mut c = binomial(j as u64, k) * binomial(j as u64 + k, k);
        if (j as u64 + k) % 2 == 1 {
            c = -c;
        }
        out.add_term([k as u8, 0, 0], c);
    }
    cache.lock().unwrap().insert(j, out.clone());
    out
}

/// Legendre coefficients `a_0..=a_n` of `g` on `[0, 1]`.
pub fn legendre_coefficients(g: &Polynomial, n: usize) -> Vec<Rational> {
    let moments: Vec<Rational> = (0..=n + 1)
        .map(|k| crate::localspace::moment_1d(g, k as u8))
        .collect();
    (0..=n)
        .map(|j| {
            let pj = shifted_legendre(j);
            let s: Rational = pj.terms().map(|(e, c)| c * &moments[e[0] as usize]).sum();
            s * Rational::from_integer(2 * j as i64 + 1)
        })
        .collect()
}

/// Floating Legendre coefficients of a sampled function.
pub fn legendre_coefficients_f64(g: impl Fn(f64) -> f64, n: usize, points: usize) -> Vec<f64> {
    let (x, w) = gauss_legendre_01(points);
    let vals: Vec<f64> = x.iter().map(|&t| g(t)).collect();
    (0..=n)
        .map(|j| {
            let pj = shifted_legendre(j);
            let s: f64 = x.iter().zip(&w).zip(&vals).map(|((t, w), v)| w * v * pj.eval_f64(&[*t])).sum();
            s * (2 * j + 1) as f64
        })
        .collect()
}

/// Gram matrix of `P~_0..=P~_n` in the fractional cosine norm.
pub fn fractional_gram(n: usize, eps: f64) -> DMatrix<f64> {
    let sub = 200;
    let (gx, gw) = gauss_legendre_01(16);
    let polys: Vec<Polynomial> = (0..=n).map(shifted_legendre).collect();
    let mut pts = Vec::with_capacity(sub * gx.len());
    for s in 0..sub {
        for (x, w) in gx.iter().zip(&gw) {
            pts.push(((s as f64 + x) / sub as f64, w / sub as f64));
        }
    }
    let vals: Vec<Vec<f64>> = polys
        .iter()
        .map(|p| pts.iter().map(|(x, _)| p.eval_f64(&[*x])).collect())
        .collect();
    // cosine coefficients against sqrt(2) cos(m pi xi), constant mode separately
    let mut coef = DMatrix::<f64>::zeros(n + 1, COSINE_MODES + 1);
    for m in 0..=COSINE_MODES {
        let basis: Vec<f64> = pts
            .iter()
            .map(|(x, w)| {
                let b = if m == 0 { 1.0 } else { 2f64.sqrt() * (m as f64 * PI * x).cos() };
                b * w
            })
            .collect();
        for j in 0..=n {
            coef[(j, m)] = vals[j].iter().zip(&basis).map(|(v, b)| v * b).sum();
        }
    }
    let weights: Vec<f64> = (0..=COSINE_MODES)
        .map(|m| (1.0 + (m as f64 * PI).powi(2)).powf(-1.0 + eps))
        .collect();
    DMatrix::from_fn(n + 1, n + 1, |i, k| {
        (0..=COSINE_MODES).map(|m| weights[m] * coef[(i, m)] * coef[(k, m)]).sum()
    })
}

fn dyadic(x: f64) -> Rational {
    let scale = (1i64 << DYADIC_BITS) as f64;
    Rational::new((x * scale).round() as i64, 1i64 << DYADIC_BITS)
}

/// Projection of edge functions onto `d/dxi` of the edge bubbles, i.e. onto
/// zero-mean `P_p([0, 1])`, in Legendre coordinates.
#[derive(Clone, Debug)]
pub struct EdgeProjector {
    pub p: usize,
    pub eps: Option<f64>,
    /// Rows `j = 1..=p`, columns `a_0..=a_N`.
    pub matrix: QMatrix,
}

impl EdgeProjector {
    pub fn new(p: usize, ip: &InnerProductSpec) -> Arc<EdgeProjector> {
        type Cache = Mutex<HashMap<(usize, u64), Arc<EdgeProjector>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let key = (p, ip.key(p));
        if let Some(e) = cache.lock().unwrap().get(&key) {
            return e.clone();
        }
        let e = Arc::new(Self::build(p, ip.epsilon(p)));
        cache.lock().unwrap().insert(key, e.clone());
        e
    }

    fn build(p: usize, eps: Option<f64>) -> EdgeProjector {
        let n = match eps {
            None => p,
            Some(_) => p + FRACTIONAL_HEADROOM,
        };
        let mut m = QMatrix::zeros(p, n + 1);
        for j in 1..=p {
            m[(j - 1, j)] = Rational::ONE;
        }
        if let (Some(eps), true) = (eps, p > 0) {
            let g = fractional_gram(n, eps);
            let gpp = g.view((1, 1), (p, p)).into_owned();
            let chol = gpp.cholesky().expect("fractional Gram is positive definite");
            for j in p + 1..=n {
                let rhs: DVector<f64> = g.view((1, j), (p, 1)).column(0).into_owned();
                let k = chol.solve(&rhs);
                for i in 0..p {
                    m[(i, j)] = dyadic(k[i]);
                }
            }
        }
        EdgeProjector { p, eps, matrix: m }
    }

    /// Number of Legendre coefficients consumed.
    pub fn n_data(&self) -> usize {
        self.matrix.ncols()
    }

    /// Coefficients on `P~_1..=P~_p` of the projection of `g`.
    pub fn project_coefficients(&self, g: &Polynomial) -> Result<Vec<Rational>, ProjectionError> {
        let max = self.n_data() - 1;
        if self.eps.is_some() && g.degree() > max as i32 {
            return Err(ProjectionError::DegreeTooHigh {
                degree: g.degree(),
                max,
            });
        }
        Ok(self.matrix.mul_vec(&legendre_coefficients(g, max)))
    }

    pub fn project(&self, g: &Polynomial) -> Result<Polynomial, ProjectionError> {
        let c = self.project_coefficients(g)?;
        let mut out = Polynomial::zero(1);
        for (j, cj) in c.iter().enumerate() {
            out.axpy(cj, &shifted_legendre(j + 1));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_roundtrip() {
        let xi = Polynomial::var(1, 0);
        let g = &(&xi.pow(3) - &xi) + &Polynomial::constant(1, Rational::new(2, 7));
        let a = legendre_coefficients(&g, 3);
        let mut r = Polynomial::zero(1);
        for (j, c) in a.iter().enumerate() {
            r.axpy(c, &shifted_legendre(j));
        }
        assert_eq!(r, g);
        assert_eq!(legendre_coefficients(&shifted_legendre(2), 4)[2], Rational::ONE);
    }

    #[test]
    fn projectors_are_idempotent() {
        let xi = Polynomial::var(1, 0);
        let g = &xi.pow(5) + &xi.pow(2);
        for ip in [InnerProductSpec::l2(), InnerProductSpec::fractional_auto()] {
            for p in 1..4 {
                let e = EdgeProjector::new(p, &ip);
                let pg = e.project(&g).unwrap();
                assert_eq!(moment(&pg), Rational::ZERO);
                assert_eq!(e.project(&pg).unwrap(), pg);
            }
        }
    }

    fn moment(g: &Polynomial) -> Rational {
        crate::localspace::moment_1d(g, 0)
    }

    #[test]
    fn fractional_projection_is_orthogonal() {
        let p = 2;
        let eps = 0.2;
        let e = EdgeProjector::new(p, &InnerProductSpec::fractional(eps));
        let g = fractional_gram(p + FRACTIONAL_HEADROOM, eps);
        // residual of P~_5 is orthogonal to P~_1, P~_2
        for i in 1..=p {
            let mut r = g[(i, 5)];
            for k in 1..=p {
                r -= e.matrix[(k - 1, 5)].to_f64() * g[(i, k)];
            }
            assert!(r.abs() < 1e-10, "{r}");
        }
    }

    #[test]
    fn schedule() {
        assert_eq!(epsilon_schedule(0), epsilon_schedule(1));
        assert!(epsilon_schedule(1) < 0.5);
        assert!(epsilon_schedule(10) < epsilon_schedule(2));
    }
}
