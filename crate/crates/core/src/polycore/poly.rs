//! Sparse multivariate polynomials with exact rational coefficients and the
//! vector-calculus operators acting on them.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::rational::{factorial, Rational};

/// Exponent multi-index; entries beyond the polynomial's dimension are zero.
pub type Exponent = [u8; 3];

/// A polynomial in 1, 2 or 3 variables.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<Exponent, Rational>,
}

pub fn total_degree(e: &Exponent) -> u32 {
    e.iter().map(|&k| k as u32).sum()
}

/// All exponents in `dim` variables with total degree `<= max_degree`, in
/// lexicographic order.
pub fn monomials(dim: usize, max_degree: i32) -> Vec<Exponent> {
    let mut out = Vec::new();
    if max_degree < 0 {
        return out;
    }
    let m = max_degree as u8;
    match dim {
        1 => (0..=m).for_each(|a| out.push([a, 0, 0])),
        2 => {
            for a in 0..=m {
                for b in 0..=m - a {
                    out.push([a, b, 0]);
                }
            }
        }
        3 => {
            for a in 0..=m {
                for b in 0..=m - a {
                    for c in 0..=m - a - b {
                        out.push([a, b, c]);
                    }
                }
            }
        }
        _ => panic!("unsupported dimension {dim}"),
    }
    out
}

/// Exponents of total degree exactly `degree`.
pub fn homogeneous_monomials(dim: usize, degree: u32) -> Vec<Exponent> {
    monomials(dim, degree as i32)
        .into_iter()
        .filter(|e| total_degree(e) == degree)
        .collect()
}

/// Dimension of the space of polynomials of degree `<= p` in `dim` variables
/// (zero for negative `p`).
pub fn poly_space_dim(dim: usize, p: i32) -> usize {
    if p < 0 {
        return 0;
    }
    let p = p as usize;
    match dim {
        0 => 1,
        1 => p + 1,
        2 => (p + 1) * (p + 2) / 2,
        3 => (p + 1) * (p + 2) * (p + 3) / 6,
        _ => panic!("unsupported dimension {dim}"),
    }
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        assert!((1..=3).contains(&dim), "unsupported dimension {dim}");
        Polynomial {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: Rational) -> Self {
        let mut p = Self::zero(dim);
        p.add_term([0, 0, 0], c);
        p
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, Rational::ONE)
    }

    /// The coordinate function `x_i`.
    pub fn var(dim: usize, i: usize) -> Self {
        assert!(i < dim);
        let mut e = [0u8; 3];
        e[i] = 1;
        Self::monomial(dim, e, Rational::ONE)
    }

    pub fn monomial(dim: usize, e: Exponent, c: Rational) -> Self {
        debug_assert!(e[dim..].iter().all(|&k| k == 0));
        let mut p = Self::zero(dim);
        p.add_term(e, c);
        p
    }

    /// Build from `(exponent, coefficient)` pairs; repeated exponents accumulate.
    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (Exponent, Rational)>) -> Self {
        let mut p = Self::zero(dim);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    /// Affine function `c0 + sum_i coeffs[i] x_i`.
    pub fn affine(dim: usize, c0: Rational, coeffs: &[Rational]) -> Self {
        let mut p = Self::constant(dim, c0);
        for (i, c) in coeffs.iter().enumerate() {
            let mut e = [0u8; 3];
            e[i] = 1;
            p.add_term(e, c.clone());
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, e: &Exponent) -> Rational {
        self.terms.get(e).cloned().unwrap_or_default()
    }

    /// Total degree; `-1` for the zero polynomial.
    pub fn degree(&self) -> i32 {
        self.terms
            .keys()
            .map(|e| total_degree(e) as i32)
            .max()
            .unwrap_or(-1)
    }

    pub fn add_term(&mut self, e: Exponent, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = o.get() + &c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.dim);
        }
        Polynomial {
            dim: self.dim,
            terms: self.terms.iter().map(|(e, v)| (*e, v * c)).collect(),
        }
    }

    /// `self += c * other`
    pub fn axpy(&mut self, c: &Rational, other: &Polynomial) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        if c.is_zero() {
            return;
        }
        for (e, v) in &other.terms {
            self.add_term(*e, v * c);
        }
    }

    /// Linear combination `sum_i c_i p_i`.
    pub fn combine<'a>(
        dim: usize,
        items: impl IntoIterator<Item = (&'a Rational, &'a Polynomial)>,
    ) -> Self {
        let mut acc = Self::zero(dim);
        for (c, p) in items {
            acc.axpy(c, p);
        }
        acc
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.dim);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Partial derivative with respect to `x_i`.
    pub fn derivative(&self, i: usize) -> Self {
        assert!(i < self.dim);
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut f = *e;
            f[i] -= 1;
            out.add_term(f, c * Rational::from_integer(e[i] as i64));
        }
        out
    }

    /// Part of total degree exactly `k`.
    pub fn homogeneous_part(&self, k: u32) -> Self {
        Polynomial {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| total_degree(e) == k)
                .map(|(e, c)| (*e, c.clone()))
                .collect(),
        }
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        assert!(x.len() >= self.dim);
        let mut acc = Rational::ZERO;
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for i in 0..self.dim {
                if e[i] > 0 {
                    t *= x[i].pow(e[i] as u32);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut t = c.to_f64();
                for i in 0..self.dim {
                    if e[i] > 0 {
                        t *= x[i].powi(e[i] as i32);
                    }
                }
                t
            })
            .sum()
    }

    /// Composition with the affine map `x_i = origin[i] + sum_j cols[j][i] y_j`;
    /// the result is a polynomial in `cols.len()` variables.
    pub fn compose_affine(&self, origin: &[Rational], cols: &[Vec<Rational>]) -> Self {
        let k = cols.len();
        assert!(origin.len() >= self.dim);
        let lin: Vec<Polynomial> = (0..self.dim)
            .map(|i| {
                let c: Vec<Rational> = cols.iter().map(|col| col[i].clone()).collect();
                Polynomial::affine(k, origin[i].clone(), &c)
            })
            .collect();
        let max_deg = self.degree().max(0) as usize;
        let powers: Vec<Vec<Polynomial>> = lin
            .iter()
            .map(|l| {
                let mut v = vec![Polynomial::one(k)];
                for n in 1..=max_deg {
                    let next = &v[n - 1] * l;
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = Polynomial::zero(k);
        for (e, c) in &self.terms {
            let mut t = Polynomial::constant(k, c.clone());
            for i in 0..self.dim {
                if e[i] > 0 {
                    t = &t * &powers[i][e[i] as usize];
                }
            }
            out = &out + &t;
        }
        out
    }

    /// Substitute polynomials (all of a common dimension) for the variables.
    pub fn substitute(&self, values: &[Polynomial]) -> Self {
        assert!(values.len() >= self.dim);
        let k = values[0].dim;
        let max_deg = self.degree().max(0) as usize;
        let powers: Vec<Vec<Polynomial>> = values[..self.dim]
            .iter()
            .map(|l| {
                let mut v = vec![Polynomial::one(k)];
                for n in 1..=max_deg {
                    let next = &v[n - 1] * l;
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = Polynomial::zero(k);
        for (e, c) in &self.terms {
            let mut t = Polynomial::constant(k, c.clone());
            for i in 0..self.dim {
                if e[i] > 0 {
                    t = &t * &powers[i][e[i] as usize];
                }
            }
            out = &out + &t;
        }
        out
    }

    /// Exact integral over the reference simplex `{y_i >= 0, sum y_i <= 1}`:
    /// `int y^a = a! / (|a| + d)!`.
    pub fn integrate_reference(&self) -> Rational {
        let d = self.dim as u32;
        self.terms
            .iter()
            .map(|(e, c)| {
                let num: Rational = e[..self.dim].iter().map(|&k| factorial(k as u32)).product();
                c * &(num / factorial(total_degree(e) + d))
            })
            .sum()
    }

    /// Embed a polynomial into a higher number of variables (new variables unused).
    pub fn lift_dim(&self, dim: usize) -> Self {
        assert!(dim >= self.dim);
        Polynomial {
            dim,
            terms: self.terms.clone(),
        }
    }

    /// Whether the degree is at most `k` (always true for zero).
    pub fn has_degree_at_most(&self, k: i32) -> bool {
        self.degree() <= k
    }

    /// Coefficients as a sparse map keyed by exponent.
    pub fn coefficient_map(&self) -> &BTreeMap<Exponent, Rational> {
        &self.terms
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let names = ["x", "y", "z"];
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            for i in 0..self.dim {
                match e[i] {
                    0 => {}
                    1 => write!(f, "*{}", names[i])?,
                    k => write!(f, "*{}^{}", names[i], k)?,
                }
            }
        }
        Ok(())
    }
}

impl<'a> Add<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &'a Polynomial) -> Polynomial {
        let mut out = self.clone();
        out.axpy(&Rational::ONE, rhs);
        out
    }
}

impl<'a> Sub<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &'a Polynomial) -> Polynomial {
        let mut out = self.clone();
        out.axpy(&-Rational::ONE, rhs);
        out
    }
}

impl<'a> Mul<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &'a Polynomial) -> Polynomial {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let mut out = Polynomial::zero(self.dim);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e = [e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2]];
                out.add_term(e, c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-Rational::ONE)
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: Polynomial) -> Polynomial {
        &self + &rhs
    }
}

impl Sub for Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: Polynomial) -> Polynomial {
        &self - &rhs
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: Polynomial) -> Polynomial {
        &self * &rhs
    }
}

/// A vector field with polynomial components, all of the same dimension.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VectorPolynomial {
    comps: Vec<Polynomial>,
}

impl fmt::Debug for VectorPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.comps.iter()).finish()
    }
}

impl VectorPolynomial {
    pub fn new(comps: Vec<Polynomial>) -> Self {
        assert!(!comps.is_empty());
        let d = comps[0].dim();
        assert!(comps.iter().all(|c| c.dim() == d), "component dimension mismatch");
        VectorPolynomial { comps }
    }

    pub fn zero(dim: usize, n: usize) -> Self {
        VectorPolynomial {
            comps: vec![Polynomial::zero(dim); n],
        }
    }

    /// Constant vector field.
    pub fn constant(dim: usize, v: &[Rational]) -> Self {
        Self::new(v.iter().map(|c| Polynomial::constant(dim, c.clone())).collect())
    }

    /// `p * e_k` with `n` components.
    pub fn unit(p: Polynomial, n: usize, k: usize) -> Self {
        let dim = p.dim();
        let mut comps = vec![Polynomial::zero(dim); n];
        comps[k] = p;
        Self::new(comps)
    }

    /// The position field `x`.
    pub fn position(dim: usize) -> Self {
        Self::new((0..dim).map(|i| Polynomial::var(dim, i)).collect())
    }

    pub fn dim(&self) -> usize {
        self.comps[0].dim()
    }

    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn comps(&self) -> &[Polynomial] {
        &self.comps
    }

    pub fn comp(&self, i: usize) -> &Polynomial {
        &self.comps[i]
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Polynomial::is_zero)
    }

    pub fn degree(&self) -> i32 {
        self.comps.iter().map(Polynomial::degree).max().unwrap_or(-1)
    }

    pub fn map(&self, f: impl Fn(&Polynomial) -> Polynomial) -> Self {
        Self::new(self.comps.iter().map(f).collect())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        self.map(|p| p.scale(c))
    }

    pub fn scale_by_poly(&self, q: &Polynomial) -> Self {
        self.map(|p| p * q)
    }

    pub fn axpy(&mut self, c: &Rational, other: &VectorPolynomial) {
        assert_eq!(self.len(), other.len());
        for (a, b) in self.comps.iter_mut().zip(&other.comps) {
            a.axpy(c, b);
        }
    }

    pub fn combine<'a>(
        dim: usize,
        n: usize,
        items: impl IntoIterator<Item = (&'a Rational, &'a VectorPolynomial)>,
    ) -> Self {
        let mut acc = Self::zero(dim, n);
        for (c, v) in items {
            acc.axpy(c, v);
        }
        acc
    }

    pub fn dot(&self, other: &VectorPolynomial) -> Polynomial {
        assert_eq!(self.len(), other.len());
        let mut acc = Polynomial::zero(self.dim());
        for (a, b) in self.comps.iter().zip(&other.comps) {
            acc = &acc + &(a * b);
        }
        acc
    }

    /// Dot product with a constant vector.
    pub fn dot_const(&self, v: &[Rational]) -> Polynomial {
        assert_eq!(self.len(), v.len());
        Polynomial::combine(self.dim(), v.iter().zip(&self.comps))
    }

    pub fn cross(&self, other: &VectorPolynomial) -> VectorPolynomial {
        assert!(self.len() == 3 && other.len() == 3);
        let (a, b) = (&self.comps, &other.comps);
        VectorPolynomial::new(vec![
            &(&a[1] * &b[2]) - &(&a[2] * &b[1]),
            &(&a[2] * &b[0]) - &(&a[0] * &b[2]),
            &(&a[0] * &b[1]) - &(&a[1] * &b[0]),
        ])
    }

    pub fn eval(&self, x: &[Rational]) -> Vec<Rational> {
        self.comps.iter().map(|c| c.eval(x)).collect()
    }

    pub fn eval_f64(&self, x: &[f64]) -> Vec<f64> {
        self.comps.iter().map(|c| c.eval_f64(x)).collect()
    }

    pub fn compose_affine(&self, origin: &[Rational], cols: &[Vec<Rational>]) -> Self {
        self.map(|p| p.compose_affine(origin, cols))
    }

    /// Apply a constant matrix to the values: `(M v)_i = sum_j m[i][j] v_j`.
    pub fn apply_matrix(&self, m: &[Vec<Rational>]) -> Self {
        let dim = self.dim();
        VectorPolynomial::new(
            m.iter()
                .map(|row| Polynomial::combine(dim, row.iter().zip(&self.comps)))
                .collect(),
        )
    }
}

impl<'a> Add<&'a VectorPolynomial> for &'a VectorPolynomial {
    type Output = VectorPolynomial;
    fn add(self, rhs: &'a VectorPolynomial) -> VectorPolynomial {
        let mut out = self.clone();
        out.axpy(&Rational::ONE, rhs);
        out
    }
}

impl<'a> Sub<&'a VectorPolynomial> for &'a VectorPolynomial {
    type Output = VectorPolynomial;
    fn sub(self, rhs: &'a VectorPolynomial) -> VectorPolynomial {
        let mut out = self.clone();
        out.axpy(&-Rational::ONE, rhs);
        out
    }
}

impl Neg for &VectorPolynomial {
    type Output = VectorPolynomial;
    fn neg(self) -> VectorPolynomial {
        self.scale(&-Rational::ONE)
    }
}

/// Gradient of a scalar polynomial (one component per variable).
pub fn grad(p: &Polynomial) -> VectorPolynomial {
    VectorPolynomial::new((0..p.dim()).map(|i| p.derivative(i)).collect())
}

/// Curl of a 3D vector field.
pub fn curl(v: &VectorPolynomial) -> VectorPolynomial {
    assert!(v.len() == 3 && v.dim() == 3, "curl needs a 3D field");
    let c = v.comps();
    VectorPolynomial::new(vec![
        &c[2].derivative(1) - &c[1].derivative(2),
        &c[0].derivative(2) - &c[2].derivative(0),
        &c[1].derivative(0) - &c[0].derivative(1),
    ])
}

/// Divergence.
pub fn div(v: &VectorPolynomial) -> Polynomial {
    assert_eq!(v.len(), v.dim(), "divergence needs a square field");
    let mut acc = Polynomial::zero(v.dim());
    for (i, c) in v.comps().iter().enumerate() {
        acc = &acc + &c.derivative(i);
    }
    acc
}

/// Vector curl of a planar scalar: `(d_y p, -d_x p)`.
pub fn curl2d(p: &Polynomial) -> VectorPolynomial {
    assert_eq!(p.dim(), 2);
    VectorPolynomial::new(vec![p.derivative(1), -&p.derivative(0)])
}

/// Scalar rotation of a planar field: `d_x v_2 - d_y v_1`.
pub fn rot2d(v: &VectorPolynomial) -> Polynomial {
    assert!(v.len() == 2 && v.dim() == 2);
    &v.comp(1).derivative(0) - &v.comp(0).derivative(1)
}

/// Planar divergence.
pub fn div2d(v: &VectorPolynomial) -> Polynomial {
    assert!(v.len() == 2 && v.dim() == 2);
    div(v)
}

/// Rotate a planar field by +90 degrees: `(v_1, v_2) -> (-v_2, v_1)`.
pub fn rotate90(v: &VectorPolynomial) -> VectorPolynomial {
    assert!(v.len() == 2);
    VectorPolynomial::new(vec![-v.comp(1), v.comp(0).clone()])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    fn x() -> Polynomial {
        Polynomial::var(3, 0)
    }
    fn y() -> Polynomial {
        Polynomial::var(3, 1)
    }
    fn z() -> Polynomial {
        Polynomial::var(3, 2)
    }

    #[test]
    fn grad_examples() {
        assert!(grad(&Polynomial::one(3)).is_zero());
        let g = grad(&(&x() * &y()));
        assert_eq!(g, VectorPolynomial::new(vec![y(), x(), Polynomial::zero(3)]));
        let r2 = &(&(&x() * &x()) + &(&y() * &y())) + &(&z() * &z());
        assert_eq!(grad(&r2), VectorPolynomial::position(3).scale(&q(2)));
    }

    #[test]
    fn curl_examples() {
        let x2y = &(&x() * &x()) * &y();
        assert!(curl(&grad(&x2y)).is_zero());
        // curl (0,0,x) = (dy x - dz 0, dz 0 - dx x, 0) = (0,-1,0)
        let v = VectorPolynomial::new(vec![Polynomial::zero(3), Polynomial::zero(3), x()]);
        assert_eq!(curl(&v), VectorPolynomial::constant(3, &[q(0), q(-1), q(0)]));
        let v = VectorPolynomial::new(vec![-&y(), x(), Polynomial::zero(3)]);
        assert_eq!(curl(&v), VectorPolynomial::constant(3, &[q(0), q(0), q(2)]));
    }

    #[test]
    fn div_examples() {
        assert_eq!(div(&VectorPolynomial::position(3)), Polynomial::constant(3, q(3)));
        let v = VectorPolynomial::new(vec![&(&x() * &x()) * &y(), &y() * &z(), x()]);
        assert!(div(&curl(&v)).is_zero());
        assert!(div(&VectorPolynomial::new(vec![y(), z(), x()])).is_zero());
    }

    #[test]
    fn degree_conventions() {
        assert_eq!(Polynomial::zero(3).degree(), -1);
        assert_eq!(Polynomial::one(2).degree(), 0);
        let p = &(&x() * &y()) + &z();
        assert_eq!(p.degree(), 2);
        assert_eq!(grad(&p).degree(), 1);
        assert_eq!(monomials(3, 2).len(), poly_space_dim(3, 2));
        assert_eq!(monomials(2, 3).len(), poly_space_dim(2, 3));
        assert!(monomials(3, -1).is_empty());
    }

    #[test]
    fn reference_integrals() {
        assert_eq!(Polynomial::one(3).integrate_reference(), Rational::new(1, 6));
        assert_eq!((&x() * &y()).integrate_reference(), Rational::new(1, 120));
        assert_eq!(Polynomial::one(2).integrate_reference(), Rational::new(1, 2));
        assert_eq!(Polynomial::var(1, 0).integrate_reference(), Rational::new(1, 2));
    }

    #[test]
    fn affine_composition() {
        // p(x,y,z) = x*y + z at x = 1 + s, y = 2t, z = s - t
        let p = &(&x() * &y()) + &z();
        let origin = [q(1), q(0), q(0)];
        let cols = vec![vec![q(1), q(0), q(1)], vec![q(0), q(2), q(-1)]];
        let r = p.compose_affine(&origin, &cols);
        let s = Polynomial::var(2, 0);
        let t = Polynomial::var(2, 1);
        let expected = &(&(&Polynomial::one(2) + &s) * &t.scale(&q(2))) + &(&s - &t);
        assert_eq!(r, expected);
    }
}
