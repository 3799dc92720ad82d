//! Exact rationals, polynomials, simplices, quadrature and exact linear algebra.

pub mod linalg;
pub mod poly;
pub mod quadrature;
pub mod rational;
pub mod simplex;

pub use linalg::QMatrix;
pub use poly::{curl, div, grad, Polynomial, VectorPolynomial};
pub use rational::Rational;
pub use simplex::Simplex;
