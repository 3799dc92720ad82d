//! High-order first-family Nedelec edge elements on tetrahedra.
//!
//! Local spaces are built from Poincare liftings in exact rational arithmetic,
//! interpolated by commuting projection-based operators and assembled into
//! Maxwell cavity eigenvalue problems.

pub mod derham;
pub mod eigen;
pub mod interp;
pub mod localspace;
pub mod meshasm;
pub mod poincare;
pub mod polycore;
pub mod suite;

pub use polycore::{Polynomial, QMatrix, Rational, Simplex, VectorPolynomial};
