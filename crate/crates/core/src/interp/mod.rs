//! Projection-based interpolation: facet projections, liftings, extensions and
//! the commuting interpolation operators.

pub mod lifting;
pub mod projection;
pub mod operator;
pub mod global;
pub mod study;
