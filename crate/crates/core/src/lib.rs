//! Complex hyperbolic plane: isometries, invariants of point configurations,
//! Heisenberg geometry and decompositions into antiholomorphic involutions.

pub mod decomp;
pub mod error;
pub mod heisenberg;
pub mod hermlin;
pub mod invariants;
pub mod isometry;
pub mod par;
pub mod picard;
pub mod sample;

pub use error::{GeomError, Result};
