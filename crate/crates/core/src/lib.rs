//! Exact homology of products of cyclic p-groups, Toda-type cycles, and
//! certificates for positive-scalar-curvature bordism classes.

pub mod chainops;
pub mod cli;
pub mod cycles;
pub mod error;
pub mod exactlin;
pub mod grouphom;
pub mod positivity;
pub mod text;

pub use error::{Error, Result};
