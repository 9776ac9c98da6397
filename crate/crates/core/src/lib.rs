//! Completion of partial squared-dissimilarity matrices under a minimum
//! spanning tree constraint.

pub mod construct;
pub mod error;
pub mod eval;
pub mod matrix;
pub mod optimize;
pub mod seed;
pub mod tree;
pub mod workbench;

pub use error::{Error, Result};
