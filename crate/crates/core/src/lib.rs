//! Numerical laboratory for distance fields and constant-gradient-norm
//! functions.

pub mod cli;
pub mod distfield;
pub mod error;
pub mod numcore;
pub mod witness;

pub use error::{Error, Result};
