//! Pseudo-spectral solver and verification diagnostics for the regularized
//! Ericksen-Leslie family of nematic liquid crystal models on the periodic
//! torus.

// `!(x > 0.0)` is deliberate: NaN has to fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod coefficients;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod operators;
pub mod spectral;

pub use error::{Error, Result};
