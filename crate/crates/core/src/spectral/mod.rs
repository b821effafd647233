//! Fourier-space field arithmetic on the periodic torus.

mod field;
mod grid;
mod symbol;

pub use field::{NormConvention, Product, Rank, SpectralField};
pub use grid::{Grid, Padding};
pub use symbol::Symbol;

pub use rustfft::num_complex::Complex64;
