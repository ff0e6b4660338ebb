//! Numerical kernels for finite-dimensional operator algebras: weighted
//! Schatten norms and row/column tuple norms, two-sided multiplier maps
//! with certified S_p norm intervals, complex-interpolation certificates
//! on the strip, and operator-valued spectral factorization of positive
//! trigonometric polynomials.

pub mod error;
pub mod interp;
pub mod matcore;
pub mod multiplier;
pub mod random;
pub mod schatten;
pub mod szego;

pub use error::{Error, Result};
pub use matcore::{BlockAlgebra, ComplexMatrix, WeightedTrace};
