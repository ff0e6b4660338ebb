//! Matrix substrate: dense complex matrices, Hermitian spectral
//! calculus, algebra presentations, weighted traces and conditional
//! expectations.

pub mod algebra;
pub mod condexp;
pub mod eig;
pub mod linsolve;
pub mod matrix;
pub mod trace;

pub use algebra::{AlgebraReport, BlockAlgebra};
pub use condexp::{choi_of_map, cond_expectation, superop_of_map, ConditionalExpectation};
pub use eig::{
    herm_eig, herm_func, mat_power, mat_powf, mat_sqrt_psd, min_eigenvalue, op_norm,
    orthonormalize_columns, polar_unitary, psd_clamp, singular_values,
};
pub use matrix::ComplexMatrix;
pub use trace::WeightedTrace;
