//! Experiment layer over the operator-algebra kernels: superoperator
//! diagnostics, hypertrace construction, projection-constant estimates,
//! and the reproducible experiment runner behind the `nclab` binary.

pub mod checks;
pub mod constant;
pub mod experiments;
pub mod hypertrace;
pub mod report;
pub mod superop;

pub use superop::LinearSuperoperator;
