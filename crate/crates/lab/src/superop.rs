//! Linear superoperators on M_d in the fixed column-stacking vec
//! convention, with Choi-matrix and projection diagnostics.

use nclab_core::error::{Error, Result};
use nclab_core::matcore::condexp::{choi_of_map, superop_of_map, ConditionalExpectation};
use nclab_core::matcore::eig::min_eigenvalue;
use nclab_core::matcore::matrix::ComplexMatrix;
use nclab_core::matcore::BlockAlgebra;
use nclab_core::multiplier::MultiplierMap;

/// A linear map on M_d stored by its d^2 x d^2 action matrix.
#[derive(Clone, Debug)]
pub struct LinearSuperoperator {
    dim: usize,
    action: ComplexMatrix,
}

impl LinearSuperoperator {
    pub fn from_action(dim: usize, action: ComplexMatrix) -> Result<Self> {
        if action.rows() != dim * dim || action.cols() != dim * dim {
            return Err(Error::DimensionMismatch {
                left: format!("{}x{}", action.rows(), action.cols()),
                right: format!("{0}x{0}", dim * dim),
                context: "LinearSuperoperator",
            });
        }
        Ok(LinearSuperoperator { dim, action })
    }

    pub fn from_map(dim: usize, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Self {
        LinearSuperoperator {
            dim,
            action: superop_of_map(dim, f),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_map(dim, |x| x.clone())
    }

    /// The transpose map x -> x^T; positive but not completely positive.
    pub fn transpose_map(dim: usize) -> Self {
        Self::from_map(dim, |x| x.transpose())
    }

    pub fn from_cond_expectation(e: &ConditionalExpectation) -> Self {
        Self::from_map(e.dim(), |x| e.apply(x))
    }

    pub fn from_multiplier(t: &MultiplierMap) -> Self {
        Self::from_map(t.dim(), |x| t.apply(x).expect("dimension checked"))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn action(&self) -> &ComplexMatrix {
        &self.action
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.rows() != self.dim || x.cols() != self.dim {
            return Err(Error::DimensionMismatch {
                left: format!("{}x{}", x.rows(), x.cols()),
                right: format!("{0}x{0}", self.dim),
                context: "LinearSuperoperator::apply",
            });
        }
        let v = self.action.apply_vec(&x.vec());
        Ok(ComplexMatrix::unvec(&v, self.dim, self.dim))
    }

    pub fn compose(&self, other: &LinearSuperoperator) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: format!("dim {}", self.dim),
                right: format!("dim {}", other.dim),
                context: "compose",
            });
        }
        Ok(LinearSuperoperator {
            dim: self.dim,
            action: self.action.matmul(&other.action),
        })
    }

    pub fn add_scaled(&self, other: &LinearSuperoperator, s: f64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: format!("dim {}", self.dim),
                right: format!("dim {}", other.dim),
                context: "add_scaled",
            });
        }
        Ok(LinearSuperoperator {
            dim: self.dim,
            action: &self.action + &other.action.scale(s),
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        LinearSuperoperator {
            dim: self.dim,
            action: self.action.scale(s),
        }
    }

    pub fn choi(&self) -> ComplexMatrix {
        choi_of_map(self.dim, |x| self.apply(x).expect("dimension checked"))
    }

    /// Smallest eigenvalue of the Hermitian part of the Choi matrix; at
    /// least -tol exactly when the map is completely positive to tol.
    pub fn choi_min_eigenvalue(&self) -> Result<f64> {
        min_eigenvalue(&self.choi().hermitize())
    }

    /// Max residual of the projection property onto the span of `m`:
    /// image containment and fixing of the basis.
    pub fn projection_residual(&self, m: &BlockAlgebra) -> Result<f64> {
        let mut worst = 0.0_f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let image = self.apply(&ComplexMatrix::unit(self.dim, i, j))?;
                let (_, residual) = m.span_project(&image);
                worst = worst.max(residual);
            }
        }
        for b in m.basis() {
            let fixed = self.apply(b)?;
            worst = worst.max((&fixed - b).fro_norm() / b.fro_norm().max(1.0));
        }
        Ok(worst)
    }
}
