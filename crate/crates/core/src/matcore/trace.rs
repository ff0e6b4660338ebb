//! Faithful traces with one positive weight per factor block.
//!
//! The trace property forces the density to be constant on each factor,
//! so a weight vector over the block profile captures every faithful
//! trace on a block algebra. phi(x) = sum_k w_k Tr(x restricted to
//! block k) = Tr(D x) with D the block-constant diagonal density.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::algebra::BlockAlgebra;
use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeightedTrace {
    block_sizes: Vec<usize>,
    weights: Vec<f64>,
}

impl WeightedTrace {
    pub fn new(block_sizes: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        if block_sizes.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                left: format!("{} blocks", block_sizes.len()),
                right: format!("{} weights", weights.len()),
                context: "WeightedTrace",
            });
        }
        for &w in &weights {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::NonPositiveWeight { value: w });
            }
        }
        Ok(WeightedTrace {
            block_sizes,
            weights,
        })
    }

    /// The plain trace on M_d.
    pub fn standard(d: usize) -> Self {
        WeightedTrace {
            block_sizes: vec![d],
            weights: vec![1.0],
        }
    }

    /// A trace matching the block profile of `algebra`.
    pub fn for_algebra(algebra: &BlockAlgebra, weights: Vec<f64>) -> Result<Self> {
        Self::new(algebra.blocks().to_vec(), weights)
    }

    pub fn dim(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    /// Diagonal density D with phi(x) = Tr(D x).
    pub fn density(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut m = ComplexMatrix::zeros(d, d);
        let mut at = 0;
        for (size, &w) in self.block_sizes.iter().zip(self.weights.iter()) {
            for i in 0..*size {
                m[(at + i, at + i)] = Complex64::new(w, 0.0);
            }
            at += size;
        }
        m
    }

    /// Entrywise weight of diagonal position `i`.
    pub fn weight_at(&self, i: usize) -> f64 {
        let mut at = 0;
        for (size, &w) in self.block_sizes.iter().zip(self.weights.iter()) {
            if i < at + size {
                return w;
            }
            at += size;
        }
        panic!(
            "index {i} out of range for trace of dimension {}",
            self.dim()
        );
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Complex64 {
        debug_assert_eq!(x.rows(), self.dim());
        debug_assert!(x.is_square());
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..x.rows() {
            acc += x[(i, i)] * self.weight_at(i);
        }
        acc
    }

    /// phi(1), the total mass.
    pub fn total(&self) -> f64 {
        self.block_sizes
            .iter()
            .zip(self.weights.iter())
            .map(|(&n, &w)| n as f64 * w)
            .sum()
    }

    pub fn scale(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.block_sizes.clone(),
            self.weights.iter().map(|&w| w * factor).collect(),
        )
    }

    /// Rescaled so that phi(1) = 1.
    pub fn normalized(&self) -> Self {
        self.scale(1.0 / self.total()).expect("positive total")
    }

    /// Pinches onto the commutant of the density: entries between
    /// diagonal positions with different weights are zeroed. Identity
    /// for the plain trace. Operators in this commutant commute with
    /// every function of the density, which is what the certified dual
    /// bounds require of their witnesses.
    pub fn commutant_pinch(&self, x: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_fn(x.rows(), x.cols(), |i, j| {
            if (self.weight_at(i) - self.weight_at(j)).abs() <= 0.0 {
                x[(i, j)]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// L2(phi) inner product <a, b> = phi(a* b).
    pub fn l2_inner(&self, a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
        self.apply(&a.adjoint().matmul(b))
    }

    pub fn l2_norm(&self, x: &ComplexMatrix) -> f64 {
        self.l2_inner(x, x).re.max(0.0).sqrt()
    }

    /// Max traciality defect |phi(ab) - phi(ba)| over basis pairs of the
    /// algebra; zero (to rounding) whenever the profile matches.
    pub fn traciality_defect(&self, algebra: &BlockAlgebra) -> f64 {
        let mut worst = 0.0_f64;
        for a in algebra.basis() {
            for b in algebra.basis() {
                let ab = self.apply(&a.matmul(b));
                let ba = self.apply(&b.matmul(a));
                worst = worst.max((ab - ba).norm());
            }
        }
        worst
    }
}
