//! Trace-preserving conditional expectations onto a subalgebra.
//!
//! The expectation is realized as the phi-orthogonal projection onto the
//! span of the subalgebra. For a faithful trace on a *-closed unital
//! span this projection is automatically unital, positive, bimodular and
//! completely positive; those properties are verified in tests rather
//! than assumed.

use num_complex::Complex64;

use super::algebra::BlockAlgebra;
use super::matrix::ComplexMatrix;
use super::trace::WeightedTrace;
use crate::error::{Error, Result};

/// A conditional expectation with the phi-orthonormalized basis cached,
/// so repeated applications cost one pass over the basis.
#[derive(Clone, Debug)]
pub struct ConditionalExpectation {
    dim: usize,
    onb: Vec<ComplexMatrix>,
    phi: WeightedTrace,
}

impl ConditionalExpectation {
    /// The phi-orthogonal projection onto `m` is a conditional
    /// expectation only when the modular group of phi fixes `m`; here
    /// that is enforced by requiring the density of phi to commute with
    /// the span. The plain trace pairs with arbitrary subalgebras,
    /// block-constant weights with block-compatible ones.
    pub fn new(m: &BlockAlgebra, phi: &WeightedTrace) -> Result<Self> {
        if phi.dim() != m.dim() {
            return Err(Error::DimensionMismatch {
                left: format!("algebra dim {}", m.dim()),
                right: format!("trace dim {}", phi.dim()),
                context: "ConditionalExpectation",
            });
        }
        let density = phi.density();
        let mut modular_residual = 0.0_f64;
        for b in m.basis() {
            let comm = (&density.matmul(b) - &b.matmul(&density)).max_abs();
            modular_residual = modular_residual.max(comm / b.max_abs().max(1.0));
        }
        if modular_residual > 1e-10 * density.max_abs().max(1.0) {
            return Err(Error::NotSubalgebra {
                reason: format!(
                    "trace density does not commute with the subalgebra (residual {modular_residual:.3e}); no trace-compatible expectation exists"
                ),
            });
        }
        let report = m.check()?;
        if !report.pass {
            return Err(Error::NotSubalgebra {
                reason: format!(
                    "closure residuals: identity {:.2e}, adjoint {:.2e}, product {:.2e}",
                    report.identity_residual, report.adjoint_residual, report.product_residual
                ),
            });
        }
        // phi-orthonormalize the basis (Gram-Schmidt in <a,b> = phi(a* b)).
        let mut onb: Vec<ComplexMatrix> = Vec::new();
        for b in m.basis() {
            let mut v = b.clone();
            for _ in 0..2 {
                for o in &onb {
                    let overlap = phi.l2_inner(o, &v);
                    v = &v - &o.scale_c(overlap);
                }
            }
            let norm = phi.l2_norm(&v);
            if norm > 1e-10 * phi.l2_norm(b).max(1.0) {
                onb.push(v.scale(1.0 / norm));
            }
        }
        Ok(ConditionalExpectation {
            dim: m.dim(),
            onb,
            phi: phi.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for o in &self.onb {
            out = &out + &o.scale_c(self.phi.l2_inner(o, x));
        }
        out
    }

    /// Action matrix of size d^2 x d^2 in the column-stacking convention.
    pub fn superop_matrix(&self) -> ComplexMatrix {
        superop_of_map(self.dim, |x| self.apply(x))
    }

    /// Choi matrix of the expectation as a map M_d -> M_d.
    pub fn choi(&self) -> ComplexMatrix {
        choi_of_map(self.dim, |x| self.apply(x))
    }
}

/// phi-orthogonal conditional expectation of `x` onto `m`.
pub fn cond_expectation(
    x: &ComplexMatrix,
    m: &BlockAlgebra,
    phi: &WeightedTrace,
) -> Result<ComplexMatrix> {
    Ok(ConditionalExpectation::new(m, phi)?.apply(x))
}

/// Matricization of a linear map on M_d: column j of the output is
/// vec(f(unvec(e_j))).
pub fn superop_of_map(d: usize, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> ComplexMatrix {
    let dd = d * d;
    let mut action = ComplexMatrix::zeros(dd, dd);
    for col in 0..dd {
        let mut basis_vec = vec![Complex64::new(0.0, 0.0); dd];
        basis_vec[col] = Complex64::new(1.0, 0.0);
        let x = ComplexMatrix::unvec(&basis_vec, d, d);
        let y = f(&x).vec();
        for (row, v) in y.into_iter().enumerate() {
            action[(row, col)] = v;
        }
    }
    action
}

/// Choi matrix sum_{ij} e_ij (x) f(e_ij) of a map on M_d.
pub fn choi_of_map(d: usize, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> ComplexMatrix {
    let mut choi = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let image = f(&ComplexMatrix::unit(d, i, j));
            for r in 0..d {
                for s in 0..d {
                    choi[(i * d + r, j * d + s)] += image[(r, s)];
                }
            }
        }
    }
    choi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::eig::min_eigenvalue;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pinching_onto_diagonals() {
        let m = BlockAlgebra::block_diagonal(&[1, 1]);
        let phi = WeightedTrace::standard(2);
        let x = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(2.0, 1.0)],
            vec![c(3.0, -1.0), c(4.0, 0.0)],
        ]);
        let e = cond_expectation(&x, &m, &phi).unwrap();
        let expected = ComplexMatrix::diag(&[1.0, 4.0]);
        assert!((&e - &expected).max_abs() < 1e-12);
    }

    #[test]
    fn unitality_for_any_subalgebra() {
        let m = BlockAlgebra::block_diagonal(&[2, 1]);
        let phi = WeightedTrace::new(vec![3], vec![1.0]).unwrap();
        let e = cond_expectation(&ComplexMatrix::identity(3), &m, &phi).unwrap();
        assert!((&e - &ComplexMatrix::identity(3)).max_abs() < 1e-12);
    }

    #[test]
    fn defining_relation_matches_brute_force_on_weighted_blocks() {
        use rand::SeedableRng;
        // N = M_2 (+) M_2 with weights (1, 2), M = scalars (+) scalars.
        let n = BlockAlgebra::block_diagonal(&[2, 2]);
        let m = BlockAlgebra::block_diagonal_with_multiplicity(&[(1, 2), (1, 2)]);
        let phi = WeightedTrace::new(vec![2, 2], vec![1.0, 2.0]).unwrap();
        let exp = ConditionalExpectation::new(&m, &phi).unwrap();

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let x = crate::random::span_element(&mut rng, n.basis());
        let ex = exp.apply(&x);

        // Oracle: solve phi(E(x) m_i) = phi(x m_i) on the basis of M by
        // direct linear algebra over the span coefficients.
        let basis = m.basis();
        let k = basis.len();
        let mut gram = ComplexMatrix::zeros(k, k);
        let mut rhs = ComplexMatrix::zeros(k, 1);
        for i in 0..k {
            for j in 0..k {
                gram[(i, j)] = phi.apply(&basis[j].matmul(&basis[i]));
            }
            rhs[(i, 0)] = phi.apply(&x.matmul(&basis[i]));
        }
        let coeffs = crate::matcore::linsolve::lu_solve(&gram, &rhs).unwrap();
        let mut oracle = ComplexMatrix::zeros(4, 4);
        for j in 0..k {
            oracle = &oracle + &basis[j].scale_c(coeffs[(j, 0)]);
        }
        assert!((&ex - &oracle).max_abs() < 1e-10);

        // Defining relation directly.
        for mb in basis {
            let lhs = phi.apply(&ex.matmul(mb));
            let rhs = phi.apply(&x.matmul(mb));
            assert!((lhs - rhs).norm() < 1e-10);
        }
        // E fixes M.
        for mb in basis {
            assert!((&exp.apply(mb) - mb).max_abs() < 1e-10);
        }
    }

    #[test]
    fn choi_matrix_of_expectation_is_psd() {
        let m = BlockAlgebra::block_diagonal(&[2, 1]);
        let phi = WeightedTrace::new(vec![2, 1], vec![1.0, 2.0]).unwrap();
        let exp = ConditionalExpectation::new(&m, &phi).unwrap();
        let choi = exp.choi();
        assert!(choi.hermitian_deviation() < 1e-10);
        assert!(min_eigenvalue(&choi.hermitize()).unwrap() >= -1e-10);
    }

    #[test]
    fn unverified_subalgebra_is_rejected() {
        let basis = vec![ComplexMatrix::unit(2, 0, 0), ComplexMatrix::unit(2, 0, 1)];
        let bad = BlockAlgebra::with_basis(2, vec![], basis).unwrap();
        let phi = WeightedTrace::standard(2);
        assert!(matches!(
            ConditionalExpectation::new(&bad, &phi),
            Err(Error::NotSubalgebra { .. }) | Err(Error::IdentityNotInSpan { .. })
        ));
    }
}
