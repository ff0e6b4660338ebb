//! Small dense linear solves: LU with partial pivoting, Hermitian
//! pseudo-inverse solves, and least-squares projection onto a span.

use num_complex::Complex64;

use super::eig::herm_eig;
use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Solves A X = B for square A by LU with partial pivoting.
pub fn lu_solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.require_square()?;
    if b.rows() != n {
        return Err(Error::DimensionMismatch {
            left: format!("{}x{}", a.rows(), a.cols()),
            right: format!("{}x{}", b.rows(), b.cols()),
            context: "lu_solve",
        });
    }
    let mut lu = a.clone();
    let mut x = b.clone();
    let m = b.cols();

    for k in 0..n {
        // pivot
        let mut piv = k;
        let mut best = lu[(k, k)].norm();
        for i in (k + 1)..n {
            let mag = lu[(i, k)].norm();
            if mag > best {
                best = mag;
                piv = i;
            }
        }
        if best < 1e-300 {
            return Err(Error::Singular {
                context: "lu_solve",
            });
        }
        if piv != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(piv, j)];
                lu[(piv, j)] = tmp;
            }
            for j in 0..m {
                let tmp = x[(k, j)];
                x[(k, j)] = x[(piv, j)];
                x[(piv, j)] = tmp;
            }
        }
        let pivot = lu[(k, k)];
        for i in (k + 1)..n {
            let factor = lu[(i, k)] / pivot;
            if factor.norm() == 0.0 {
                continue;
            }
            lu[(i, k)] = factor;
            for j in (k + 1)..n {
                let tmp = lu[(k, j)];
                lu[(i, j)] -= factor * tmp;
            }
            for j in 0..m {
                let tmp = x[(k, j)];
                x[(i, j)] -= factor * tmp;
            }
        }
    }
    // back substitution
    for j in 0..m {
        for irev in (0..n).rev() {
            let mut acc = x[(irev, j)];
            for k in (irev + 1)..n {
                acc -= lu[(irev, k)] * x[(k, j)];
            }
            x[(irev, j)] = acc / lu[(irev, irev)];
        }
    }
    Ok(x)
}

/// Minimum-norm solve of the Hermitian PSD system G x = b via spectral
/// pseudo-inverse with relative cutoff `rcond`.
pub fn pinv_solve_hermitian(
    g: &ComplexMatrix,
    b: &ComplexMatrix,
    rcond: f64,
) -> Result<ComplexMatrix> {
    let (values, u) = herm_eig(g)?;
    let lmax = values.first().copied().unwrap_or(0.0).max(0.0);
    let cut = rcond * lmax.max(1e-300);
    let proj = u.adjoint().matmul(b);
    let mut scaled = proj;
    for i in 0..scaled.rows() {
        let inv = if values[i] > cut {
            1.0 / values[i]
        } else {
            0.0
        };
        for j in 0..scaled.cols() {
            scaled[(i, j)] *= inv;
        }
    }
    Ok(u.matmul(&scaled))
}

/// Least-squares projection of `target` onto the complex span of `basis`
/// in the Frobenius inner product. Returns (coefficients, projection,
/// residual norm).
pub fn project_onto_span(
    basis: &[ComplexMatrix],
    target: &ComplexMatrix,
) -> Result<(Vec<Complex64>, ComplexMatrix, f64)> {
    assert!(!basis.is_empty());
    let k = basis.len();
    let mut gram = ComplexMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            gram[(i, j)] = basis[i].hs_inner(&basis[j]);
        }
    }
    let mut rhs = ComplexMatrix::zeros(k, 1);
    for i in 0..k {
        rhs[(i, 0)] = basis[i].hs_inner(target);
    }
    let coeffs = pinv_solve_hermitian(&gram, &rhs, 1e-12)?;
    let mut proj = ComplexMatrix::zeros(target.rows(), target.cols());
    for i in 0..k {
        proj = &proj + &basis[i].scale_c(coeffs[(i, 0)]);
    }
    let residual = (target - &proj).fro_norm();
    Ok(((0..k).map(|i| coeffs[(i, 0)]).collect(), proj, residual))
}
