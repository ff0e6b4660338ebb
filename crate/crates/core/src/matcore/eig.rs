//! Hermitian spectral calculus.
//!
//! A cyclic complex Jacobi iteration is the single spectral primitive;
//! every matrix function (powers, square roots, operator norms, polar
//! parts, PSD projections) routes through it, which keeps results
//! deterministic across runs of the same binary.

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues in descending order with a matching unitary of
/// column eigenvectors, so that `H = U diag(values) U*`. The input is
/// symmetrized internally; deviations beyond `1e-10 * max(1, |H|_max)`
/// are rejected.
pub fn herm_eig(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = h.require_square()?;
    if !h.is_finite() {
        return Err(Error::NonFinite {
            context: "herm_eig",
        });
    }
    let tol = 1e-10 * h.max_abs().max(1.0);
    let dev = h.hermitian_deviation();
    if dev > tol {
        return Err(Error::NotHermitian {
            deviation: dev,
            tol,
        });
    }
    let mut a = h.hermitize();
    let mut v = ComplexMatrix::identity(n);

    let scale = a.fro_norm().max(1e-300);
    let stop = (1e-15 * scale) * (1e-15 * scale) * (n * n) as f64;

    for _sweep in 0..60 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let phase = apq / mag;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // Plane rotation G = P J with P = diag(1, conj(phase)),
                // J = [[c, s], [-s, c]]; A <- G* A G, V <- V G.
                let gpp = Complex64::new(c, 0.0);
                let gqp = -phase.conj() * s;
                let gpq = Complex64::new(s, 0.0);
                let gqq = phase.conj() * c;

                // Right action on columns p, q.
                for r in 0..n {
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    a[(r, p)] = arp * gpp + arq * gqp;
                    a[(r, q)] = arp * gpq + arq * gqq;
                }
                // Left action (adjoint) on rows p, q.
                for col in 0..n {
                    let apc = a[(p, col)];
                    let aqc = a[(q, col)];
                    a[(p, col)] = gpp.conj() * apc + gqp.conj() * aqc;
                    a[(q, col)] = gpq.conj() * apc + gqq.conj() * aqc;
                }
                // Accumulate eigenvectors.
                for r in 0..n {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = vrp * gpp + vrq * gqp;
                    v[(r, q)] = vrp * gpq + vrq * gqq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap());

    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, cidx| v[(r, order[cidx])]);
    Ok((values, vectors))
}

/// U f(diag) U* for a spectral function applied to Hermitian `h`.
pub fn herm_func(h: &ComplexMatrix, f: impl Fn(f64) -> Complex64) -> Result<ComplexMatrix> {
    let (values, u) = herm_eig(h)?;
    Ok(recompose(
        &u,
        &values.iter().map(|&l| f(l)).collect::<Vec<_>>(),
    ))
}

fn recompose(u: &ComplexMatrix, fvals: &[Complex64]) -> ComplexMatrix {
    let n = u.rows();
    let mut scaled = u.clone();
    for j in 0..n {
        for i in 0..n {
            scaled[(i, j)] = u[(i, j)] * fvals[j];
        }
    }
    scaled.matmul(&u.adjoint())
}

/// Complex power of a positive-semidefinite matrix with a spectral floor.
///
/// Computes `U diag((lambda_j + delta)^z) U*`. Eigenvalues below
/// `-1e-10 * scale` are rejected; small negatives are clamped to zero.
/// A zero eigenvalue (after the floor) maps to zero when `Re z > 0`, to
/// one when `z = 0`, and is an error otherwise.
pub fn mat_power(h: &ComplexMatrix, z: Complex64, delta: f64) -> Result<ComplexMatrix> {
    let (values, u) = herm_eig(h)?;
    let scale = values.iter().fold(1.0_f64, |m, &l| m.max(l.abs()));
    let min = values.last().copied().unwrap_or(0.0);
    if min < -1e-10 * scale {
        return Err(Error::NotPositiveSemidefinite { min_eig: min });
    }
    let clamp = 1e-14 * scale;
    let mut fvals = Vec::with_capacity(values.len());
    for &l in &values {
        let lf = if l <= clamp { 0.0 } else { l } + delta;
        let w = if lf > 0.0 {
            (z * lf.ln()).exp()
        } else if z == ZERO {
            ONE
        } else if z.re > 0.0 {
            ZERO
        } else {
            return Err(Error::SingularPower);
        };
        fvals.push(w);
    }
    Ok(recompose(&u, &fvals))
}

/// Real-exponent power of a PSD matrix, no floor.
pub fn mat_powf(h: &ComplexMatrix, p: f64) -> Result<ComplexMatrix> {
    mat_power(h, Complex64::new(p, 0.0), 0.0)
}

pub fn mat_sqrt_psd(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    mat_powf(h, 0.5)
}

/// Spectral clamp onto the PSD cone: negative eigenvalues set to zero.
pub fn psd_clamp(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (values, u) = herm_eig(h)?;
    let fvals: Vec<Complex64> = values
        .iter()
        .map(|&l| Complex64::new(l.max(0.0), 0.0))
        .collect();
    Ok(recompose(&u, &fvals))
}

/// Singular values in descending order via the eigenvalues of x* x.
pub fn singular_values(x: &ComplexMatrix) -> Result<Vec<f64>> {
    let gram = x.adjoint().matmul(x);
    let (values, _) = herm_eig(&gram)?;
    Ok(values.iter().map(|&l| l.max(0.0).sqrt()).collect())
}

/// Operator norm (largest singular value).
pub fn op_norm(x: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(x)?.first().copied().unwrap_or(0.0))
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(h: &ComplexMatrix) -> Result<f64> {
    let (values, _) = herm_eig(h)?;
    Ok(values.last().copied().unwrap_or(0.0))
}

/// Unitary polar factor of a square matrix: `x = u (x* x)^{1/2}`.
///
/// For singular `x` the partial isometry is completed to a unitary by
/// Gram-Schmidt against the standard basis.
pub fn polar_unitary(x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = x.require_square()?;
    let gram = x.adjoint().matmul(x);
    let (values, v) = herm_eig(&gram)?;
    let smax = values.first().copied().unwrap_or(0.0).max(0.0).sqrt();
    let cut = 1e-12 * smax.max(1e-300);

    let mut w_cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut live = Vec::with_capacity(n);
    for j in 0..n {
        let sigma = values[j].max(0.0).sqrt();
        if sigma > cut {
            let vj: Vec<Complex64> = (0..n).map(|i| v[(i, j)]).collect();
            let mut wj = x.apply_vec(&vj);
            for entry in &mut wj {
                *entry /= sigma;
            }
            w_cols.push(wj);
            live.push(true);
        } else {
            w_cols.push(vec![ZERO; n]);
            live.push(false);
        }
    }
    // Complete dead columns to an orthonormal system.
    for j in 0..n {
        if live[j] {
            continue;
        }
        'candidates: for k in 0..n {
            let mut cand: Vec<Complex64> =
                (0..n).map(|i| if i == k { ONE } else { ZERO }).collect();
            for _ in 0..2 {
                for (other, &is_live) in w_cols.iter().zip(live.iter()) {
                    if !is_live && other.iter().all(|z| *z == ZERO) {
                        continue;
                    }
                    let overlap: Complex64 = other
                        .iter()
                        .zip(cand.iter())
                        .map(|(a, b)| a.conj() * b)
                        .sum();
                    for (c, o) in cand.iter_mut().zip(other.iter()) {
                        *c -= overlap * o;
                    }
                }
            }
            let norm: f64 = cand.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                for entry in &mut cand {
                    *entry /= norm;
                }
                w_cols[j] = cand;
                live[j] = true;
                break 'candidates;
            }
        }
    }

    // u = sum_j w_j v_j*
    let mut u = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        for r in 0..n {
            for s in 0..n {
                u[(r, s)] += w_cols[j][r] * v[(s, j)].conj();
            }
        }
    }
    Ok(u)
}

/// Gram-Schmidt orthonormalization of the columns; two passes for stability.
pub fn orthonormalize_columns(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.rows();
    let k = m.cols();
    let mut cols: Vec<Vec<Complex64>> = (0..k)
        .map(|j| (0..n).map(|i| m[(i, j)]).collect())
        .collect();
    for j in 0..k {
        for _ in 0..2 {
            for prev in 0..j {
                let overlap: Complex64 = cols[prev]
                    .iter()
                    .zip(cols[j].iter())
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let prev_col = cols[prev].clone();
                for (c, o) in cols[j].iter_mut().zip(prev_col.iter()) {
                    *c -= overlap * o;
                }
            }
        }
        let norm: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(
            norm > 1e-12,
            "rank-deficient column set in orthonormalization"
        );
        for entry in &mut cols[j] {
            *entry /= norm;
        }
    }
    ComplexMatrix::from_fn(n, k, |i, j| cols[j][i])
}
