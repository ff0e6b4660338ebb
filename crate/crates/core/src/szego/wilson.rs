//! Newton iteration on the analytic factor (Wilson's method).
//!
//! Each step solves the linearized equation F* Delta + Delta* F = W - F* F
//! on the Fourier coefficients, as a real least-squares system in the
//! coefficient entries of Delta. The system has a d^2-dimensional null
//! direction (the constant left-unitary gauge F -> U F); the minimum-norm
//! solve removes it, and the gauge is pinned after convergence by the
//! polar normalization that makes F(0) positive semidefinite.

use num_complex::Complex64;
use serde::Serialize;

use super::{factorization_residual, AnalyticFactor, LaurentPolynomial, BOUNDARY_GRID};
use crate::error::{Error, Result};
use crate::matcore::eig::{op_norm, polar_unitary};
use crate::matcore::linsolve::pinv_solve_hermitian;
use crate::matcore::matrix::ComplexMatrix;

/// Initialization of the Newton iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WilsonInit {
    /// F = |W_0|^{1/2}-scaled identity.
    ScaledIdentity,
    /// F = upper Cholesky factor of the mean coefficient W_0.
    CholeskyMean,
}

#[derive(Clone, Debug, Serialize)]
pub struct Factorization {
    pub factor: AnalyticFactor,
    /// Max operator-norm residual of F* F - W over the boundary grid.
    pub residual: f64,
    /// Coefficient-domain residual bound sum_k |R_k| (certified sup).
    pub cert_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Coefficient residuals R_k = W_k - (F* F)_k for k = 0..m.
fn coeff_residuals(f: &AnalyticFactor, w: &LaurentPolynomial) -> Vec<ComplexMatrix> {
    let m = w.degree();
    let d = w.dim();
    (0..=m)
        .map(|k| {
            let mut acc = ComplexMatrix::zeros(d, d);
            for i in 0..=(m - k) {
                acc = &acc + &f.coeff(i).adjoint().matmul(f.coeff(i + k));
            }
            &w.coeff(k as isize).clone() - &acc
        })
        .collect()
}

/// Certified sup-norm bound |R_0| + 2 sum_{k>0} |R_k|.
fn cert_residual(residuals: &[ComplexMatrix]) -> Result<f64> {
    let mut total = 0.0;
    for (k, r) in residuals.iter().enumerate() {
        let norm = op_norm(r)?;
        total += if k == 0 { norm } else { 2.0 * norm };
    }
    Ok(total)
}

fn cholesky_upper(w0: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = w0.require_square()?;
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut diag = w0[(j, j)].re;
        for k in 0..j {
            diag -= l[(j, k)].norm_sqr();
        }
        if diag <= 0.0 {
            return Err(Error::NotPositiveSemidefinite { min_eig: diag });
        }
        l[(j, j)] = Complex64::new(diag.sqrt(), 0.0);
        for i in (j + 1)..n {
            let mut acc = w0[(i, j)];
            for k in 0..j {
                acc -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = acc / l[(j, j)];
        }
    }
    // W_0 = L L*; F_0 = L* satisfies F_0* F_0 = W_0.
    Ok(l.adjoint())
}

/// One linearized solve: finds Delta_0..Delta_m minimizing the norm of
/// the coefficient equations.
fn newton_step(f: &AnalyticFactor, residuals: &[ComplexMatrix]) -> Result<Vec<ComplexMatrix>> {
    let m = f.degree();
    let d = f.dim();
    let unknowns = 2 * (m + 1) * d * d;
    let rows = 2 * (m + 1) * d * d;

    let col_index =
        |j: usize, r: usize, s: usize, part: usize| -> usize { part + 2 * (s + d * (r + d * j)) };
    let row_index =
        |k: usize, p: usize, q: usize, part: usize| -> usize { part + 2 * (q + d * (p + d * k)) };

    let mut a = ComplexMatrix::zeros(rows, unknowns);
    let mut add = |row: usize, col: usize, v: f64| {
        a[(row, col)] += Complex64::new(v, 0.0);
    };

    for j in 0..=m {
        for r in 0..d {
            for s in 0..d {
                for part in 0..2 {
                    let col = col_index(j, r, s, part);
                    let w = if part == 0 {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::new(0.0, 1.0)
                    };
                    // term F_{j-k}* (w e_rs): E_k[p, s] += w conj(F_{j-k}[r, p])
                    for k in 0..=j.min(m) {
                        let fc = f.coeff(j - k);
                        for p in 0..d {
                            let v = w * fc[(r, p)].conj();
                            add(row_index(k, p, s, 0), col, v.re);
                            add(row_index(k, p, s, 1), col, v.im);
                        }
                    }
                    // term (w e_rs)* F_{j+k}: E_k[s, q] += conj(w) F_{j+k}[r, q]
                    for k in 0..=(m - j) {
                        let fc = f.coeff(j + k);
                        for q in 0..d {
                            let v = w.conj() * fc[(r, q)];
                            add(row_index(k, s, q, 0), col, v.re);
                            add(row_index(k, s, q, 1), col, v.im);
                        }
                    }
                }
            }
        }
    }

    let mut rhs = ComplexMatrix::zeros(rows, 1);
    for (k, res) in residuals.iter().enumerate() {
        for p in 0..d {
            for q in 0..d {
                rhs[(row_index(k, p, q, 0), 0)] = Complex64::new(res[(p, q)].re, 0.0);
                rhs[(row_index(k, p, q, 1), 0)] = Complex64::new(res[(p, q)].im, 0.0);
            }
        }
    }

    let gram = a.adjoint().matmul(&a);
    let atb = a.adjoint().matmul(&rhs);
    let u = pinv_solve_hermitian(&gram, &atb, 1e-12)?;

    let mut deltas = Vec::with_capacity(m + 1);
    for j in 0..=m {
        let mut delta = ComplexMatrix::zeros(d, d);
        for r in 0..d {
            for s in 0..d {
                let re = u[(col_index(j, r, s, 0), 0)].re;
                let im = u[(col_index(j, r, s, 1), 0)].re;
                delta[(r, s)] = Complex64::new(re, im);
            }
        }
        deltas.push(delta);
    }
    Ok(deltas)
}

/// Factorizes a certified strictly positive symbol as W = F* F with F
/// outer and F(0) >= 0, by damped Newton iteration from the chosen
/// initialization.
pub fn wilson_factorize_with(
    w: &LaurentPolynomial,
    tol: f64,
    max_iters: usize,
    init: WilsonInit,
) -> Result<Factorization> {
    let positivity = w.positivity_certificate(BOUNDARY_GRID)?;
    if !positivity.pass {
        return Err(Error::PositivityCertificateFailed {
            certified_min: positivity.certified_min,
        });
    }
    let m = w.degree();
    let d = w.dim();
    let w0 = w.coeff(0).hermitize();

    let f0 = match init {
        WilsonInit::ScaledIdentity => {
            let s = op_norm(&w0)?.sqrt();
            ComplexMatrix::identity(d).scale(s)
        }
        WilsonInit::CholeskyMean => cholesky_upper(&w0)?,
    };
    let mut coeffs = vec![ComplexMatrix::zeros(d, d); m + 1];
    coeffs[0] = f0;
    let mut f = AnalyticFactor::new(coeffs)?;

    let mut residuals = coeff_residuals(&f, w);
    let mut current = cert_residual(&residuals)?;
    let mut iterations = 0;
    let mut converged = current <= tol;

    while !converged && iterations < max_iters {
        iterations += 1;
        let deltas = newton_step(&f, &residuals)?;
        let mut accepted = false;
        let mut step = 1.0;
        for _ in 0..12 {
            let trial = AnalyticFactor::new(
                f.coeffs()
                    .iter()
                    .zip(deltas.iter())
                    .map(|(c, dlt)| c + &dlt.scale(step))
                    .collect(),
            )?;
            let trial_res = coeff_residuals(&trial, w);
            let trial_cert = cert_residual(&trial_res)?;
            if trial_cert < current {
                f = trial;
                residuals = trial_res;
                current = trial_cert;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        converged = current <= tol;
    }

    // Pin the unitary gauge: F(0) -> (F_0* F_0)^{1/2} >= 0.
    let u = polar_unitary(f.coeff(0))?;
    let ustar = u.adjoint();
    f = AnalyticFactor::new(f.coeffs().iter().map(|c| ustar.matmul(c)).collect())?;

    let residual = factorization_residual(&f, w)?;
    Ok(Factorization {
        factor: f,
        residual,
        cert_residual: current,
        iterations,
        converged,
    })
}

/// [`wilson_factorize_with`] from the scaled-identity initialization.
pub fn wilson_factorize(
    w: &LaurentPolynomial,
    tol: f64,
    max_iters: usize,
) -> Result<Factorization> {
    wilson_factorize_with(w, tol, max_iters, WilsonInit::ScaledIdentity)
}
