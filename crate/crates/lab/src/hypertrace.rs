//! Hypertrace construction by Dykstra alternating projections.
//!
//! A hypertrace for M inside N is a state omega on N with
//! omega(a x) = omega(x a) for every a in M, x in N. Densities are
//! taken with respect to phi: omega(x) = phi(rho x). Feasibility is an
//! intersection of the PSD cone with an affine subspace (unit phi-trace,
//! orthogonality to the commutator subspace [M, N], plus the support or
//! extension constraints), so Dykstra's scheme applies directly; the
//! affine projection is a precomputed least-squares solve.

use num_complex::Complex64;
use serde::Serialize;

use nclab_core::error::{Error, Result};
use nclab_core::matcore::eig::{herm_eig, psd_clamp};
use nclab_core::matcore::linsolve::pinv_solve_hermitian;
use nclab_core::matcore::matrix::ComplexMatrix;
use nclab_core::matcore::{BlockAlgebra, WeightedTrace};

/// Side constraint pinning the hypertrace beyond the defining relations.
#[derive(Clone, Debug)]
pub enum HypertraceConstraint {
    /// omega(1 - p) = 0 for a nonzero central projection p of M.
    CentralProjection(ComplexMatrix),
    /// omega extends the state sum_k weights[k] * (value at projections[k])
    /// on the center of M, given by its minimal projections.
    ExtendState {
        projections: Vec<ComplexMatrix>,
        weights: Vec<f64>,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct HypertraceOutcome {
    pub density: ComplexMatrix,
    pub commutator_residual: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
    pub extension_error: f64,
    pub tracial_restriction_defect: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Isometric real coordinates of a Hermitian matrix.
fn herm_to_vec(h: &ComplexMatrix) -> Vec<f64> {
    let d = h.rows();
    let mut v = Vec::with_capacity(d * d);
    let s = std::f64::consts::SQRT_2;
    for i in 0..d {
        v.push(h[(i, i)].re);
    }
    for i in 0..d {
        for j in (i + 1)..d {
            v.push(s * h[(i, j)].re);
            v.push(s * h[(i, j)].im);
        }
    }
    v
}

fn vec_to_herm(v: &[f64], d: usize) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(d, d);
    let s = std::f64::consts::SQRT_2;
    for i in 0..d {
        h[(i, i)] = Complex64::new(v[i], 0.0);
    }
    let mut at = d;
    for i in 0..d {
        for j in (i + 1)..d {
            let re = v[at] / s;
            let im = v[at + 1] / s;
            at += 2;
            h[(i, j)] = Complex64::new(re, im);
            h[(j, i)] = Complex64::new(re, -im);
        }
    }
    h
}

/// The affine constraint rows: Hermitian matrices G_r with
/// Tr(rho G_r) = c_r in the Frobenius pairing.
struct AffineSet {
    dim: usize,
    rows: ComplexMatrix,
    targets: Vec<f64>,
    gram_pinv_rows: ComplexMatrix, // (A^T A)^+ A^T, real entries
}

impl AffineSet {
    fn new(dim: usize, constraints: Vec<(ComplexMatrix, f64)>) -> Result<Self> {
        let m = constraints.len();
        let dd = dim * dim;
        let mut rows = ComplexMatrix::zeros(m, dd);
        let mut targets = Vec::with_capacity(m);
        for (r, (g, c)) in constraints.iter().enumerate() {
            let v = herm_to_vec(g);
            for (col, &value) in v.iter().enumerate() {
                rows[(r, col)] = Complex64::new(value, 0.0);
            }
            targets.push(*c);
        }
        let gram = rows.adjoint().matmul(&rows);
        let identity = ComplexMatrix::identity(dd);
        let gram_pinv = pinv_solve_hermitian(&gram, &identity, 1e-12)?;
        let gram_pinv_rows = gram_pinv.matmul(&rows.adjoint());
        Ok(AffineSet {
            dim,
            rows,
            targets,
            gram_pinv_rows,
        })
    }

    fn project(&self, h: &ComplexMatrix) -> ComplexMatrix {
        let v = herm_to_vec(h);
        let vc: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let mut defect = self.rows.apply_vec(&vc);
        for (i, t) in self.targets.iter().enumerate() {
            defect[i] -= Complex64::new(*t, 0.0);
        }
        let correction = self.gram_pinv_rows.apply_vec(&defect);
        let corrected: Vec<f64> = v
            .iter()
            .zip(correction.iter())
            .map(|(&x, c)| x - c.re)
            .collect();
        vec_to_herm(&corrected, self.dim)
    }

    fn residual(&self, h: &ComplexMatrix) -> f64 {
        let v = herm_to_vec(h);
        let vc: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let out = self.rows.apply_vec(&vc);
        out.iter()
            .zip(self.targets.iter())
            .map(|(a, t)| (a.re - t).abs())
            .fold(0.0, f64::max)
    }
}

fn check_central_projection(p: &ComplexMatrix, m: &BlockAlgebra) -> Result<()> {
    let idem = (&p.matmul(p) - p).max_abs();
    let herm = p.hermitian_deviation();
    if idem > 1e-10 || herm > 1e-10 {
        return Err(Error::NotCentral {
            residual: idem.max(herm),
        });
    }
    if p.fro_norm() < 1e-10 {
        return Err(Error::NotCentral { residual: 1.0 });
    }
    let mut worst = 0.0_f64;
    for b in m.basis() {
        worst = worst.max((&p.matmul(b) - &b.matmul(p)).max_abs());
    }
    if worst > 1e-10 {
        return Err(Error::NotCentral { residual: worst });
    }
    Ok(())
}

/// Finds a hypertrace density by Dykstra alternating projections between
/// the PSD cone and the affine constraint set. The returned density is
/// the PSD-projected iterate, so its minimum eigenvalue is exactly
/// nonnegative and the affine residuals are bounded by the final gap.
pub fn hypertrace_find(
    m: &BlockAlgebra,
    n: &BlockAlgebra,
    phi: &WeightedTrace,
    constraint: &HypertraceConstraint,
    max_iters: usize,
) -> Result<HypertraceOutcome> {
    let d = n.dim();
    if m.dim() != d || phi.dim() != d {
        return Err(Error::DimensionMismatch {
            left: format!("M dim {}", m.dim()),
            right: format!("N dim {d} / trace dim {}", phi.dim()),
            context: "hypertrace_find",
        });
    }
    let containment = n.span_contains_algebra(m);
    if containment > 1e-10 {
        return Err(Error::NotSubalgebra {
            reason: format!("M is off the span of N by {containment:.3e}"),
        });
    }
    let density = phi.density();

    // Constraint rows in the Frobenius pairing Tr(rho G) = c.
    let mut constraints: Vec<(ComplexMatrix, f64)> = Vec::new();
    // unit phi-trace: Tr(rho D) = 1
    constraints.push((density.clone(), 1.0));
    // commutator orthogonality: phi(rho K) = 0 with K = a x - x a,
    // split into the two Hermitian parts of D K.
    for a in m.orthobasis() {
        for x in n.orthobasis() {
            let k = &a.matmul(x) - &x.matmul(a);
            let dk = density.matmul(&k);
            let h = dk.hermitize();
            let s = dk.scale_c(Complex64::new(0.0, -1.0)).hermitize();
            if h.fro_norm() > 1e-13 {
                constraints.push((h, 0.0));
            }
            if s.fro_norm() > 1e-13 {
                constraints.push((s, 0.0));
            }
        }
    }
    match constraint {
        HypertraceConstraint::CentralProjection(p) => {
            check_central_projection(p, m)?;
            let complement = &ComplexMatrix::identity(d) - p;
            constraints.push((density.matmul(&complement).hermitize(), 0.0));
        }
        HypertraceConstraint::ExtendState {
            projections,
            weights,
        } => {
            if projections.len() != weights.len() {
                return Err(Error::DimensionMismatch {
                    left: format!("{} projections", projections.len()),
                    right: format!("{} weights", weights.len()),
                    context: "hypertrace extension",
                });
            }
            let total: f64 = weights.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::NotNormalized { total });
            }
            if weights.iter().any(|&w| w < -1e-12) {
                return Err(Error::NonPositiveWeight {
                    value: weights.iter().cloned().fold(f64::INFINITY, f64::min),
                });
            }
            for (p, &w) in projections.iter().zip(weights.iter()) {
                check_central_projection(p, m)?;
                constraints.push((density.matmul(p).hermitize(), w));
            }
        }
    }

    let affine = AffineSet::new(d, constraints)?;

    // Dykstra with the PSD cone; correction only on the cone side since
    // the affine set is a subspace shift (its correction is idempotent).
    let mut x = ComplexMatrix::identity(d).scale(1.0 / phi.total());
    let mut p_corr = ComplexMatrix::zeros(d, d);
    let mut q_corr = ComplexMatrix::zeros(d, d);
    let mut iterations = 0;
    let mut converged = false;
    let mut psd_iterate = x.clone();

    for it in 0..max_iters {
        iterations = it + 1;
        let y = psd_clamp(&(&x + &p_corr).hermitize())?;
        p_corr = &(&x + &p_corr) - &y;
        let z = affine.project(&(&y + &q_corr));
        q_corr = &(&y + &q_corr) - &z;
        let gap = (&y - &z).fro_norm();
        psd_iterate = y;
        x = z;
        if gap <= 5e-12 {
            converged = true;
            break;
        }
    }

    let rho = psd_iterate;
    let (values, _) = herm_eig(&rho.hermitize())?;
    let min_eigenvalue = values.last().copied().unwrap_or(0.0);
    let trace_error = (phi.apply(&rho).re - 1.0).abs();
    let _ = affine.residual(&rho);

    let mut commutator_residual = 0.0_f64;
    for a in m.basis() {
        for xb in n.basis() {
            let k = &a.matmul(xb) - &xb.matmul(a);
            commutator_residual = commutator_residual.max(phi.apply(&rho.matmul(&k)).norm());
        }
    }
    let extension_error = match constraint {
        HypertraceConstraint::CentralProjection(p) => {
            let complement = &ComplexMatrix::identity(d) - p;
            phi.apply(&rho.matmul(&complement)).norm()
        }
        HypertraceConstraint::ExtendState {
            projections,
            weights,
        } => projections
            .iter()
            .zip(weights.iter())
            .map(|(p, &w)| (phi.apply(&rho.matmul(p)).re - w).abs())
            .fold(0.0, f64::max),
    };
    let mut tracial_restriction_defect = 0.0_f64;
    for a in m.basis() {
        for b in m.basis() {
            let ab = phi.apply(&rho.matmul(&a.matmul(b)));
            let ba = phi.apply(&rho.matmul(&b.matmul(a)));
            tracial_restriction_defect = tracial_restriction_defect.max((ab - ba).norm());
        }
    }

    Ok(HypertraceOutcome {
        density: rho,
        commutator_residual,
        trace_error,
        min_eigenvalue,
        extension_error,
        tracial_restriction_defect,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_subalgebra_extension_pins_the_density() {
        // M = diagonals in M_2, omega_0 = (t, 1-t): rho = diag(t, 1-t)
        let n = BlockAlgebra::full(2);
        let m = BlockAlgebra::block_diagonal(&[1, 1]);
        let phi = WeightedTrace::standard(2);
        let t = 0.3;
        let constraint = HypertraceConstraint::ExtendState {
            projections: vec![ComplexMatrix::unit(2, 0, 0), ComplexMatrix::unit(2, 1, 1)],
            weights: vec![t, 1.0 - t],
        };
        let outcome = hypertrace_find(&m, &n, &phi, &constraint, 5000).unwrap();
        assert!(outcome.converged, "{outcome:?}");
        assert!(outcome.commutator_residual <= 1e-8);
        assert!(outcome.trace_error <= 1e-10);
        assert!(outcome.min_eigenvalue >= -1e-12);
        assert!(outcome.extension_error <= 1e-8);
        let expected = ComplexMatrix::diag(&[t, 1.0 - t]);
        assert!(
            (&outcome.density - &expected).max_abs() < 1e-7,
            "{:?}",
            outcome.density
        );
    }

    #[test]
    fn full_algebra_gives_normalized_trace_density() {
        let n = BlockAlgebra::full(3);
        let m = BlockAlgebra::full(3);
        let phi = WeightedTrace::standard(3);
        let constraint = HypertraceConstraint::CentralProjection(ComplexMatrix::identity(3));
        let outcome = hypertrace_find(&m, &n, &phi, &constraint, 5000).unwrap();
        assert!(outcome.converged);
        let expected = ComplexMatrix::identity(3).scale(1.0 / 3.0);
        assert!((&outcome.density - &expected).max_abs() < 1e-8);
    }

    #[test]
    fn scalars_admit_any_state() {
        let n = BlockAlgebra::full(2);
        let m = BlockAlgebra::with_basis(2, vec![], vec![ComplexMatrix::identity(2)]).unwrap();
        let phi = WeightedTrace::standard(2);
        let constraint = HypertraceConstraint::CentralProjection(ComplexMatrix::identity(2));
        let outcome = hypertrace_find(&m, &n, &phi, &constraint, 3000).unwrap();
        assert!(outcome.converged);
        assert!(outcome.commutator_residual <= 1e-8);
        assert!(outcome.min_eigenvalue >= -1e-12);
    }

    #[test]
    fn non_central_projection_is_rejected() {
        let n = BlockAlgebra::full(2);
        let m = BlockAlgebra::full(2);
        let phi = WeightedTrace::standard(2);
        // e11 is not central in M_2
        let constraint = HypertraceConstraint::CentralProjection(ComplexMatrix::unit(2, 0, 0));
        assert!(matches!(
            hypertrace_find(&m, &n, &phi, &constraint, 100),
            Err(Error::NotCentral { .. })
        ));
    }
}
