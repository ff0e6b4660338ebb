//! Operator-valued spectral factorization of strictly positive matrix
//! trigonometric polynomials: W(t) = F(t)* F(t) with F analytic in the
//! disc, outer, and normalized so F(0) is positive semidefinite.

mod roots;
mod wilson;

pub use roots::{det_poly_coeffs, polynomial_roots};
pub use wilson::{wilson_factorize, wilson_factorize_with, Factorization, WilsonInit};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::algebra::BlockAlgebra;
use crate::matcore::eig::{herm_eig, op_norm};
use crate::matcore::matrix::ComplexMatrix;
use crate::random;

/// Grid used for boundary residuals and positivity certification.
pub const BOUNDARY_GRID: usize = 1024;

/// A matrix-valued trigonometric polynomial W(t) = sum_{j=-m}^m W_j e^{ijt}
/// with the Hermitian symmetry W_{-j} = W_j*.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LaurentPolynomial {
    m: usize,
    dim: usize,
    /// Coefficients indexed -m..m as coeffs[m + j].
    coeffs: Vec<ComplexMatrix>,
}

/// Positivity certificate for the symbol: the grid minimum of the least
/// eigenvalue minus a derivative (Bernstein) slack must stay positive.
#[derive(Clone, Debug, Serialize)]
pub struct PositivityReport {
    pub grid_min: f64,
    pub lipschitz: f64,
    pub certified_min: f64,
    pub pass: bool,
}

impl LaurentPolynomial {
    /// Builds from coefficients listed W_{-m}, ..., W_0, ..., W_m.
    pub fn new(coeffs: Vec<ComplexMatrix>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.len().is_multiple_of(2) {
            return Err(Error::DimensionMismatch {
                left: format!("{} coefficients", coeffs.len()),
                right: "odd count 2m+1".to_string(),
                context: "LaurentPolynomial",
            });
        }
        let m = coeffs.len() / 2;
        let dim = coeffs[0].require_square()?;
        let mut scale = 0.0_f64;
        for c in &coeffs {
            if c.require_square()? != dim {
                return Err(Error::DimensionMismatch {
                    left: format!("{}x{}", c.rows(), c.cols()),
                    right: format!("{dim}x{dim}"),
                    context: "LaurentPolynomial",
                });
            }
            scale = scale.max(c.max_abs());
        }
        let mut sym_residual = 0.0_f64;
        for j in 0..=m {
            let dev = (&coeffs[m - j] - &coeffs[m + j].adjoint()).max_abs();
            sym_residual = sym_residual.max(dev);
        }
        if sym_residual > 1e-10 * scale.max(1.0) {
            return Err(Error::NotHermitianSymbol {
                residual: sym_residual,
            });
        }
        Ok(LaurentPolynomial { m, dim, coeffs })
    }

    /// Scalar symbol c_0 + sum_j 2 c_j cos(j t) from real cosine coefficients.
    pub fn scalar_cosine(c: &[f64]) -> Result<Self> {
        assert!(!c.is_empty());
        let m = c.len() - 1;
        let mut coeffs = Vec::with_capacity(2 * m + 1);
        for j in 0..(2 * m + 1) {
            let k = (j as isize - m as isize).unsigned_abs();
            let value = if k == 0 { c[0] } else { c[k] };
            coeffs.push(ComplexMatrix::diag(&[value]));
        }
        Self::new(coeffs)
    }

    pub fn degree(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coefficient W_j for j in [-m, m].
    pub fn coeff(&self, j: isize) -> &ComplexMatrix {
        &self.coeffs[(self.m as isize + j) as usize]
    }

    pub fn coeffs(&self) -> &[ComplexMatrix] {
        &self.coeffs
    }

    pub fn eval(&self, t: f64) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim, self.dim);
        for j in -(self.m as isize)..=(self.m as isize) {
            let phase = Complex64::new(0.0, j as f64 * t).exp();
            acc = &acc + &self.coeff(j).scale_c(phase);
        }
        acc
    }

    /// W = F* F expanded coefficient-exactly from the factor.
    pub fn from_factor(f: &AnalyticFactor) -> Self {
        let m = f.degree();
        let dim = f.dim();
        let mut coeffs = vec![ComplexMatrix::zeros(dim, dim); 2 * m + 1];
        for k in 0..=m {
            let mut acc = ComplexMatrix::zeros(dim, dim);
            for i in 0..=(m - k) {
                acc = &acc + &f.coeff(i).adjoint().matmul(f.coeff(i + k));
            }
            coeffs[m + k] = acc.clone();
            coeffs[m - k] = acc.adjoint();
        }
        LaurentPolynomial { m, dim, coeffs }
    }

    /// Certifies strict positivity on the whole circle: grid minimum of
    /// the least eigenvalue, minus a Bernstein-type slack for the gap
    /// between grid points.
    pub fn positivity_certificate(&self, grid: usize) -> Result<PositivityReport> {
        let mut grid_min = f64::INFINITY;
        let mut sup_norm = 0.0_f64;
        for i in 0..grid {
            let t = 2.0 * std::f64::consts::PI * i as f64 / grid as f64;
            let w = self.eval(t).hermitize();
            let (values, _) = herm_eig(&w)?;
            grid_min = grid_min.min(values.last().copied().unwrap_or(0.0));
            sup_norm = sup_norm.max(values.first().copied().unwrap_or(0.0).abs());
        }
        // |W'|_inf <= min( m |W|_inf (Bernstein), sum |j| |W_j| )
        let coeff_bound: f64 = (1..=self.m)
            .map(|j| 2.0 * j as f64 * op_norm(self.coeff(j as isize)).unwrap_or(f64::INFINITY))
            .sum();
        let lipschitz = (self.m as f64 * sup_norm).min(coeff_bound);
        let half_spacing = std::f64::consts::PI / grid as f64;
        let certified_min = grid_min - lipschitz * half_spacing;
        Ok(PositivityReport {
            grid_min,
            lipschitz,
            certified_min,
            pass: certified_min > 0.0,
        })
    }
}

/// An analytic matrix polynomial F(z) = sum_{j=0}^m F_j z^j.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnalyticFactor {
    m: usize,
    dim: usize,
    coeffs: Vec<ComplexMatrix>,
}

impl AnalyticFactor {
    pub fn new(coeffs: Vec<ComplexMatrix>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptyTuple);
        }
        let dim = coeffs[0].require_square()?;
        for c in &coeffs {
            if c.require_square()? != dim {
                return Err(Error::DimensionMismatch {
                    left: format!("{}x{}", c.rows(), c.cols()),
                    right: format!("{dim}x{dim}"),
                    context: "AnalyticFactor",
                });
            }
        }
        Ok(AnalyticFactor {
            m: coeffs.len() - 1,
            dim,
            coeffs,
        })
    }

    pub fn degree(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeff(&self, j: usize) -> &ComplexMatrix {
        &self.coeffs[j]
    }

    pub fn coeffs(&self) -> &[ComplexMatrix] {
        &self.coeffs
    }

    pub fn eval_z(&self, z: Complex64) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim, self.dim);
        let mut zp = Complex64::new(1.0, 0.0);
        for c in &self.coeffs {
            acc = &acc + &c.scale_c(zp);
            zp *= z;
        }
        acc
    }

    pub fn eval_circle(&self, t: f64) -> ComplexMatrix {
        self.eval_z(Complex64::new(0.0, t).exp())
    }

    /// Coefficientwise max deviation from another factor.
    pub fn coeff_distance(&self, other: &AnalyticFactor) -> f64 {
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut worst = 0.0_f64;
        for j in 0..len {
            let zero = ComplexMatrix::zeros(self.dim, self.dim);
            let a = self.coeffs.get(j).unwrap_or(&zero);
            let b = other.coeffs.get(j).unwrap_or(&zero);
            worst = worst.max((a - b).max_abs());
        }
        worst
    }
}

/// Max over the boundary grid of |F(t)* F(t) - W(t)| in operator norm.
pub fn factorization_residual(f: &AnalyticFactor, w: &LaurentPolynomial) -> Result<f64> {
    if f.dim() != w.dim() {
        return Err(Error::DimensionMismatch {
            left: format!("factor dim {}", f.dim()),
            right: format!("symbol dim {}", w.dim()),
            context: "factorization_residual",
        });
    }
    let mut worst = 0.0_f64;
    for i in 0..BOUNDARY_GRID {
        let t = 2.0 * std::f64::consts::PI * i as f64 / BOUNDARY_GRID as f64;
        let ft = f.eval_circle(t);
        let diff = &ft.adjoint().matmul(&ft) - &w.eval(t);
        worst = worst.max(op_norm(&diff)?);
    }
    Ok(worst)
}

/// Outer-ness report: all roots of det F(z) must lie outside the closed
/// unit disc (modulus > 1 - 1e-9).
#[derive(Clone, Debug, Serialize)]
pub struct OuterReport {
    pub min_modulus: f64,
    pub roots: Vec<(f64, f64)>,
    pub pass: bool,
}

pub fn outer_check(f: &AnalyticFactor) -> Result<OuterReport> {
    let coeffs = det_poly_coeffs(f)?;
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale <= 1e-250 {
        return Err(Error::DegenerateDeterminant);
    }
    let roots = polynomial_roots(&coeffs)?;
    let min_modulus = roots.iter().map(|r| r.norm()).fold(f64::INFINITY, f64::min);
    Ok(OuterReport {
        min_modulus,
        roots: roots.iter().map(|r| (r.re, r.im)).collect(),
        pass: min_modulus > 1.0 - 1e-9,
    })
}

/// Subalgebra preservation: when the symbol is A-valued the canonical
/// factor must be A-valued too. Reports the max span-projection residual
/// of the factor coefficients, relative to the largest coefficient norm.
#[derive(Clone, Debug, Serialize)]
pub struct PreservationReport {
    pub max_residual: f64,
    pub pass: bool,
}

pub fn subalgebra_preservation(
    f: &AnalyticFactor,
    w: &LaurentPolynomial,
    a: &BlockAlgebra,
) -> Result<PreservationReport> {
    if a.dim() != w.dim() {
        return Err(Error::DimensionMismatch {
            left: format!("algebra dim {}", a.dim()),
            right: format!("symbol dim {}", w.dim()),
            context: "subalgebra_preservation",
        });
    }
    for c in w.coeffs() {
        let (_, residual) = a.span_project(c);
        if residual > 1e-10 * c.fro_norm().max(1.0) {
            return Err(Error::NotSubalgebra {
                reason: format!("symbol coefficient off span by {residual:.3e}"),
            });
        }
    }
    let scale = f
        .coeffs()
        .iter()
        .map(|c| c.fro_norm())
        .fold(0.0_f64, f64::max)
        .max(1e-300);
    let mut max_residual = 0.0_f64;
    for c in f.coeffs() {
        let (_, residual) = a.span_project(c);
        max_residual = max_residual.max(residual / scale);
    }
    Ok(PreservationReport {
        max_residual,
        pass: max_residual <= 1e-7,
    })
}

/// Scalar outer normalization check: F(0) must equal the geometric-mean
/// value exp((1/4pi) \int_0^{2pi} log W dt), computed by a 4096-point
/// trapezoid rule.
#[derive(Clone, Debug, Serialize)]
pub struct SzegoMeanReport {
    pub quadrature: f64,
    pub f_zero: f64,
    pub rel_error: f64,
    pub pass: bool,
}

pub fn scalar_szego_mean(w: &LaurentPolynomial, f: &AnalyticFactor) -> Result<SzegoMeanReport> {
    if w.dim() != 1 || f.dim() != 1 {
        return Err(Error::DimensionMismatch {
            left: format!("dims {} / {}", w.dim(), f.dim()),
            right: "1 / 1".to_string(),
            context: "scalar_szego_mean",
        });
    }
    let grid = 4096;
    let mut log_sum = 0.0_f64;
    for i in 0..grid {
        let t = 2.0 * std::f64::consts::PI * i as f64 / grid as f64;
        let value = w.eval(t)[(0, 0)].re;
        if value <= 0.0 {
            return Err(Error::PositivityCertificateFailed {
                certified_min: value,
            });
        }
        log_sum += value.ln();
    }
    // (1/4pi) * integral = (mean of log W) / 2 for the periodic trapezoid
    let quadrature = (log_sum / grid as f64 / 2.0).exp();
    let f_zero = f.coeff(0)[(0, 0)].re;
    let rel_error = (quadrature - f_zero).abs() / quadrature.max(1e-300);
    Ok(SzegoMeanReport {
        quadrature,
        f_zero,
        rel_error,
        pass: rel_error <= 1e-6,
    })
}

/// Random strictly positive symbol G* G + floor I with Gaussian analytic G.
pub fn random_positive_laurent(
    rng: &mut rand_chacha::ChaCha8Rng,
    dim: usize,
    degree: usize,
    floor: f64,
) -> LaurentPolynomial {
    let coeffs: Vec<ComplexMatrix> = (0..=degree)
        .map(|_| random::matrix(rng, dim).scale(1.0 / (degree as f64 + 1.0).sqrt()))
        .collect();
    let g = AnalyticFactor::new(coeffs).expect("nonempty");
    let mut w = LaurentPolynomial::from_factor(&g);
    let mid = w.m;
    w.coeffs[mid] = &w.coeffs[mid] + &ComplexMatrix::identity(dim).scale(floor);
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_cosine_symbol_evaluates() {
        // W(t) = 2.5 + 2 cos t
        let w = LaurentPolynomial::scalar_cosine(&[2.5, 1.0]).unwrap();
        assert_eq!(w.degree(), 1);
        assert!((w.eval(0.0)[(0, 0)].re - 4.5).abs() < 1e-12);
        assert!((w.eval(std::f64::consts::PI)[(0, 0)].re - 0.5).abs() < 1e-12);
        let report = w.positivity_certificate(BOUNDARY_GRID).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.grid_min > 0.49 && report.grid_min < 0.51);
    }

    #[test]
    fn hermitian_symmetry_is_enforced() {
        let bad = vec![
            ComplexMatrix::unit(2, 0, 1),
            ComplexMatrix::identity(2),
            ComplexMatrix::unit(2, 0, 1),
        ];
        assert!(matches!(
            LaurentPolynomial::new(bad),
            Err(Error::NotHermitianSymbol { .. })
        ));
    }

    #[test]
    fn from_factor_matches_boundary_product() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let f = AnalyticFactor::new((0..3).map(|_| random::matrix(&mut rng, 2)).collect()).unwrap();
        let w = LaurentPolynomial::from_factor(&f);
        for t in [0.0, 1.0, 2.5, 4.0] {
            let ft = f.eval_circle(t);
            let diff = &ft.adjoint().matmul(&ft) - &w.eval(t);
            assert!(diff.max_abs() < 1e-12);
        }
        assert!(factorization_residual(&f, &w).unwrap() < 1e-12);
    }

    #[test]
    fn outer_check_named_instances() {
        // F(z) = sqrt(2) + z / sqrt(2): root at z = -2, outer
        let s = 2.0_f64.sqrt();
        let f = AnalyticFactor::new(vec![
            ComplexMatrix::diag(&[s]),
            ComplexMatrix::diag(&[1.0 / s]),
        ])
        .unwrap();
        let report = outer_check(&f).unwrap();
        assert!(report.pass);
        assert!((report.min_modulus - 2.0).abs() < 1e-9, "{report:?}");

        // F(z) = z I: root at the origin, inner, fails
        let f = AnalyticFactor::new(vec![ComplexMatrix::zeros(2, 2), ComplexMatrix::identity(2)])
            .unwrap();
        let report = outer_check(&f).unwrap();
        assert!(!report.pass);
        assert!(report.min_modulus < 1e-6);

        // constant positive definite factor: no roots, pass
        let f = AnalyticFactor::new(vec![ComplexMatrix::diag(&[2.0, 3.0])]).unwrap();
        let report = outer_check(&f).unwrap();
        assert!(report.pass);
        assert!(report.min_modulus.is_infinite());
    }

    #[test]
    fn perturbed_factor_is_detected_by_residual() {
        let s = 2.0_f64.sqrt();
        let f = AnalyticFactor::new(vec![
            ComplexMatrix::diag(&[s]),
            ComplexMatrix::diag(&[1.0 / s]),
        ])
        .unwrap();
        let w = LaurentPolynomial::scalar_cosine(&[2.5, 1.0]).unwrap();
        assert!(factorization_residual(&f, &w).unwrap() < 1e-12);
        let mut coeffs = f.coeffs().to_vec();
        coeffs[0] = &coeffs[0] + &ComplexMatrix::diag(&[1e-3]);
        let perturbed = AnalyticFactor::new(coeffs).unwrap();
        assert!(factorization_residual(&perturbed, &w).unwrap() >= 1e-4);
    }

    #[test]
    fn szego_mean_for_constant_symbol() {
        let w = LaurentPolynomial::scalar_cosine(&[4.0]).unwrap();
        let f = AnalyticFactor::new(vec![ComplexMatrix::diag(&[2.0])]).unwrap();
        let report = scalar_szego_mean(&w, &f).unwrap();
        assert!(report.pass);
        assert!((report.quadrature - 2.0).abs() < 1e-10);
    }

    #[test]
    fn random_symbols_are_certified_positive() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let w = random_positive_laurent(&mut rng, 3, 3, 0.3);
        let report = w.positivity_certificate(BOUNDARY_GRID).unwrap();
        assert!(report.pass, "{report:?}");
    }
}
