//! Root localization for the determinant of an analytic matrix
//! polynomial: coefficients by DFT interpolation of det F at roots of
//! unity, roots by the Durand-Kerner simultaneous iteration.

use num_complex::Complex64;

use super::AnalyticFactor;
use crate::error::{Error, Result};
use crate::matcore::matrix::ComplexMatrix;

/// Determinant via LU with partial pivoting.
fn det(m: &ComplexMatrix) -> Complex64 {
    let n = m.rows();
    let mut lu = m.clone();
    let mut result = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let mut piv = k;
        let mut best = lu[(k, k)].norm();
        for i in (k + 1)..n {
            if lu[(i, k)].norm() > best {
                best = lu[(i, k)].norm();
                piv = i;
            }
        }
        if best <= 1e-300 {
            return Complex64::new(0.0, 0.0);
        }
        if piv != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(piv, j)];
                lu[(piv, j)] = tmp;
            }
            result = -result;
        }
        let pivot = lu[(k, k)];
        result *= pivot;
        for i in (k + 1)..n {
            let factor = lu[(i, k)] / pivot;
            for j in (k + 1)..n {
                let tmp = lu[(k, j)];
                lu[(i, j)] -= factor * tmp;
            }
        }
    }
    result
}

/// Coefficients of the scalar polynomial det F(z), degree <= m * dim,
/// recovered by inverse DFT from samples at roots of unity.
pub fn det_poly_coeffs(f: &AnalyticFactor) -> Result<Vec<Complex64>> {
    let deg = f.degree() * f.dim();
    let k = deg + 1;
    let samples: Vec<Complex64> = (0..k)
        .map(|l| {
            let z = Complex64::new(0.0, 2.0 * std::f64::consts::PI * l as f64 / k as f64).exp();
            det(&f.eval_z(z))
        })
        .collect();
    let mut coeffs = Vec::with_capacity(k);
    for j in 0..k {
        let mut acc = Complex64::new(0.0, 0.0);
        for (l, s) in samples.iter().enumerate() {
            let phase =
                Complex64::new(0.0, -2.0 * std::f64::consts::PI * (l * j) as f64 / k as f64).exp();
            acc += s * phase;
        }
        coeffs.push(acc / k as f64);
    }
    Ok(coeffs)
}

/// All roots of the polynomial with the given coefficients (constant
/// term first), by Durand-Kerner iteration. Tiny leading coefficients
/// are trimmed, which only removes roots at infinity.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale <= 1e-250 {
        return Err(Error::DegenerateDeterminant);
    }
    let mut trimmed: Vec<Complex64> = coeffs.to_vec();
    while trimmed.len() > 1 && trimmed.last().unwrap().norm() <= 1e-12 * scale {
        trimmed.pop();
    }
    let deg = trimmed.len() - 1;
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = trimmed[deg];
    let monic: Vec<Complex64> = trimmed.iter().map(|c| c / lead).collect();

    // Cauchy-type inclusion radius.
    let radius = 1.0
        + monic[..deg]
            .iter()
            .map(|c| c.norm())
            .fold(0.0_f64, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..deg)
        .map(|i| seed.powu(i as u32 + 1) * radius / seed.norm().powi(i as i32 + 1) * 0.9)
        .collect();

    let eval = |z: Complex64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in monic.iter().rev() {
            acc = acc * z + c;
        }
        acc
    };

    for _ in 0..600 {
        let mut moved = 0.0_f64;
        for i in 0..deg {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..deg {
                if j != i {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm() <= 1e-280 {
                // nudge coincident iterates apart
                roots[i] += Complex64::new(1e-8, 1e-8);
                continue;
            }
            let delta = eval(roots[i]) / denom;
            roots[i] -= delta;
            moved = moved.max(delta.norm());
        }
        if moved <= 1e-13 * radius {
            break;
        }
    }
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn roots_of_quadratic() {
        // (z - 2)(z + 3i) = z^2 + (3i - 2) z - 6i
        let coeffs = vec![c(0.0, -6.0), c(-2.0, 3.0), c(1.0, 0.0)];
        let mut roots = polynomial_roots(&coeffs).unwrap();
        roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((roots[0] - c(0.0, -3.0)).norm() < 1e-9);
        assert!((roots[1] - c(2.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn repeated_root_at_origin_is_found() {
        // z^3
        let coeffs = vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let roots = polynomial_roots(&coeffs).unwrap();
        assert_eq!(roots.len(), 3);
        for r in roots {
            assert!(r.norm() < 1e-3, "{r}");
        }
    }

    #[test]
    fn det_coeffs_of_diagonal_factor() {
        // F(z) = diag(1 + z, 2): det = 2 + 2z
        let f = AnalyticFactor::new(vec![
            ComplexMatrix::diag(&[1.0, 2.0]),
            ComplexMatrix::diag(&[1.0, 0.0]),
        ])
        .unwrap();
        let coeffs = det_poly_coeffs(&f).unwrap();
        assert!((coeffs[0] - c(2.0, 0.0)).norm() < 1e-10);
        assert!((coeffs[1] - c(2.0, 0.0)).norm() < 1e-10);
        for extra in &coeffs[2..] {
            assert!(extra.norm() < 1e-10);
        }
    }

    #[test]
    fn random_factor_roots_satisfy_det_zero() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let f = AnalyticFactor::new((0..3).map(|_| crate::random::matrix(&mut rng, 2)).collect())
            .unwrap();
        let roots = polynomial_roots(&det_poly_coeffs(&f).unwrap()).unwrap();
        for r in roots {
            let value = det(&f.eval_z(r));
            assert!(value.norm() < 1e-6, "det at root = {value}");
        }
    }
}
