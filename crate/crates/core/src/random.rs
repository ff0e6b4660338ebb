//! Seeded random generators for matrices, algebras and tuples.
//!
//! Every experiment derives all of its randomness from one 64-bit seed
//! through fixed arithmetic, so reports are reproducible byte for byte.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::matcore::eig::orthonormalize_columns;
use crate::matcore::matrix::ComplexMatrix;

/// Stream `index` derived from a base experiment seed.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    base.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xBF58_476D_1CE4_E5B9))
        .wrapping_add(0x94D0_49BB_1331_11EB)
}

/// Standard normal via Box-Muller.
pub fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn complex_gauss(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(gauss(rng), gauss(rng))
}

/// Square matrix with i.i.d. complex Gaussian entries.
pub fn matrix(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |_, _| complex_gauss(rng))
}

pub fn hermitian(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    matrix(rng, d).hermitize()
}

/// PSD matrix g* g with Gaussian g.
pub fn psd(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    let g = matrix(rng, d);
    g.adjoint().matmul(&g)
}

/// Haar-ish unitary from Gram-Schmidt of a Gaussian matrix.
pub fn unitary(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    orthonormalize_columns(&matrix(rng, d))
}

/// Random element of the span of a basis, with Gaussian coefficients.
pub fn span_element(rng: &mut ChaCha8Rng, basis: &[ComplexMatrix]) -> ComplexMatrix {
    let mut acc = ComplexMatrix::zeros(basis[0].rows(), basis[0].cols());
    for b in basis {
        acc = &acc + &b.scale_c(complex_gauss(rng));
    }
    acc
}

/// Random probability vector of length `k` (strictly positive entries).
pub fn state_weights(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.05).collect();
    let total: f64 = w.iter().sum();
    for v in &mut w {
        *v /= total;
    }
    w
}

/// Random strictly positive weights in [lo, hi].
pub fn positive_weights(rng: &mut ChaCha8Rng, k: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..k)
        .map(|_| lo + (hi - lo) * rng.random::<f64>())
        .collect()
}
