//! Witness-backed lower estimate of the best row/column constant of a
//! linear map: the largest C such that some tuple violates
//! |sum P(x_i)* P(x_i)| <= C^2 |sum x_i* x_i| or its row-sided twin.
//!
//! Only a lower estimate is reported; certifying an upper bound would
//! need a completely-bounded-norm solver.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use nclab_core::error::Result;
use nclab_core::matcore::eig::op_norm;
use nclab_core::matcore::matrix::ComplexMatrix;
use nclab_core::random;
use nclab_core::schatten::MatrixTuple;

use crate::superop::LinearSuperoperator;

#[derive(Clone, Debug, Serialize)]
pub struct ConstantReport {
    pub c_lower: f64,
    pub witness: MatrixTuple,
    pub trials: usize,
    pub ascent_steps: usize,
}

fn ratio(p: &LinearSuperoperator, tuple: &[ComplexMatrix]) -> Result<f64> {
    let d = tuple[0].rows();
    let mut col_num = ComplexMatrix::zeros(d, d);
    let mut col_den = ComplexMatrix::zeros(d, d);
    let mut row_num = ComplexMatrix::zeros(d, d);
    let mut row_den = ComplexMatrix::zeros(d, d);
    for x in tuple {
        let px = p.apply(x)?;
        col_num = &col_num + &px.adjoint().matmul(&px);
        col_den = &col_den + &x.adjoint().matmul(x);
        row_num = &row_num + &px.matmul(&px.adjoint());
        row_den = &row_den + &x.matmul(&x.adjoint());
    }
    let col_ratio = {
        let den = op_norm(&col_den)?;
        if den <= 1e-300 {
            0.0
        } else {
            (op_norm(&col_num)? / den).sqrt()
        }
    };
    let row_ratio = {
        let den = op_norm(&row_den)?;
        if den <= 1e-300 {
            0.0
        } else {
            (op_norm(&row_num)? / den).sqrt()
        }
    };
    Ok(col_ratio.max(row_ratio))
}

/// Enumerates sparse structured candidates: n-tuples of matrix units
/// (when the count is small) and singleton-style tuples from the top
/// singular directions of the action matrix. Extremal tuples for maps
/// like expectations and the transpose live exactly there.
fn structured_candidates(p: &LinearSuperoperator, n: usize) -> Result<Vec<Vec<ComplexMatrix>>> {
    let d = p.dim();
    let mut out = Vec::new();
    let units: Vec<ComplexMatrix> = (0..d * d)
        .map(|k| ComplexMatrix::unit(d, k / d, k % d))
        .collect();
    let combos = (units.len() as f64).powi(n as i32);
    if combos <= 4096.0 {
        let mut index = vec![0usize; n];
        loop {
            out.push(index.iter().map(|&k| units[k].clone()).collect());
            let mut pos = 0;
            loop {
                index[pos] += 1;
                if index[pos] < units.len() {
                    break;
                }
                index[pos] = 0;
                pos += 1;
                if pos == n {
                    return finish_with_spectral(p, n, out);
                }
            }
        }
    }
    finish_with_spectral(p, n, out)
}

fn finish_with_spectral(
    p: &LinearSuperoperator,
    n: usize,
    mut out: Vec<Vec<ComplexMatrix>>,
) -> Result<Vec<Vec<ComplexMatrix>>> {
    let d = p.dim();
    let gram = p.action().adjoint().matmul(p.action());
    let (_, vecs) = nclab_core::matcore::eig::herm_eig(&gram)?;
    for j in 0..(d * d).min(4) {
        let col: Vec<_> = (0..d * d).map(|i| vecs[(i, j)]).collect();
        let x = ComplexMatrix::unvec(&col, d, d);
        out.push(vec![x; n]);
    }
    Ok(out)
}

/// Random search plus structured candidates and hill-climbing
/// refinement over n-tuples. The value is a valid lower estimate of the
/// best constant on every instance.
pub fn row_col_constant(
    p: &LinearSuperoperator,
    n: usize,
    trials: usize,
    ascent_steps: usize,
    seed: u64,
) -> Result<ConstantReport> {
    let d = p.dim();
    let mut best_tuple: Vec<ComplexMatrix> = Vec::new();
    let mut best = -1.0_f64;

    for trial in 0..trials.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(random::derive_seed(seed, trial as u64));
        let tuple: Vec<ComplexMatrix> = (0..n).map(|_| random::matrix(&mut rng, d)).collect();
        let r = ratio(p, &tuple)?;
        if r > best {
            best = r;
            best_tuple = tuple;
        }
    }
    for tuple in structured_candidates(p, n)? {
        let r = ratio(p, &tuple)?;
        if r > best {
            best = r;
            best_tuple = tuple;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(random::derive_seed(seed, 0xA5CE_u64));
    let mut sigma = 0.3;
    for _ in 0..ascent_steps {
        let scale = best_tuple
            .iter()
            .map(|x| x.fro_norm())
            .fold(0.0_f64, f64::max)
            .max(1.0);
        let candidate: Vec<ComplexMatrix> = best_tuple
            .iter()
            .map(|x| x + &random::matrix(&mut rng, d).scale(sigma * scale))
            .collect();
        let r = ratio(p, &candidate)?;
        if r > best {
            best = r;
            best_tuple = candidate;
            sigma *= 1.15;
        } else {
            sigma *= 0.95;
            if sigma < 1e-10 {
                sigma = 0.05;
            }
        }
    }

    Ok(ConstantReport {
        c_lower: best.max(0.0),
        witness: MatrixTuple::new(best_tuple)?,
        trials,
        ascent_steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nclab_core::matcore::condexp::ConditionalExpectation;
    use nclab_core::matcore::{BlockAlgebra, WeightedTrace};

    #[test]
    fn expectation_constant_is_one() {
        let m = BlockAlgebra::block_diagonal(&[1, 1]);
        let phi = WeightedTrace::standard(2);
        let e = ConditionalExpectation::new(&m, &phi).unwrap();
        let p = LinearSuperoperator::from_cond_expectation(&e);
        let report = row_col_constant(&p, 3, 200, 100, 7).unwrap();
        assert!(report.c_lower <= 1.0 + 1e-6, "{}", report.c_lower);

        // homogeneity: 2 E has constant exactly 2
        let p2 = p.scale(2.0);
        let report = row_col_constant(&p2, 2, 100, 100, 7).unwrap();
        assert!(report.c_lower >= 2.0 - 1e-6 && report.c_lower <= 2.0 + 1e-6);
    }

    #[test]
    fn transpose_constant_reaches_sqrt_two() {
        let p = LinearSuperoperator::transpose_map(2);
        let report = row_col_constant(&p, 2, 400, 600, 11).unwrap();
        assert!(
            report.c_lower >= 2.0_f64.sqrt() - 1e-3,
            "{}",
            report.c_lower
        );
    }
}
