//! Duality, invariance and norm-axiom properties of the Schatten layer.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nclab_core::matcore::eig::{mat_powf, polar_unitary};
use nclab_core::matcore::matrix::ComplexMatrix;
use nclab_core::matcore::{BlockAlgebra, WeightedTrace};
use nclab_core::random;
use nclab_core::schatten::{
    col_norm, dual_tuple_norm, row_norm, schatten_norm, trace_pairing, DualSide, MatrixTuple,
    PNormIndex,
};

/// Certificate value for the Hölder duality sup |phi(x y)| over the unit
/// ball of the conjugate norm, built from the polar decomposition.
fn holder_certificate(x: &ComplexMatrix, p: f64, phi: &WeightedTrace) -> f64 {
    let gram = x.adjoint().matmul(x);
    let absx = mat_powf(&gram, 0.5).unwrap();
    let u = polar_unitary(x).unwrap();
    let y = if p == 1.0 {
        u.adjoint()
    } else {
        mat_powf(&absx, p - 1.0).unwrap().matmul(&u.adjoint())
    };
    let q = PNormIndex::new(p).unwrap().conjugate();
    let dual = schatten_norm(&y, q, phi).unwrap();
    if dual <= 1e-300 {
        return 0.0;
    }
    phi.apply(&x.matmul(&y)).norm() / dual
}

#[test]
fn holder_duality_on_two_hundred_block_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let p_grid = [1.0, 1.25, 1.5, 2.0, 3.0, 5.0];
    for trial in 0..200 {
        // block algebra with 1-3 blocks, total dim <= 4, weighted trace
        let blocks: Vec<usize> = match trial % 3 {
            0 => vec![2, 2],
            1 => vec![3, 1],
            _ => vec![4],
        };
        let d: usize = blocks.iter().sum();
        let alg = BlockAlgebra::block_diagonal(&blocks);
        let weights = random::positive_weights(&mut rng, blocks.len(), 0.4, 2.5);
        let phi = WeightedTrace::new(blocks.clone(), weights).unwrap();
        let x = random::span_element(&mut rng, alg.basis());
        let p = p_grid[trial % p_grid.len()];
        let norm = schatten_norm(&x, PNormIndex::new(p).unwrap(), &phi).unwrap();
        let certified = holder_certificate(&x, p, &phi);
        assert!(
            (norm - certified).abs() <= 1e-8 * norm.max(1.0),
            "trial {trial} d={d} p={p}: {norm} vs {certified}"
        );
    }
}

#[test]
fn tuple_norms_are_unitarily_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    for _ in 0..25 {
        let d = 3;
        let t = MatrixTuple::new((0..3).map(|_| random::matrix(&mut rng, d)).collect()).unwrap();
        let u = random::unitary(&mut rng, d);
        // col norm invariant under common left multiplication
        let left = t.map(|x| u.matmul(x));
        assert!((col_norm(&left).unwrap() - col_norm(&t).unwrap()).abs() <= 1e-10);
        // row norm invariant under common right multiplication
        let right = t.map(|x| x.matmul(&u));
        assert!((row_norm(&right).unwrap() - row_norm(&t).unwrap()).abs() <= 1e-10);
    }
}

#[test]
fn pairing_is_dominated_by_dual_norm_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let phi = WeightedTrace::standard(3);
    for _ in 0..50 {
        let n = 1 + (rand::Rng::random::<u32>(&mut rng) % 3) as usize;
        let xi = MatrixTuple::new((0..n).map(|_| random::matrix(&mut rng, 3)).collect()).unwrap();
        let x = MatrixTuple::new((0..n).map(|_| random::matrix(&mut rng, 3)).collect()).unwrap();
        let pairing = trace_pairing(&xi, &x, &phi).unwrap().norm();
        let bound_col =
            dual_tuple_norm(&xi, DualSide::ColStar, &phi).unwrap() * row_norm(&x).unwrap();
        let bound_row =
            dual_tuple_norm(&xi, DualSide::RowStar, &phi).unwrap() * col_norm(&x).unwrap();
        assert!(
            pairing <= bound_col + 1e-9 * bound_col.max(1.0),
            "{pairing} vs {bound_col}"
        );
        assert!(
            pairing <= bound_row + 1e-9 * bound_row.max(1.0),
            "{pairing} vs {bound_row}"
        );
    }
}

fn arb_tuple(n: usize, d: usize) -> impl Strategy<Value = MatrixTuple> {
    proptest::collection::vec(proptest::collection::vec(-3.0..3.0f64, 2 * d * d), n..=n).prop_map(
        move |mats| {
            MatrixTuple::new(
                mats.into_iter()
                    .map(|flat| {
                        ComplexMatrix::from_fn(d, d, |i, j| {
                            num_complex::Complex64::new(
                                flat[2 * (i * d + j)],
                                flat[2 * (i * d + j) + 1],
                            )
                        })
                    })
                    .collect(),
            )
            .unwrap()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn row_and_col_norms_satisfy_norm_axioms(
        a in arb_tuple(2, 2),
        b in arb_tuple(2, 2),
        lambda in -4.0..4.0f64,
    ) {
        let sum = a.add(&b).unwrap();
        let triangle_row = row_norm(&sum).unwrap()
            <= row_norm(&a).unwrap() + row_norm(&b).unwrap() + 1e-9;
        let triangle_col = col_norm(&sum).unwrap()
            <= col_norm(&a).unwrap() + col_norm(&b).unwrap() + 1e-9;
        prop_assert!(triangle_row);
        prop_assert!(triangle_col);

        let scaled = a.scale(lambda);
        let hom_row = (row_norm(&scaled).unwrap() - lambda.abs() * row_norm(&a).unwrap()).abs()
            <= 1e-10 * (1.0 + row_norm(&a).unwrap());
        prop_assert!(hom_row);
    }

    #[test]
    fn matrix_json_roundtrip(flat in proptest::collection::vec(-1.0e6..1.0e6f64, 8)) {
        let m = ComplexMatrix::from_fn(2, 2, |i, j| {
            num_complex::Complex64::new(flat[2 * (i * 2 + j)], flat[2 * (i * 2 + j) + 1])
        });
        let text = serde_json::to_string(&m).unwrap();
        let back: ComplexMatrix = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(m, back);
    }
}
