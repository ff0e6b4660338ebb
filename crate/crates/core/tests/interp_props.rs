//! Sandwich soundness, endpoint continuity and exactness families for
//! the interpolation layer.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nclab_core::interp::{
    decompose_min_sum, dual_lower, optimize_certificate, s2_dual_witness, sandwich, SandwichConfig,
};
use nclab_core::matcore::eig::op_norm;
use nclab_core::matcore::matrix::ComplexMatrix;
use nclab_core::matcore::WeightedTrace;
use nclab_core::multiplier::MultiplierMap;
use nclab_core::random;
use nclab_core::schatten::{col_norm, row_norm, MatrixTuple};

#[test]
fn lower_never_exceeds_upper() {
    let mut rng = ChaCha8Rng::seed_from_u64(515);
    let phi = WeightedTrace::standard(2);
    for trial in 0..20 {
        let x = MatrixTuple::new((0..2).map(|_| random::matrix(&mut rng, 2)).collect()).unwrap();
        let theta = [0.25, 0.5, 0.75][trial % 3];
        let search = optimize_certificate(&x, theta, 25).unwrap();
        let xi = s2_dual_witness(&x, &phi).unwrap();
        let lower = dual_lower(&x, theta, &xi, &phi, 15).unwrap();
        assert!(
            lower <= search.bound + 1e-9 * search.bound.max(1.0),
            "trial {trial} theta={theta}: lower {lower} vs upper {}",
            search.bound
        );
    }
}

#[test]
fn theta_endpoint_continuity() {
    let mut rng = ChaCha8Rng::seed_from_u64(616);
    for _ in 0..10 {
        let x = MatrixTuple::new((0..3).map(|_| random::matrix(&mut rng, 3)).collect()).unwrap();
        let r = row_norm(&x).unwrap();
        let c = col_norm(&x).unwrap();
        // approach along {0.1, 0.01}: within 2% at the end of the sequence
        let at_01 = optimize_certificate(&x, 0.1, 40).unwrap().bound;
        let at_001 = optimize_certificate(&x, 0.01, 40).unwrap().bound;
        assert!((at_001 - r).abs() <= 0.02 * r, "{at_001} vs row {r}");
        assert!(
            (at_001 - r).abs() <= (at_01 - r).abs() + 1e-9,
            "not approaching"
        );
        // symmetric for theta -> 1 and the column norm
        let at_99 = optimize_certificate(&x, 0.99, 40).unwrap().bound;
        assert!((at_99 - c).abs() <= 0.02 * c, "{at_99} vs col {c}");
    }
}

#[test]
fn singletons_are_exact_at_all_theta() {
    let mut rng = ChaCha8Rng::seed_from_u64(717);
    let phi = WeightedTrace::standard(3);
    for trial in 0..100 {
        let x = MatrixTuple::new(vec![random::matrix(&mut rng, 3)]).unwrap();
        let expected = op_norm(x.entry(0)).unwrap();
        let theta = [0.25, 0.5, 0.75][trial % 3];
        let upper = optimize_certificate(&x, theta, 8).unwrap().bound;
        let xi = s2_dual_witness(&x, &phi).unwrap();
        let lower = dual_lower(&x, theta, &xi, &phi, 8).unwrap();
        assert!(
            (upper - expected).abs() <= 1e-6 * expected,
            "upper {upper} vs {expected}"
        );
        assert!(
            (lower - expected).abs() <= 1e-6 * expected,
            "lower {lower} vs {expected}"
        );
    }
}

#[test]
fn diagonal_tuples_reduce_to_the_commutative_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(818);
    let phi = WeightedTrace::standard(3);
    for trial in 0..20 {
        let entries: Vec<ComplexMatrix> = (0..3)
            .map(|_| {
                let diag: Vec<f64> = (0..3).map(|_| random::gauss(&mut rng)).collect();
                ComplexMatrix::diag(&diag)
            })
            .collect();
        let x = MatrixTuple::new(entries).unwrap();
        let expected = (0..3)
            .map(|k| {
                (0..3)
                    .map(|i| x.entry(i)[(k, k)].norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0_f64, f64::max);
        let theta = [0.3, 0.5, 0.8][trial % 3];
        let upper = optimize_certificate(&x, theta, 20).unwrap().bound;
        let xi = s2_dual_witness(&x, &phi).unwrap();
        let lower = dual_lower(&x, theta, &xi, &phi, 15).unwrap();
        assert!((upper - expected).abs() <= 1e-6 * expected.max(1e-12));
        assert!((lower - expected).abs() <= 1e-6 * expected.max(1e-12));
    }
}

#[test]
fn sandwich_certifies_the_multiplier_norm_at_half() {
    let mut rng = ChaCha8Rng::seed_from_u64(919);
    let phi = WeightedTrace::standard(2);
    let config = SandwichConfig::default();
    for _ in 0..15 {
        let x = MatrixTuple::new((0..2).map(|_| random::matrix(&mut rng, 2)).collect()).unwrap();
        let report = sandwich(&x, 0.5, &phi, &config).unwrap();
        assert!(report.consistent, "{report:?}");
        assert!(report.gap <= 0.02, "{report:?}");
    }
}

#[test]
fn decomposition_bound_tracks_the_multiplier_normalization() {
    let mut rng = ChaCha8Rng::seed_from_u64(111);
    for trial in 0..10 {
        let d = 2 + (trial % 2);
        let n = 2 + (trial % 2);
        let phi = WeightedTrace::standard(d);
        let x = MatrixTuple::new((0..n).map(|_| random::matrix(&mut rng, d)).collect()).unwrap();
        let s2 = MultiplierMap::cp_from(x.clone()).s2_norm(&phi).unwrap();
        let xn = x.scale(1.0 / s2.sqrt());
        let dec = decompose_min_sum(&xn, 300).unwrap();
        assert!(
            dec.objective <= 1.0 + 5e-3,
            "trial {trial}: {}",
            dec.objective
        );
        assert!(dec.additivity_defect(&xn).unwrap() <= 1e-10);
        let recomputed = dec.recompute_objective().unwrap();
        assert!((dec.objective - recomputed).abs() <= 1e-12);
    }
}

#[test]
fn decomposition_is_scale_covariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(222);
    let x = MatrixTuple::new((0..2).map(|_| random::matrix(&mut rng, 2)).collect()).unwrap();
    let dec1 = decompose_min_sum(&x, 200).unwrap();
    let lambda = 2.5;
    let dec2 = decompose_min_sum(&x.scale(lambda), 200).unwrap();
    assert!(
        (dec2.objective - lambda * dec1.objective).abs() <= 1e-6 * dec2.objective.max(1.0),
        "{} vs {}",
        dec2.objective,
        lambda * dec1.objective
    );
}
