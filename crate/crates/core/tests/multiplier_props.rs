//! Oracle agreement and cone properties of the multiplier layer.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nclab_core::matcore::WeightedTrace;
use nclab_core::multiplier::{s2_norm_matrix_free, MultiplierMap, PowerIterConfig};
use nclab_core::random;
use nclab_core::schatten::{MatrixTuple, PNormIndex};

#[test]
fn matricized_s2_matches_matrix_free_search() {
    // independent route: the oracle never forms the Kronecker
    // matricization, it only applies T and its L2 adjoint to samples
    let mut rng = ChaCha8Rng::seed_from_u64(31337);
    for trial in 0..20 {
        let d = 2 + (trial % 3);
        let n = 1 + (trial % 3);
        let t = MultiplierMap::cp_from(
            MatrixTuple::new((0..n).map(|_| random::matrix(&mut rng, d)).collect()).unwrap(),
        );
        let phi = WeightedTrace::standard(d);
        let exact = t.s2_norm(&phi).unwrap();
        let oracle = s2_norm_matrix_free(&t, &phi, 10_000, 400, 50 + trial as u64).unwrap();
        assert!(
            (exact - oracle).abs() <= 1e-6 * exact.max(1.0),
            "trial {trial}: {exact} vs {oracle}"
        );
    }
}

#[test]
fn weighted_s2_matches_matrix_free_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let phi = WeightedTrace::new(vec![2, 2], vec![0.7, 2.3]).unwrap();
    for trial in 0..5 {
        let t = MultiplierMap::cp_from(
            MatrixTuple::new((0..2).map(|_| random::matrix(&mut rng, 4)).collect()).unwrap(),
        );
        let exact = t.s2_norm(&phi).unwrap();
        let oracle = s2_norm_matrix_free(&t, &phi, 3000, 500, 99 + trial).unwrap();
        assert!(
            (exact - oracle).abs() <= 1e-6 * exact.max(1.0),
            "{exact} vs {oracle}"
        );
    }
}

#[test]
fn sp_interval_always_ordered_with_psd_witness() {
    let mut rng = ChaCha8Rng::seed_from_u64(11111);
    let config = PowerIterConfig {
        starts: 8,
        ..PowerIterConfig::default()
    };
    for trial in 0..10 {
        let d = 2 + (trial % 2);
        let t = MultiplierMap::cp_from(
            MatrixTuple::new((0..2).map(|_| random::matrix(&mut rng, d)).collect()).unwrap(),
        );
        let phi = WeightedTrace::standard(d);
        for p in [1.0, 1.5, 2.0, 4.0] {
            let bounds = t
                .sp_norm_bounds(PNormIndex::new(p).unwrap(), &phi, &config)
                .unwrap();
            assert!(
                bounds.lower <= bounds.upper + 1e-9 * bounds.upper.max(1.0),
                "p={p}: [{}, {}]",
                bounds.lower,
                bounds.upper
            );
            // witness is PSD and achieves the reported lower bound
            let witness_min =
                nclab_core::matcore::eig::min_eigenvalue(&bounds.witness.hermitize()).unwrap();
            assert!(witness_min >= -1e-9);
            let ny = nclab_core::schatten::schatten_norm(
                &bounds.witness,
                PNormIndex::new(p).unwrap(),
                &phi,
            )
            .unwrap();
            if ny > 1e-12 {
                let ratio = nclab_core::schatten::schatten_norm(
                    &t.apply(&bounds.witness).unwrap(),
                    PNormIndex::new(p).unwrap(),
                    &phi,
                )
                .unwrap()
                    / ny;
                assert!(
                    (ratio - bounds.lower).abs() <= 1e-8 * bounds.lower.max(1.0),
                    "witness ratio {ratio} vs reported {}",
                    bounds.lower
                );
            }
        }
    }
}

#[test]
fn amplified_norm_never_exceeds_s2() {
    let mut rng = ChaCha8Rng::seed_from_u64(2121);
    let phi = WeightedTrace::standard(3);
    for _ in 0..10 {
        let t = MultiplierMap::cp_from(
            MatrixTuple::new((0..2).map(|_| random::matrix(&mut rng, 3)).collect()).unwrap(),
        );
        let s2 = t.s2_norm(&phi).unwrap();
        for k in 1..=3 {
            let amp = t.amplified_norm(k, &phi).unwrap();
            assert!(amp <= s2 + 1e-10 * s2.max(1.0), "k={k}: {amp} vs {s2}");
        }
    }
}

#[test]
fn unitary_tuples_amplify_to_their_length() {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let phi3 = WeightedTrace::standard(3);
    let phi4 = WeightedTrace::standard(4);
    for n in 1..=3usize {
        for d in [3usize, 4] {
            let t = MultiplierMap::cp_from(
                MatrixTuple::new((0..n).map(|_| random::unitary(&mut rng, d)).collect()).unwrap(),
            );
            let phi = if d == 3 { &phi3 } else { &phi4 };
            for k in 1..=3 {
                let amp = t.amplified_norm(k, phi).unwrap();
                assert!((amp - n as f64).abs() <= 1e-8, "n={n} d={d} k={k}: {amp}");
            }
        }
    }
}
