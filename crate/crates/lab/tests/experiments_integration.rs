//! Cross-module experiment properties at realistic trial counts.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nclab::checks::{projected_trace_bound, tomiyama_check, unitary_compression_check};
use nclab::constant::row_col_constant;
use nclab::hypertrace::{hypertrace_find, HypertraceConstraint};
use nclab::superop::LinearSuperoperator;
use nclab_core::matcore::condexp::ConditionalExpectation;
use nclab_core::matcore::matrix::ComplexMatrix;
use nclab_core::matcore::{BlockAlgebra, WeightedTrace};
use nclab_core::random;
use nclab_core::schatten::MatrixTuple;

#[test]
fn expectation_constant_never_exceeds_one_across_many_trials() {
    // 10^4 random tuples across small configurations
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let configs = [(2, 2), (2, 4), (4, 2), (4, 4)];
    for (ci, &(d, n)) in configs.iter().enumerate() {
        let blocks: Vec<usize> = if d == 2 { vec![1, 1] } else { vec![2, 1, 1] };
        let m = BlockAlgebra::block_diagonal(&blocks);
        let phi = WeightedTrace::standard(d);
        let e = ConditionalExpectation::new(&m, &phi).unwrap();
        let p = LinearSuperoperator::from_cond_expectation(&e);
        let mut worst = 0.0_f64;
        for _ in 0..2500 {
            let tuple: Vec<ComplexMatrix> = (0..n).map(|_| random::matrix(&mut rng, d)).collect();
            let mut col_num = ComplexMatrix::zeros(d, d);
            let mut col_den = ComplexMatrix::zeros(d, d);
            for x in &tuple {
                let px = p.apply(x).unwrap();
                col_num = &col_num + &px.adjoint().matmul(&px);
                col_den = &col_den + &x.adjoint().matmul(x);
            }
            let num = nclab_core::matcore::eig::op_norm(&col_num).unwrap();
            let den = nclab_core::matcore::eig::op_norm(&col_den).unwrap();
            if den > 1e-12 {
                worst = worst.max((num / den).sqrt());
            }
        }
        assert!(worst <= 1.0 + 1e-6, "config {ci}: worst ratio {worst}");
    }
}

#[test]
fn corollary_style_bound_with_supplied_constant() {
    let mut rng = ChaCha8Rng::seed_from_u64(321);
    let d = 2;
    let m = BlockAlgebra::block_diagonal(&[1, 1]);
    let phi = WeightedTrace::standard(d);
    let e = ConditionalExpectation::new(&m, &phi).unwrap();
    let p = LinearSuperoperator::from_cond_expectation(&e);
    let tau = ComplexMatrix::identity(d).scale(1.0 / d as f64);
    for _ in 0..20 {
        let x = MatrixTuple::new((0..2).map(|_| random::matrix(&mut rng, d)).collect()).unwrap();
        let report = projected_trace_bound(&p, &x, &tau, 1.0, &phi).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.traciality_defect <= 1e-10 * report.lhs_row.max(1.0));
    }
    // zero tuple degenerates to 0 <= 0
    let zero = MatrixTuple::new(vec![ComplexMatrix::zeros(d, d); 2]).unwrap();
    let report = projected_trace_bound(&p, &zero, &tau, 1.0, &phi).unwrap();
    assert!(report.lhs_row.abs() <= 1e-12 && report.pass);
    // singleton unitary: lhs = 1 <= C^2 * 1
    let u = random::unitary(&mut rng, d);
    let x = MatrixTuple::new(vec![u]).unwrap();
    let full = BlockAlgebra::full(d);
    let ef = ConditionalExpectation::new(&full, &phi).unwrap();
    let pf = LinearSuperoperator::from_cond_expectation(&ef);
    let report = projected_trace_bound(&pf, &x, &tau, 1.0, &phi).unwrap();
    assert!((report.lhs_row - 1.0).abs() <= 1e-9 && report.pass);
}

#[test]
fn hypertrace_with_multiplicity_blocks() {
    // M = M_2 (x) I_2 inside M_4: commutant is bigger than the center,
    // Dykstra still lands on a valid hypertrace
    let m = BlockAlgebra::block_diagonal_with_multiplicity(&[(2, 2)]);
    let n = BlockAlgebra::full(4);
    let phi = WeightedTrace::standard(4);
    let constraint = HypertraceConstraint::ExtendState {
        projections: vec![ComplexMatrix::identity(4)],
        weights: vec![1.0],
    };
    let outcome = hypertrace_find(&m, &n, &phi, &constraint, 20000).unwrap();
    assert!(outcome.converged, "{outcome:?}");
    assert!(outcome.commutator_residual <= 1e-8);
    assert!(outcome.trace_error <= 1e-10);
    assert!(outcome.min_eigenvalue >= -1e-10);
    assert!(outcome.tracial_restriction_defect <= 1e-8);
}

#[test]
fn hypertrace_supports_central_projection_constraint() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let u = random::unitary(&mut rng, 3);
    let m = BlockAlgebra::block_diagonal(&[2, 1]).conjugated(&u);
    let n = BlockAlgebra::full(3);
    let phi = WeightedTrace::standard(3);
    // p = conjugated second-block identity
    let mut p0 = ComplexMatrix::zeros(3, 3);
    p0[(2, 2)] = Complex64::new(1.0, 0.0);
    let p = u.matmul(&p0).matmul(&u.adjoint());
    let constraint = HypertraceConstraint::CentralProjection(p.clone());
    let outcome = hypertrace_find(&m, &n, &phi, &constraint, 20000).unwrap();
    assert!(outcome.converged);
    assert!(
        outcome.extension_error <= 1e-8,
        "{}",
        outcome.extension_error
    );
    // support is inside p: omega(1 - p) = 0
    let complement = &ComplexMatrix::identity(3) - &p;
    let mass = phi.apply(&outcome.density.matmul(&complement)).norm();
    assert!(mass <= 1e-8);
}

#[test]
fn compression_checks_across_dimensions() {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    for d in [2usize, 3] {
        let phi = WeightedTrace::standard(d);
        let m = BlockAlgebra::full(d);
        for n in 1..=3usize {
            let us: Vec<ComplexMatrix> = (0..n).map(|_| random::unitary(&mut rng, d)).collect();
            let report =
                unitary_compression_check(&m, &us, &ComplexMatrix::identity(d), &phi).unwrap();
            assert!(report.pass, "d={d} n={n}: {report:?}");
        }
    }
}

#[test]
fn tomiyama_on_conjugated_and_weighted_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(4040);
    // conjugated subalgebras pair with the plain trace
    for trial in 0..5 {
        let blocks = match trial % 3 {
            0 => vec![2, 2],
            1 => vec![3, 1],
            _ => vec![2, 1, 1],
        };
        let d: usize = blocks.iter().sum();
        let u = random::unitary(&mut rng, d);
        let m = BlockAlgebra::block_diagonal(&blocks).conjugated(&u);
        let phi = WeightedTrace::standard(d);
        let e = ConditionalExpectation::new(&m, &phi).unwrap();
        let p = LinearSuperoperator::from_cond_expectation(&e);
        let report = tomiyama_check(&p, &m).unwrap();
        assert!(report.all_pass, "trial {trial}: {report:?}");
    }
    // canonical nested subalgebras pair with block-matched weights
    for trial in 0..5 {
        let m = BlockAlgebra::block_diagonal_with_multiplicity(&[(1, 2), (2, 1)]);
        let weights = random::positive_weights(&mut rng, 2, 0.5, 2.0);
        let phi = WeightedTrace::new(vec![2, 2], weights).unwrap();
        let e = ConditionalExpectation::new(&m, &phi).unwrap();
        let p = LinearSuperoperator::from_cond_expectation(&e);
        let report = tomiyama_check(&p, &m).unwrap();
        assert!(report.all_pass, "trial {trial}: {report:?}");
    }
}

#[test]
fn incompatible_trace_is_rejected_for_expectations() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let u = random::unitary(&mut rng, 4);
    let m = BlockAlgebra::block_diagonal(&[2, 2]).conjugated(&u);
    let phi = WeightedTrace::new(vec![2, 2], vec![1.0, 3.0]).unwrap();
    assert!(ConditionalExpectation::new(&m, &phi).is_err());
}

#[test]
fn scaled_expectation_constant_matches_homogeneity() {
    let m = BlockAlgebra::block_diagonal(&[1, 1]);
    let phi = WeightedTrace::standard(2);
    let e = ConditionalExpectation::new(&m, &phi).unwrap();
    let p = LinearSuperoperator::from_cond_expectation(&e).scale(2.0);
    let report = row_col_constant(&p, 2, 100, 200, 3).unwrap();
    assert!((report.c_lower - 2.0).abs() <= 1e-6, "{}", report.c_lower);
}
