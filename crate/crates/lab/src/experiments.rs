//! The experiment runner behind `nclab run` / `nclab demo`.
//!
//! A spec file is a single JSON object tagged by `experiment`; every
//! experiment consumes one 64-bit seed and derives all internal
//! randomness from it, so a rerun with the same spec and seed writes a
//! byte-identical report.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::json;

use nclab_core::error::{Error, Result};
use nclab_core::interp::{decompose_min_sum, sandwich, SandwichConfig};
use nclab_core::matcore::condexp::ConditionalExpectation;
use nclab_core::matcore::eig::{mat_powf, polar_unitary};
use nclab_core::matcore::matrix::ComplexMatrix;
use nclab_core::matcore::{BlockAlgebra, WeightedTrace};
use nclab_core::multiplier::{MultiplierMap, PowerIterConfig};
use nclab_core::random;
use nclab_core::schatten::{
    col_norm, dual_tuple_norm, row_norm, schatten_norm, DualSide, MatrixTuple, NormRecord,
    PNormIndex,
};
use nclab_core::szego::{
    factorization_residual, outer_check, random_positive_laurent, scalar_szego_mean,
    wilson_factorize_with, LaurentPolynomial, WilsonInit,
};

use crate::checks::{
    projected_trace_bound, tomiyama_check, unitary_compression_check, unitary_in_algebra,
};
use crate::constant::row_col_constant;
use crate::hypertrace::{hypertrace_find, HypertraceConstraint};
use crate::report::{digest, Assertion, Report, SweepCsv};
use crate::superop::LinearSuperoperator;

fn default_p_values() -> Vec<PNormIndex> {
    vec![
        PNormIndex::Finite(1.0),
        PNormIndex::Finite(1.5),
        PNormIndex::Finite(2.0),
        PNormIndex::Finite(3.0),
        PNormIndex::Infinity,
    ]
}

/// Parsed experiment specification. Each variant owns a flat params
/// struct so parse errors can report the JSON path of the offending key.
#[derive(Clone, Debug)]
pub enum ExperimentSpec {
    Norms(NormsParams),
    Multiplier(MultiplierParams),
    Sandwich(SandwichParams),
    Decompose(DecomposeParams),
    Szego(SzegoParams),
    Hypertrace(HypertraceParams),
    Lemma14(Lemma14Params),
    Corollary13(Corollary13Params),
    Tomiyama(TomiyamaParams),
    Constant(ConstantParams),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormsParams {
    pub tuple: Vec<ComplexMatrix>,
    #[serde(default)]
    pub p_values: Option<Vec<PNormIndex>>,
    #[serde(default)]
    pub block_sizes: Option<Vec<usize>>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiplierParams {
    pub tuple: Vec<ComplexMatrix>,
    #[serde(default)]
    pub p_values: Option<Vec<PNormIndex>>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SandwichParams {
    pub tuple: Vec<ComplexMatrix>,
    pub theta: f64,
    #[serde(default)]
    pub gap_tol: Option<f64>,
    #[serde(default)]
    pub thetas: Option<Vec<f64>>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecomposeParams {
    pub tuple: Vec<ComplexMatrix>,
    #[serde(default)]
    pub normalize: Option<bool>,
    #[serde(default)]
    pub iters: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SzegoParams {
    #[serde(default)]
    pub scalar_cosine: Option<Vec<f64>>,
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub degree: Option<usize>,
    #[serde(default)]
    pub floor: Option<f64>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypertraceParams {
    pub m_blocks: Vec<usize>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    #[serde(default)]
    pub conjugate: Option<bool>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lemma14Params {
    pub n: usize,
    pub d: usize,
    #[serde(default)]
    pub compression: Option<bool>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Corollary13Params {
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomiyamaParams {
    pub m_blocks: Vec<usize>,
    #[serde(default)]
    pub conjugate: Option<bool>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantParams {
    pub map: String,
    pub n: usize,
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub m_blocks: Option<Vec<usize>>,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub ascent: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl ExperimentSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentSpec::Norms(_) => "norms",
            ExperimentSpec::Multiplier(_) => "multiplier",
            ExperimentSpec::Sandwich(_) => "sandwich",
            ExperimentSpec::Decompose(_) => "decompose",
            ExperimentSpec::Szego(_) => "szego",
            ExperimentSpec::Hypertrace(_) => "hypertrace",
            ExperimentSpec::Lemma14(_) => "lemma14",
            ExperimentSpec::Corollary13(_) => "corollary13",
            ExperimentSpec::Tomiyama(_) => "tomiyama",
            ExperimentSpec::Constant(_) => "constant",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            ExperimentSpec::Norms(p) => p.seed,
            ExperimentSpec::Multiplier(p) => p.seed,
            ExperimentSpec::Sandwich(p) => p.seed,
            ExperimentSpec::Decompose(p) => p.seed,
            ExperimentSpec::Szego(p) => p.seed,
            ExperimentSpec::Hypertrace(p) => p.seed,
            ExperimentSpec::Lemma14(p) => p.seed,
            ExperimentSpec::Corollary13(p) => p.seed,
            ExperimentSpec::Tomiyama(p) => p.seed,
            ExperimentSpec::Constant(p) => p.seed,
        }
    }
}

/// Parses a spec, reporting the JSON path of any schema violation.
pub fn parse_spec(bytes: &[u8]) -> std::result::Result<ExperimentSpec, String> {
    let mut value: serde_json::Value =
        serde_json::from_slice(bytes).map_err(|e| format!("malformed JSON: {e}"))?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| "spec must be a JSON object".to_string())?;
    let tag = obj
        .remove("experiment")
        .ok_or_else(|| "experiment: missing key".to_string())?;
    let tag = tag
        .as_str()
        .ok_or_else(|| "experiment: expected a string".to_string())?
        .to_string();
    fn parse_params<T: serde::de::DeserializeOwned>(
        value: serde_json::Value,
    ) -> std::result::Result<T, String> {
        serde_path_to_error::deserialize(value).map_err(|e| format!("{}: {}", e.path(), e.inner()))
    }
    match tag.as_str() {
        "norms" => Ok(ExperimentSpec::Norms(parse_params(value)?)),
        "multiplier" => Ok(ExperimentSpec::Multiplier(parse_params(value)?)),
        "sandwich" => Ok(ExperimentSpec::Sandwich(parse_params(value)?)),
        "decompose" => Ok(ExperimentSpec::Decompose(parse_params(value)?)),
        "szego" => Ok(ExperimentSpec::Szego(parse_params(value)?)),
        "hypertrace" => Ok(ExperimentSpec::Hypertrace(parse_params(value)?)),
        "lemma14" => Ok(ExperimentSpec::Lemma14(parse_params(value)?)),
        "corollary13" => Ok(ExperimentSpec::Corollary13(parse_params(value)?)),
        "tomiyama" => Ok(ExperimentSpec::Tomiyama(parse_params(value)?)),
        "constant" => Ok(ExperimentSpec::Constant(parse_params(value)?)),
        other => Err(format!("unknown experiment name {other:?}")),
    }
}

/// Runs a spec and assembles the report; `raw` is digested as-is.
pub fn run(spec: &ExperimentSpec, seed_override: Option<u64>, raw: &[u8]) -> Result<RunOutcome> {
    let seed = seed_override.or(spec.seed()).unwrap_or(0);
    let (results, assertions, csv) = dispatch(spec, seed)?;
    Ok(RunOutcome {
        report: Report {
            experiment: spec.name().to_string(),
            inputs_digest: digest(raw),
            seed,
            results,
            assertions,
        },
        csv,
    })
}

pub struct RunOutcome {
    pub report: Report,
    pub csv: Option<SweepCsv>,
}

type Pieces = (serde_json::Value, Vec<Assertion>, Option<SweepCsv>);

fn dispatch(spec: &ExperimentSpec, seed: u64) -> Result<Pieces> {
    match spec {
        ExperimentSpec::Norms(p) => run_norms(&p.tuple, &p.p_values, &p.block_sizes, &p.weights),
        ExperimentSpec::Multiplier(p) => run_multiplier(&p.tuple, &p.p_values, seed),
        ExperimentSpec::Sandwich(p) => run_sandwich(
            &p.tuple,
            p.theta,
            p.gap_tol.unwrap_or(0.02),
            &p.thetas,
            seed,
        ),
        ExperimentSpec::Decompose(p) => run_decompose(
            &p.tuple,
            p.normalize.unwrap_or(true),
            p.iters.unwrap_or(300),
        ),
        ExperimentSpec::Szego(p) => run_szego(
            &p.scalar_cosine,
            p.dim.unwrap_or(2),
            p.degree.unwrap_or(2),
            p.floor.unwrap_or(0.4),
            p.tol.unwrap_or(1e-10),
            seed,
        ),
        ExperimentSpec::Hypertrace(p) => {
            run_hypertrace(&p.m_blocks, &p.weights, p.conjugate.unwrap_or(true), seed)
        }
        ExperimentSpec::Lemma14(p) => run_lemma14(p.n, p.d, p.compression.unwrap_or(false), seed),
        ExperimentSpec::Corollary13(p) => run_corollary13(p.n.unwrap_or(2), p.d.unwrap_or(2), seed),
        ExperimentSpec::Tomiyama(p) => {
            run_tomiyama(&p.m_blocks, p.conjugate.unwrap_or(false), seed)
        }
        ExperimentSpec::Constant(p) => run_constant(
            &p.map,
            p.n,
            &p.d,
            &p.m_blocks,
            p.trials.unwrap_or(300),
            p.ascent.unwrap_or(400),
            seed,
        ),
    }
}

fn tuple_from(matrices: &[ComplexMatrix]) -> Result<MatrixTuple> {
    MatrixTuple::new(matrices.to_vec())
}

fn trace_for(
    d: usize,
    block_sizes: &Option<Vec<usize>>,
    weights: &Option<Vec<f64>>,
) -> Result<WeightedTrace> {
    match (block_sizes, weights) {
        (Some(blocks), Some(w)) => {
            let total: usize = blocks.iter().sum();
            if total != d {
                return Err(Error::BlockSizeMismatch { total, dim: d });
            }
            WeightedTrace::new(blocks.clone(), w.clone())
        }
        (None, None) => Ok(WeightedTrace::standard(d)),
        _ => Err(Error::DimensionMismatch {
            left: "block_sizes".to_string(),
            right: "weights".to_string(),
            context: "norms spec: both or neither",
        }),
    }
}

/// Independent Hölder certificate value sup |phi(x y)| over |y|_{p'} <= 1,
/// evaluated at the polar-aligned witness.
fn holder_certificate_value(x: &ComplexMatrix, p: PNormIndex, phi: &WeightedTrace) -> Result<f64> {
    let gram = x.adjoint().matmul(x);
    let absx = mat_powf(&gram, 0.5)?;
    let u = polar_unitary(x)?;
    let y = match p {
        PNormIndex::Infinity => {
            // dual exponent 1: y = D^{-1} v1 v1* u* normalized in S1(phi)
            let (_, vecs) = nclab_core::matcore::eig::herm_eig(&gram)?;
            let d = x.rows();
            let v1 = ComplexMatrix::from_fn(d, 1, |i, _| vecs[(i, 0)]);
            let dinv = mat_powf(&phi.density(), -1.0)?;
            dinv.matmul(&v1.matmul(&v1.adjoint())).matmul(&u.adjoint())
        }
        PNormIndex::Finite(pv) => {
            if pv == 1.0 {
                // dual exponent infinity: y = u*
                u.adjoint()
            } else {
                mat_powf(&absx, pv - 1.0)?.matmul(&u.adjoint())
            }
        }
    };
    let dual_norm = schatten_norm(&y, p.conjugate(), phi)?;
    if dual_norm <= 1e-300 {
        return Ok(0.0);
    }
    Ok(phi.apply(&x.matmul(&y)).norm() / dual_norm)
}

fn run_norms(
    matrices: &[ComplexMatrix],
    p_values: &Option<Vec<PNormIndex>>,
    block_sizes: &Option<Vec<usize>>,
    weights: &Option<Vec<f64>>,
) -> Result<Pieces> {
    let tuple = tuple_from(matrices)?;
    let phi = trace_for(tuple.dim(), block_sizes, weights)?;
    // weighted traces are traces only on their block algebra; require
    // membership there so the reported norms are genuine
    if let Some(blocks) = block_sizes {
        let algebra = BlockAlgebra::block_diagonal(blocks);
        MatrixTuple::in_algebra(matrices.to_vec(), &algebra)?;
    }
    let ps = p_values.clone().unwrap_or_else(default_p_values);

    let mut records: Vec<NormRecord> = vec![
        NormRecord {
            norm_name: "row".to_string(),
            p: PNormIndex::Infinity,
            value: row_norm(&tuple)?,
        },
        NormRecord {
            norm_name: "col".to_string(),
            p: PNormIndex::Infinity,
            value: col_norm(&tuple)?,
        },
        NormRecord {
            norm_name: "dual_row_star".to_string(),
            p: PNormIndex::Finite(1.0),
            value: dual_tuple_norm(&tuple, DualSide::RowStar, &phi)?,
        },
        NormRecord {
            norm_name: "dual_col_star".to_string(),
            p: PNormIndex::Finite(1.0),
            value: dual_tuple_norm(&tuple, DualSide::ColStar, &phi)?,
        },
    ];
    let mut assertions = Vec::new();
    for (i, x) in tuple.entries().iter().enumerate() {
        for &p in &ps {
            let value = schatten_norm(x, p, &phi)?;
            records.push(NormRecord {
                norm_name: format!("schatten_{i}"),
                p,
                value,
            });
            let certified = holder_certificate_value(x, p, &phi)?;
            assertions.push(Assertion::close(
                &format!("holder_duality_entry{i}_p{}", p.value()),
                value,
                certified,
                1e-8 * value.max(1.0),
            ));
        }
    }
    Ok((json!({ "norms": records }), assertions, None))
}

fn run_multiplier(
    matrices: &[ComplexMatrix],
    p_values: &Option<Vec<PNormIndex>>,
    seed: u64,
) -> Result<Pieces> {
    let tuple = tuple_from(matrices)?;
    let phi = WeightedTrace::standard(tuple.dim());
    let t = MultiplierMap::cp_from(tuple);
    let s2 = t.s2_norm(&phi)?;
    let (s_inf, s_1) = t.endpoint_norms()?;
    let ps = p_values.clone().unwrap_or_else(default_p_values);
    let config = PowerIterConfig {
        seed,
        ..PowerIterConfig::default()
    };

    let mut reports = Vec::new();
    let mut rows = Vec::new();
    let mut assertions = vec![Assertion::le(
        "s2_between_endpoints",
        s2,
        (s_inf * s_1).sqrt(),
        1e-9 * s2.max(1.0),
    )];
    for &p in &ps {
        let bounds = t.sp_norm_bounds(p, &phi, &config)?;
        assertions.push(Assertion::le(
            &format!("interval_order_p{}", p.value()),
            bounds.lower,
            bounds.upper,
            1e-9,
        ));
        rows.push((
            if p.value().is_finite() {
                p.value()
            } else {
                -1.0
            },
            0.5 * (bounds.lower + bounds.upper),
            bounds.lower,
            bounds.upper,
        ));
        reports.push(json!({
            "p": p,
            "lower": bounds.lower,
            "upper": bounds.upper,
            "converged": bounds.converged,
            "witness": bounds.witness,
        }));
    }
    let results = json!({
        "s2": s2,
        "s_inf": s_inf,
        "s_1": s_1,
        "bounds": reports,
    });
    let csv = SweepCsv {
        parameter: "p".to_string(),
        rows,
    };
    Ok((results, assertions, Some(csv)))
}

fn run_sandwich(
    matrices: &[ComplexMatrix],
    theta: f64,
    gap_tol: f64,
    thetas: &Option<Vec<f64>>,
    seed: u64,
) -> Result<Pieces> {
    let tuple = tuple_from(matrices)?;
    let phi = WeightedTrace::standard(tuple.dim());
    let config = SandwichConfig {
        power: PowerIterConfig {
            seed,
            ..PowerIterConfig::default()
        },
        ..SandwichConfig::default()
    };
    let report = sandwich(&tuple, theta, &phi, &config)?;
    let assertions = vec![
        Assertion::flag("bounds_consistent_with_rhs", report.consistent),
        Assertion::le("lower_below_upper", report.lower, report.upper, 1e-9),
        Assertion::le("gap_within_tolerance", report.gap, gap_tol, 0.0),
    ];
    let mut csv = None;
    if let Some(sweep) = thetas {
        let mut rows = Vec::new();
        for &th in sweep {
            let r = sandwich(&tuple, th, &phi, &config)?;
            rows.push((th, 0.5 * (r.lower + r.upper), r.lower, r.upper));
        }
        csv = Some(SweepCsv {
            parameter: "theta".to_string(),
            rows,
        });
    }
    let results = serde_json::to_value(&report).expect("serializable");
    Ok((results, assertions, csv))
}

fn run_decompose(matrices: &[ComplexMatrix], normalize: bool, iters: usize) -> Result<Pieces> {
    let mut tuple = tuple_from(matrices)?;
    let phi = WeightedTrace::standard(tuple.dim());
    let mut s2 = MultiplierMap::cp_from(tuple.clone()).s2_norm(&phi)?;
    if normalize {
        if s2 <= 1e-300 {
            return Err(Error::EmptyTuple);
        }
        tuple = tuple.scale(1.0 / s2.sqrt());
        s2 = 1.0;
    }
    let dec = decompose_min_sum(&tuple, iters)?;
    let additivity = dec.additivity_defect(&tuple)?;
    let recomputed = dec.recompute_objective()?;
    let assertions = vec![
        Assertion::le("objective_bound", dec.objective, s2.sqrt(), 5e-3),
        Assertion::close("additivity", additivity, 0.0, 1e-10),
        Assertion::close("objective_recomputable", dec.objective, recomputed, 1e-12),
    ];
    let results = json!({
        "a": dec.a,
        "b": dec.b,
        "objective": dec.objective,
        "converged": dec.converged,
        "s2_after_normalization": s2,
    });
    Ok((results, assertions, None))
}

fn run_szego(
    scalar_cosine: &Option<Vec<f64>>,
    dim: usize,
    degree: usize,
    floor: f64,
    tol: f64,
    seed: u64,
) -> Result<Pieces> {
    let w = match scalar_cosine {
        Some(c) => LaurentPolynomial::scalar_cosine(c)?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            random_positive_laurent(&mut rng, dim, degree, floor)
        }
    };
    let positivity = w.positivity_certificate(nclab_core::szego::BOUNDARY_GRID)?;
    let fact_a = wilson_factorize_with(&w, tol, 100, WilsonInit::ScaledIdentity)?;
    let fact_b = wilson_factorize_with(&w, tol, 100, WilsonInit::CholeskyMean)?;
    let agreement = fact_a.factor.coeff_distance(&fact_b.factor);
    let outer = outer_check(&fact_a.factor)?;
    let residual = factorization_residual(&fact_a.factor, &w)?;

    let mut assertions = vec![
        Assertion::flag("positivity_certified", positivity.pass),
        Assertion::flag("newton_converged", fact_a.converged && fact_b.converged),
        Assertion::le("boundary_residual", residual, tol.max(1e-8), 0.0),
        Assertion::flag("outer", outer.pass),
        Assertion::le("initialization_agreement", agreement, 1e-7, 0.0),
    ];
    let mut results = json!({
        "positivity": positivity,
        "residual": residual,
        "outer_min_modulus": outer.min_modulus,
        "iterations": fact_a.iterations,
        "factor": fact_a.factor,
    });
    if w.dim() == 1 {
        let mean = scalar_szego_mean(&w, &fact_a.factor)?;
        assertions.push(Assertion::close(
            "szego_mean",
            mean.f_zero,
            mean.quadrature,
            1e-6 * mean.quadrature.max(1e-300),
        ));
        results["szego_mean"] = serde_json::to_value(&mean).expect("serializable");
    }
    Ok((results, assertions, None))
}

fn run_hypertrace(
    m_blocks: &[usize],
    weights: &Option<Vec<f64>>,
    conjugate: bool,
    seed: u64,
) -> Result<Pieces> {
    let d: usize = m_blocks.iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = BlockAlgebra::block_diagonal(m_blocks);
    let (m, projections) = if conjugate {
        let u = random::unitary(&mut rng, d);
        let m = base.conjugated(&u);
        let projections: Vec<ComplexMatrix> = {
            let mut out = Vec::new();
            let mut at = 0;
            for &size in m_blocks {
                let mut p = ComplexMatrix::zeros(d, d);
                for i in 0..size {
                    p[(at + i, at + i)] = Complex64::new(1.0, 0.0);
                }
                out.push(u.matmul(&p).matmul(&u.adjoint()));
                at += size;
            }
            out
        };
        (m, projections)
    } else {
        let projections = base.central_projections()?;
        (base, projections)
    };
    let n = BlockAlgebra::full(d);
    let phi = WeightedTrace::standard(d);
    let w = match weights {
        Some(w) => w.clone(),
        None => random::state_weights(&mut rng, projections.len()),
    };
    let constraint = HypertraceConstraint::ExtendState {
        projections,
        weights: w.clone(),
    };
    let outcome = hypertrace_find(&m, &n, &phi, &constraint, 20000)?;
    let assertions = vec![
        Assertion::flag("converged", outcome.converged),
        Assertion::le(
            "commutator_residual",
            outcome.commutator_residual,
            1e-8,
            0.0,
        ),
        Assertion::le("trace_error", outcome.trace_error, 1e-10, 0.0),
        Assertion::le("psd_defect", -outcome.min_eigenvalue, 1e-10, 0.0),
        Assertion::le("extension_error", outcome.extension_error, 1e-8, 0.0),
        Assertion::le(
            "tracial_restriction",
            outcome.tracial_restriction_defect,
            1e-8,
            0.0,
        ),
    ];
    let results = serde_json::to_value(&outcome).expect("serializable");
    Ok((results, assertions, None))
}

fn run_lemma14(n: usize, d: usize, compression: bool, seed: u64) -> Result<Pieces> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi = WeightedTrace::standard(d);
    let (m, p) = if compression {
        let m = BlockAlgebra::block_diagonal(&vec![1; d]);
        (m, ComplexMatrix::unit(d, 0, 0))
    } else {
        (BlockAlgebra::full(d), ComplexMatrix::identity(d))
    };
    let unitaries: Vec<ComplexMatrix> = (0..n)
        .map(|_| unitary_in_algebra(&mut rng, &m))
        .collect::<Result<_>>()?;
    let report = unitary_compression_check(&m, &unitaries, &p, &phi)?;
    let assertions = vec![
        Assertion::close("s2_equals_n", report.s2, n as f64, 1e-8),
        Assertion::le(
            "amplification_constant",
            report.amplification_spread,
            1e-8,
            0.0,
        ),
    ];
    let results = serde_json::to_value(&report).expect("serializable");
    Ok((results, assertions, None))
}

fn run_corollary13(n: usize, d: usize, seed: u64) -> Result<Pieces> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = BlockAlgebra::block_diagonal(&vec![1; d]);
    let phi = WeightedTrace::standard(d);
    let e = ConditionalExpectation::new(&m, &phi)?;
    let p = LinearSuperoperator::from_cond_expectation(&e);
    let tau = ComplexMatrix::identity(d).scale(1.0 / d as f64);
    let tuple = MatrixTuple::new((0..n).map(|_| random::matrix(&mut rng, d)).collect())?;
    let report = projected_trace_bound(&p, &tuple, &tau, 1.0, &phi)?;
    let assertions = vec![
        Assertion::le("projected_bound", report.lhs_row, report.rhs, 1e-8),
        Assertion::le(
            "traciality_equality",
            report.traciality_defect,
            1e-10 * report.lhs_row.max(1.0),
            0.0,
        ),
    ];
    let results = serde_json::to_value(&report).expect("serializable");
    Ok((results, assertions, None))
}

fn run_tomiyama(m_blocks: &[usize], conjugate: bool, seed: u64) -> Result<Pieces> {
    let d: usize = m_blocks.iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = BlockAlgebra::block_diagonal(m_blocks);
    // a weighted trace is expectation-compatible only with the canonical
    // block alignment; conjugated subalgebras pair with the plain trace
    let phi = if conjugate {
        let u = random::unitary(&mut rng, d);
        m = m.conjugated(&u);
        WeightedTrace::standard(d)
    } else {
        let weights = random::positive_weights(&mut rng, m_blocks.len(), 0.5, 2.0);
        WeightedTrace::new(m_blocks.to_vec(), weights)?
    };
    let e = ConditionalExpectation::new(&m, &phi)?;
    let p = LinearSuperoperator::from_cond_expectation(&e);
    let report = tomiyama_check(&p, &m)?;
    let assertions = vec![
        Assertion::le("bimodule", report.bimodule_residual, 1e-10, 0.0),
        Assertion::le("choi_psd", -report.choi_min_eigenvalue, 1e-8, 0.0),
        Assertion::le("unital", report.unital_residual, 1e-10, 0.0),
    ];
    let results = serde_json::to_value(&report).expect("serializable");
    Ok((results, assertions, None))
}

fn run_constant(
    map: &str,
    n: usize,
    d: &Option<usize>,
    m_blocks: &Option<Vec<usize>>,
    trials: usize,
    ascent: usize,
    seed: u64,
) -> Result<Pieces> {
    let (p, dim, expectation) = match map {
        "transpose" => {
            let dim = d.unwrap_or(2);
            (LinearSuperoperator::transpose_map(dim), dim, false)
        }
        "expectation" => {
            let blocks = m_blocks.clone().unwrap_or_else(|| vec![1, 1]);
            let dim: usize = blocks.iter().sum();
            let m = BlockAlgebra::block_diagonal(&blocks);
            let phi = WeightedTrace::standard(dim);
            let e = ConditionalExpectation::new(&m, &phi)?;
            (LinearSuperoperator::from_cond_expectation(&e), dim, true)
        }
        other => {
            return Err(Error::NotSubalgebra {
                reason: format!("unknown map {other:?}; expected \"expectation\" or \"transpose\""),
            })
        }
    };
    let report = row_col_constant(&p, n, trials, ascent, seed)?;
    let mut assertions = Vec::new();
    if expectation {
        assertions.push(Assertion::le(
            "expectation_is_contractive",
            report.c_lower,
            1.0,
            1e-6,
        ));
    } else {
        assertions.push(Assertion::le(
            "transpose_constant_at_least_sqrt2",
            2.0_f64.sqrt() - 1e-3,
            report.c_lower,
            0.0,
        ));
    }
    let results = json!({
        "c_lower": report.c_lower,
        "witness": report.witness,
        "trials": report.trials,
        "ascent_steps": report.ascent_steps,
        "dim": dim,
    });
    Ok((results, assertions, None))
}

/// Built-in demo specs mirroring the closed-form instances.
pub fn demo_spec(name: &str) -> Option<&'static str> {
    let e11 = r#"{"rows":2,"cols":2,"re":[1.0,0.0,0.0,0.0],"im":[0.0,0.0,0.0,0.0]}"#;
    let e12 = r#"{"rows":2,"cols":2,"re":[0.0,1.0,0.0,0.0],"im":[0.0,0.0,0.0,0.0]}"#;
    match name {
        "sandwich" => Some(Box::leak(
            format!(
                r#"{{"experiment":"sandwich","tuple":[{e11},{e12}],"theta":0.5,"gap_tol":0.001,"seed":1}}"#
            )
            .into_boxed_str(),
        )),
        "multiplier" => Some(Box::leak(
            format!(r#"{{"experiment":"multiplier","tuple":[{e11},{e12}],"seed":1}}"#)
                .into_boxed_str(),
        )),
        "norms" => Some(Box::leak(
            format!(r#"{{"experiment":"norms","tuple":[{e11},{e12}],"seed":1}}"#).into_boxed_str(),
        )),
        "decompose" => Some(Box::leak(
            format!(r#"{{"experiment":"decompose","tuple":[{e11},{e12}],"seed":1}}"#)
                .into_boxed_str(),
        )),
        "szego" => Some(r#"{"experiment":"szego","scalar_cosine":[2.5,1.0],"seed":1}"#),
        "hypertrace" => Some(r#"{"experiment":"hypertrace","m_blocks":[1,1],"weights":[0.3,0.7],"conjugate":false,"seed":1}"#),
        "lemma14" => Some(r#"{"experiment":"lemma14","n":2,"d":2,"seed":1}"#),
        "corollary13" => Some(r#"{"experiment":"corollary13","n":2,"d":2,"seed":1}"#),
        "tomiyama" => Some(r#"{"experiment":"tomiyama","m_blocks":[2,1],"seed":1}"#),
        "constant" => Some(r#"{"experiment":"constant","map":"transpose","n":2,"d":2,"seed":1}"#),
        _ => None,
    }
}

pub const DEMO_NAMES: [&str; 10] = [
    "norms",
    "multiplier",
    "sandwich",
    "decompose",
    "szego",
    "hypertrace",
    "lemma14",
    "corollary13",
    "tomiyama",
    "constant",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_demo_specs_parse_and_pass() {
        for name in DEMO_NAMES {
            let raw = demo_spec(name).unwrap();
            let spec = parse_spec(raw.as_bytes()).unwrap();
            let outcome = run(&spec, None, raw.as_bytes()).unwrap();
            assert!(
                outcome.report.all_pass(),
                "demo {name} failed: {:?}",
                outcome
                    .report
                    .assertions
                    .iter()
                    .filter(|a| !a.pass)
                    .collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn unknown_experiment_is_a_parse_error() {
        let err = parse_spec(br#"{"experiment":"frobnicate"}"#).unwrap_err();
        assert!(
            err.contains("frobnicate") || err.contains("unknown variant"),
            "{err}"
        );
    }

    #[test]
    fn schema_violations_name_the_offending_key() {
        let err = parse_spec(br#"{"experiment":"lemma14","n":2,"d":2,"bogus":1}"#).unwrap_err();
        assert!(
            err.contains("bogus") || err.contains("unknown field"),
            "{err}"
        );
        let err =
            parse_spec(br#"{"experiment":"sandwich","tuple":[],"theta":"half"}"#).unwrap_err();
        assert!(err.contains("theta"), "{err}");
    }
}
