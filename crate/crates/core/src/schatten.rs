//! Weighted Schatten p-norms, row/column tuple norms, and the bilinear
//! trace pairing between tuples.
//!
//! The row norm of a tuple is |sum x_i x_i*|^(1/2) in operator norm and
//! the column norm is |sum x_i* x_i|^(1/2); these are the two endpoint
//! norms of the interpolation couple the rest of the workspace studies.
//! The pairing is bilinear, <xi, x> = sum phi(xi_i x_i), with no adjoint
//! on either argument.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::eig::herm_eig;
use crate::matcore::matrix::ComplexMatrix;
use crate::matcore::trace::WeightedTrace;
use crate::matcore::BlockAlgebra;

/// Relative clamp applied to singular values before p-th powers; avoids
/// NaN on numerically rank-deficient input when p < 2.
const SV_CLAMP: f64 = 1e-14;

/// A Schatten exponent: finite p >= 1 or the operator-norm endpoint.
/// Infinity is a distinct variant rather than a large float because the
/// operator norm has its own code path and no weight dependence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PNormIndex {
    Finite(f64),
    Infinity,
}

impl PNormIndex {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            return Ok(PNormIndex::Infinity);
        }
        if !p.is_finite() || p < 1.0 {
            return Err(Error::InvalidPNorm { p });
        }
        Ok(PNormIndex::Finite(p))
    }

    /// Interpolation parameter theta = 1/p (zero at infinity).
    pub fn theta(&self) -> f64 {
        match self {
            PNormIndex::Finite(p) => 1.0 / p,
            PNormIndex::Infinity => 0.0,
        }
    }

    /// Inverse map: p = 1/theta with theta = 0 meaning infinity.
    pub fn from_theta(theta: f64) -> Result<Self> {
        if theta == 0.0 {
            Ok(PNormIndex::Infinity)
        } else if theta > 0.0 && theta <= 1.0 {
            PNormIndex::new(1.0 / theta)
        } else {
            Err(Error::InvalidPNorm { p: 1.0 / theta })
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            PNormIndex::Finite(p) => *p,
            PNormIndex::Infinity => f64::INFINITY,
        }
    }

    /// Hölder conjugate exponent.
    pub fn conjugate(&self) -> PNormIndex {
        match self {
            PNormIndex::Infinity => PNormIndex::Finite(1.0),
            PNormIndex::Finite(p) if *p == 1.0 => PNormIndex::Infinity,
            PNormIndex::Finite(p) => PNormIndex::Finite(p / (p - 1.0)),
        }
    }
}

impl Serialize for PNormIndex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PNormIndex::Finite(p) => s.serialize_f64(*p),
            PNormIndex::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for PNormIndex {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => PNormIndex::new(p).map_err(serde::de::Error::custom),
            Raw::Text(t) if t == "inf" || t == "Inf" || t == "infinity" => Ok(PNormIndex::Infinity),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "expected a number >= 1 or \"inf\", got {t:?}"
            ))),
        }
    }
}

/// An n-tuple of square matrices of a common dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixTuple {
    entries: Vec<ComplexMatrix>,
}

impl MatrixTuple {
    pub fn new(entries: Vec<ComplexMatrix>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyTuple);
        }
        let d = entries[0].require_square()?;
        for e in &entries {
            if e.require_square()? != d {
                return Err(Error::DimensionMismatch {
                    left: format!("{}x{}", e.rows(), e.cols()),
                    right: format!("{d}x{d}"),
                    context: "MatrixTuple",
                });
            }
            if !e.is_finite() {
                return Err(Error::NonFinite {
                    context: "MatrixTuple",
                });
            }
        }
        Ok(MatrixTuple { entries })
    }

    /// Constructor that additionally checks membership of every entry in
    /// the span of `algebra` to relative tolerance 1e-12.
    pub fn in_algebra(entries: Vec<ComplexMatrix>, algebra: &BlockAlgebra) -> Result<Self> {
        let tuple = Self::new(entries)?;
        for e in &tuple.entries {
            let (_, residual) = algebra.span_project(e);
            if residual > 1e-12 * e.fro_norm().max(1.0) {
                return Err(Error::NotSubalgebra {
                    reason: format!("tuple entry off span by {residual:.3e}"),
                });
            }
        }
        Ok(tuple)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.entries[0].rows()
    }

    pub fn entries(&self) -> &[ComplexMatrix] {
        &self.entries
    }

    pub fn entry(&self, i: usize) -> &ComplexMatrix {
        &self.entries[i]
    }

    pub fn map(&self, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> MatrixTuple {
        MatrixTuple {
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> MatrixTuple {
        self.map(|m| m.scale(s))
    }

    pub fn adjoints(&self) -> MatrixTuple {
        self.map(|m| m.adjoint())
    }

    pub fn add(&self, other: &MatrixTuple) -> Result<MatrixTuple> {
        self.check_compatible(other)?;
        Ok(MatrixTuple {
            entries: self
                .entries
                .iter()
                .zip(other.entries.iter())
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &MatrixTuple) -> Result<MatrixTuple> {
        self.check_compatible(other)?;
        Ok(MatrixTuple {
            entries: self
                .entries
                .iter()
                .zip(other.entries.iter())
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn check_compatible(&self, other: &MatrixTuple) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::TupleLengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: format!("dim {}", self.dim()),
                right: format!("dim {}", other.dim()),
                context: "MatrixTuple pair",
            });
        }
        Ok(())
    }

    /// sum x_i x_i*
    pub fn row_gram(&self) -> ComplexMatrix {
        let d = self.dim();
        self.entries
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, x| {
                &acc + &x.matmul(&x.adjoint())
            })
    }

    /// sum x_i* x_i
    pub fn col_gram(&self) -> ComplexMatrix {
        let d = self.dim();
        self.entries
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, x| {
                &acc + &x.adjoint().matmul(x)
            })
    }
}

/// Largest eigenvalue of a PSD matrix, clamped at zero.
fn psd_top(h: &ComplexMatrix) -> Result<f64> {
    let (values, _) = herm_eig(h)?;
    Ok(values.first().copied().unwrap_or(0.0).max(0.0))
}

/// Weighted singular data of x: descending singular values together with
/// the diagonal weights of phi in the eigenbasis of x* x.
fn weighted_singular_data(x: &ComplexMatrix, phi: &WeightedTrace) -> Result<(Vec<f64>, Vec<f64>)> {
    let gram = x.adjoint().matmul(x);
    let (values, v) = herm_eig(&gram)?;
    let smax = values.first().copied().unwrap_or(0.0).max(0.0).sqrt();
    let clamp = SV_CLAMP * smax;
    let sigmas: Vec<f64> = values
        .iter()
        .map(|&l| {
            let s = l.max(0.0).sqrt();
            if s <= clamp {
                0.0
            } else {
                s
            }
        })
        .collect();
    let density = phi.density();
    let weighted = v.adjoint().matmul(&density).matmul(&v);
    let weights: Vec<f64> = (0..sigmas.len()).map(|i| weighted[(i, i)].re).collect();
    Ok((sigmas, weights))
}

/// Weighted Schatten norm phi(|x|^p)^(1/p); operator norm at p = infinity.
pub fn schatten_norm(x: &ComplexMatrix, p: PNormIndex, phi: &WeightedTrace) -> Result<f64> {
    x.require_square()?;
    if x.rows() != phi.dim() {
        return Err(Error::DimensionMismatch {
            left: format!("matrix dim {}", x.rows()),
            right: format!("trace dim {}", phi.dim()),
            context: "schatten_norm",
        });
    }
    let (sigmas, weights) = weighted_singular_data(x, phi)?;
    match p {
        PNormIndex::Infinity => Ok(sigmas.first().copied().unwrap_or(0.0)),
        PNormIndex::Finite(p) => {
            let total: f64 = sigmas
                .iter()
                .zip(weights.iter())
                .map(|(&s, &w)| w.max(0.0) * s.powf(p))
                .sum();
            Ok(total.powf(1.0 / p))
        }
    }
}

/// Row norm |sum x_i x_i*|^(1/2). This is the tuple norm attached to
/// left-sided (row) structure.
pub fn row_norm(t: &MatrixTuple) -> Result<f64> {
    Ok(psd_top(&t.row_gram())?.sqrt())
}

/// Column norm |sum x_i* x_i|^(1/2).
pub fn col_norm(t: &MatrixTuple) -> Result<f64> {
    Ok(psd_top(&t.col_gram())?.sqrt())
}

/// Bilinear pairing <xi, x> = sum_i phi(xi_i x_i).
pub fn trace_pairing(xi: &MatrixTuple, x: &MatrixTuple, phi: &WeightedTrace) -> Result<Complex64> {
    xi.check_compatible(x)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, b) in xi.entries().iter().zip(x.entries().iter()) {
        acc += phi.apply(&a.matmul(b));
    }
    Ok(acc)
}

/// Which predual tuple norm to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DualSide {
    /// phi[(sum xi_i xi_i*)^(1/2)]: predual of the column norm.
    RowStar,
    /// phi[(sum xi_i* xi_i)^(1/2)]: predual of the row norm.
    ColStar,
}

/// Predual tuple norms: trace of the square root of the corresponding
/// Gram sum. The square root is unclamped: these values serve as
/// certified denominators and must not be shaved low.
pub fn dual_tuple_norm(xi: &MatrixTuple, side: DualSide, phi: &WeightedTrace) -> Result<f64> {
    let gram = match side {
        DualSide::RowStar => xi.row_gram(),
        DualSide::ColStar => xi.col_gram(),
    };
    let root = crate::matcore::eig::herm_func(&gram.hermitize(), |l| {
        Complex64::new(l.max(0.0).sqrt(), 0.0)
    })?;
    Ok(phi.apply(&root).re)
}

/// Flat record for reporting a single norm value.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormRecord {
    pub norm_name: String,
    pub p: PNormIndex,
    pub value: f64,
}
