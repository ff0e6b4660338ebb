use thiserror::Error;

/// Errors surfaced by the operator-algebra kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {left} vs {right} in {context}")]
    DimensionMismatch {
        left: String,
        right: String,
        context: &'static str,
    },

    #[error("matrix is not Hermitian: max deviation {deviation:.3e} exceeds {tol:.3e}")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eig:.3e}")]
    NotPositiveSemidefinite { min_eig: f64 },

    #[error("singular matrix encountered in {context}")]
    Singular { context: &'static str },

    #[error("zero regularization with singular base and non-positive real exponent")]
    SingularPower,

    #[error("non-finite entry encountered in {context}")]
    NonFinite { context: &'static str },

    #[error("p-norm index must satisfy p >= 1, got {p}")]
    InvalidPNorm { p: f64 },

    #[error("matrix tuple is empty")]
    EmptyTuple,

    #[error("tuple length mismatch: {left} vs {right}")]
    TupleLengthMismatch { left: usize, right: usize },

    #[error("identity is not in the span of the basis (residual {residual:.3e})")]
    IdentityNotInSpan { residual: f64 },

    #[error("basis is not closed under {operation} (residual {residual:.3e})")]
    NotClosed {
        operation: &'static str,
        residual: f64,
    },

    #[error("not a verified subalgebra: {reason}")]
    NotSubalgebra { reason: String },

    #[error("matrix is not unitary within tolerance (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("projection is not central: commutator residual {residual:.3e}")]
    NotCentral { residual: f64 },

    #[error("multiplier map is not in completely positive form (y_i != x_i*)")]
    NotCompletelyPositive,

    #[error("weights must be strictly positive, got {value}")]
    NonPositiveWeight { value: f64 },

    #[error("functional is not normalized: total mass {total}")]
    NotNormalized { total: f64 },

    #[error("block sizes {total} do not sum to ambient dimension {dim}")]
    BlockSizeMismatch { total: usize, dim: usize },

    #[error("positivity certificate failed: certified minimum {certified_min:.3e}")]
    PositivityCertificateFailed { certified_min: f64 },

    #[error("Laurent polynomial violates Hermitian symmetry (residual {residual:.3e})")]
    NotHermitianSymbol { residual: f64 },

    #[error("determinant polynomial is identically zero")]
    DegenerateDeterminant,

    #[error("matricization dimension {dim} exceeds cap {cap}")]
    MatricizationTooLarge { dim: usize, cap: usize },

    #[error("dual certificate bound is zero; cannot form a lower bound")]
    ZeroDualBound,

    #[error("{context}: did not converge after {iterations} iterations (residual {residual:.3e})")]
    NotConverged {
        context: &'static str,
        iterations: usize,
        residual: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
