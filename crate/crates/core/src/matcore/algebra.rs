//! Finite-dimensional *-algebras presented by explicit spanning sets.
//!
//! An algebra is stored as an ambient dimension, a block profile, and a
//! basis whose span is expected to be closed under products and
//! adjoints. Closure is verified numerically by [`BlockAlgebra::check`]
//! rather than assumed, which keeps membership and projection questions
//! answerable by least squares.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::eig::herm_eig;
use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct BlockAlgebra {
    d: usize,
    blocks: Vec<usize>,
    basis: Vec<ComplexMatrix>,
    #[serde(skip)]
    orthobasis: Vec<ComplexMatrix>,
}

impl<'de> Deserialize<'de> for BlockAlgebra {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            d: usize,
            blocks: Vec<usize>,
            #[serde(default)]
            basis: Option<Vec<ComplexMatrix>>,
        }
        let raw = Raw::deserialize(de)?;
        match raw.basis {
            // omitted basis means the canonical block-diagonal algebra
            None => {
                let total: usize = raw.blocks.iter().sum();
                if total != raw.d {
                    return Err(serde::de::Error::custom(format!(
                        "blocks sum to {total}, ambient dimension is {}",
                        raw.d
                    )));
                }
                Ok(BlockAlgebra::block_diagonal(&raw.blocks))
            }
            Some(basis) => {
                BlockAlgebra::with_basis(raw.d, raw.blocks, basis).map_err(serde::de::Error::custom)
            }
        }
    }
}

/// Closure report produced by [`BlockAlgebra::check`].
#[derive(Clone, Debug, Serialize)]
pub struct AlgebraReport {
    pub identity_residual: f64,
    pub adjoint_residual: f64,
    pub product_residual: f64,
    pub pass: bool,
}

const CLOSURE_TOL: f64 = 1e-12;

impl BlockAlgebra {
    /// The full matrix algebra M_d with its matrix-unit basis.
    pub fn full(d: usize) -> Self {
        let mut basis = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                basis.push(ComplexMatrix::unit(d, i, j));
            }
        }
        Self::assemble(d, vec![d], basis)
    }

    /// Canonical block-diagonal algebra `⊕_k M_{size_k}` inside M_d.
    pub fn block_diagonal(sizes: &[usize]) -> Self {
        let d: usize = sizes.iter().sum();
        assert!(d > 0, "blocks must be nonempty");
        let mut basis = Vec::new();
        let mut offset = 0;
        for &s in sizes {
            for i in 0..s {
                for j in 0..s {
                    basis.push(ComplexMatrix::unit(d, offset + i, offset + j));
                }
            }
            offset += s;
        }
        Self::assemble(d, sizes.to_vec(), basis)
    }

    /// Block-diagonal algebra where block `k` acts with multiplicity
    /// `mult_k`, i.e. `⊕_k M_{size_k} ⊗ I_{mult_k}`.
    pub fn block_diagonal_with_multiplicity(sizes_mults: &[(usize, usize)]) -> Self {
        let d: usize = sizes_mults.iter().map(|&(s, m)| s * m).sum();
        let mut basis = Vec::new();
        let mut offset = 0;
        for &(s, mult) in sizes_mults {
            for i in 0..s {
                for j in 0..s {
                    let mut m = ComplexMatrix::zeros(d, d);
                    for copy in 0..mult {
                        m[(offset + copy * s + i, offset + copy * s + j)] =
                            Complex64::new(1.0, 0.0);
                    }
                    basis.push(m);
                }
            }
            offset += s * mult;
        }
        Self::assemble(d, sizes_mults.iter().map(|&(s, _)| s).collect(), basis)
    }

    /// An algebra from an explicit basis. Closure is not verified here;
    /// call [`BlockAlgebra::check`] for the certified report.
    pub fn with_basis(d: usize, blocks: Vec<usize>, basis: Vec<ComplexMatrix>) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::EmptyTuple);
        }
        for b in &basis {
            if b.rows() != d || b.cols() != d {
                return Err(Error::DimensionMismatch {
                    left: format!("{}x{}", b.rows(), b.cols()),
                    right: format!("{d}x{d}"),
                    context: "BlockAlgebra basis",
                });
            }
        }
        let total: usize = blocks.iter().sum();
        if !blocks.is_empty() && total != d {
            return Err(Error::BlockSizeMismatch { total, dim: d });
        }
        Ok(Self::assemble(d, blocks, basis))
    }

    fn assemble(d: usize, blocks: Vec<usize>, basis: Vec<ComplexMatrix>) -> Self {
        let orthobasis = hs_orthonormalize(&basis);
        BlockAlgebra {
            d,
            blocks,
            basis,
            orthobasis,
        }
    }

    /// Conjugated copy `u (.) u*` of this algebra.
    pub fn conjugated(&self, u: &ComplexMatrix) -> Self {
        let ustar = u.adjoint();
        let basis = self
            .basis
            .iter()
            .map(|m| u.matmul(m).matmul(&ustar))
            .collect();
        Self::assemble(self.d, self.blocks.clone(), basis)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    /// Hilbert-Schmidt orthonormal basis of the span.
    pub fn orthobasis(&self) -> &[ComplexMatrix] {
        &self.orthobasis
    }

    pub fn span_dim(&self) -> usize {
        self.orthobasis.len()
    }

    /// Orthogonal projection of `x` onto the span, with residual.
    pub fn span_project(&self, x: &ComplexMatrix) -> (ComplexMatrix, f64) {
        let mut proj = ComplexMatrix::zeros(self.d, self.d);
        for b in &self.orthobasis {
            proj = &proj + &b.scale_c(b.hs_inner(x));
        }
        let residual = (x - &proj).fro_norm();
        (proj, residual)
    }

    pub fn contains(&self, x: &ComplexMatrix, tol: f64) -> bool {
        self.span_project(x).1 <= tol * x.fro_norm().max(1.0)
    }

    /// Residual-to-span distance for each basis element of `other`;
    /// zero means `other ⊆ self` as linear spans.
    pub fn span_contains_algebra(&self, other: &BlockAlgebra) -> f64 {
        other
            .basis
            .iter()
            .map(|b| self.span_project(b).1 / b.fro_norm().max(1e-300))
            .fold(0.0, f64::max)
    }

    /// Verifies the defining invariants: identity in span, span closed
    /// under adjoints and products. Residuals are relative to the
    /// element norms; the report passes iff all are at most 1e-12.
    pub fn check(&self) -> Result<AlgebraReport> {
        if self.basis.is_empty() {
            return Err(Error::EmptyTuple);
        }
        let identity = ComplexMatrix::identity(self.d);
        let (_, identity_residual) = self.span_project(&identity);
        let identity_residual = identity_residual / (self.d as f64).sqrt();
        if identity_residual > 1e-8 {
            return Err(Error::IdentityNotInSpan {
                residual: identity_residual,
            });
        }

        let mut adjoint_residual = 0.0_f64;
        for b in &self.basis {
            let adj = b.adjoint();
            let (_, r) = self.span_project(&adj);
            adjoint_residual = adjoint_residual.max(r / adj.fro_norm().max(1.0));
        }
        let mut product_residual = 0.0_f64;
        for a in &self.basis {
            for b in &self.basis {
                let p = a.matmul(b);
                let (_, r) = self.span_project(&p);
                product_residual = product_residual.max(r / p.fro_norm().max(1.0));
            }
        }
        let pass = identity_residual <= CLOSURE_TOL
            && adjoint_residual <= CLOSURE_TOL
            && product_residual <= CLOSURE_TOL;
        Ok(AlgebraReport {
            identity_residual,
            adjoint_residual,
            product_residual,
            pass,
        })
    }

    /// Orthonormal basis of the center {m in span : [m, b] = 0 for all b}.
    pub fn center(&self) -> Result<Vec<ComplexMatrix>> {
        let k = self.orthobasis.len();
        let rows = self.basis.len() * self.d * self.d;
        // K c = stacked commutators of sum_i c_i ob_i with every basis element.
        let mut kmat = ComplexMatrix::zeros(rows, k);
        for (i, ob) in self.orthobasis.iter().enumerate() {
            let mut row = 0;
            for b in &self.basis {
                let comm = &ob.matmul(b) - &b.matmul(ob);
                for v in comm.vec() {
                    kmat[(row, i)] = v;
                    row += 1;
                }
            }
        }
        let normal = kmat.adjoint().matmul(&kmat);
        let (values, u) = herm_eig(&normal)?;
        let lmax = values.first().copied().unwrap_or(0.0).max(1.0);
        let mut center = Vec::new();
        for j in 0..k {
            if values[j] <= 1e-16 * lmax {
                let mut m = ComplexMatrix::zeros(self.d, self.d);
                for i in 0..k {
                    m = &m + &self.orthobasis[i].scale_c(u[(i, j)]);
                }
                center.push(m);
            }
        }
        Ok(center)
    }

    /// Minimal projections of the center, via the spectral clusters of a
    /// generic Hermitian central element.
    pub fn central_projections(&self) -> Result<Vec<ComplexMatrix>> {
        let center = self.center()?;
        let mut herms: Vec<ComplexMatrix> = Vec::new();
        for z in &center {
            herms.push(z.hermitize());
            herms.push(z.scale_c(Complex64::new(0.0, -0.5)).hermitize());
        }
        // Deterministic irrational coefficients separate the minimal
        // projections for generic algebras.
        let golden = 0.618_033_988_749_894_9_f64;
        let mut h = ComplexMatrix::zeros(self.d, self.d);
        for (j, m) in herms.iter().enumerate() {
            let t = ((j as f64 + 1.0) * golden).fract() + 0.5;
            h = &h + &m.scale(t);
        }
        let (values, u) = herm_eig(&h)?;
        let spread = (values.first().copied().unwrap_or(0.0)
            - values.last().copied().unwrap_or(0.0))
        .max(1.0);
        let gap = 1e-7 * spread;

        let mut projections = Vec::new();
        let mut start = 0;
        for i in 1..=values.len() {
            if i == values.len() || (values[i - 1] - values[i]).abs() > gap {
                let mut p = ComplexMatrix::zeros(self.d, self.d);
                for col in start..i {
                    for r in 0..self.d {
                        for s in 0..self.d {
                            p[(r, s)] += u[(r, col)] * u[(s, col)].conj();
                        }
                    }
                }
                projections.push(p);
                start = i;
            }
        }
        // Discard clusters that are not actually central projections
        // (possible only if the generic element failed to separate).
        projections.retain(|p| {
            let (proj, res) = self.span_project(p);
            let idem = (&proj.matmul(&proj) - &proj).fro_norm();
            res <= 1e-8 * p.fro_norm().max(1.0) && idem <= 1e-8
        });
        Ok(projections)
    }
}

fn hs_orthonormalize(basis: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
    let mut out: Vec<ComplexMatrix> = Vec::new();
    for b in basis {
        let mut v = b.clone();
        for _ in 0..2 {
            for o in &out {
                let overlap = o.hs_inner(&v);
                v = &v - &o.scale_c(overlap);
            }
        }
        let norm = v.fro_norm();
        if norm > 1e-10 * b.fro_norm().max(1.0) {
            out.push(v.scale(1.0 / norm));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_algebra_in_m2_passes() {
        let alg = BlockAlgebra::block_diagonal(&[1, 1]);
        let report = alg.check().unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn non_star_closed_span_fails() {
        // span{e11, e12} also misses the identity, so it is rejected outright
        let basis = vec![ComplexMatrix::unit(2, 0, 0), ComplexMatrix::unit(2, 0, 1)];
        let alg = BlockAlgebra::with_basis(2, vec![], basis).unwrap();
        assert!(matches!(alg.check(), Err(Error::IdentityNotInSpan { .. })));

        // span{I, e12} contains the identity but e12* = e21 is outside
        let basis = vec![ComplexMatrix::identity(2), ComplexMatrix::unit(2, 0, 1)];
        let alg = BlockAlgebra::with_basis(2, vec![], basis).unwrap();
        let report = alg.check().unwrap();
        assert!(!report.pass && report.adjoint_residual > 0.5, "{report:?}");
    }

    #[test]
    fn m2_plus_m1_block_algebra_passes() {
        let alg = BlockAlgebra::block_diagonal(&[2, 1]);
        let report = alg.check().unwrap();
        assert!(report.pass);
        assert_eq!(alg.span_dim(), 5);
    }

    #[test]
    fn identity_not_in_span_is_an_error() {
        let basis = vec![ComplexMatrix::unit(2, 0, 0)];
        let alg = BlockAlgebra::with_basis(2, vec![], basis).unwrap();
        assert!(matches!(alg.check(), Err(Error::IdentityNotInSpan { .. })));
    }

    #[test]
    fn center_of_block_algebra_is_spanned_by_block_identities() {
        let alg = BlockAlgebra::block_diagonal(&[2, 1]);
        let center = alg.center().unwrap();
        assert_eq!(center.len(), 2);
        let projections = alg.central_projections().unwrap();
        assert_eq!(projections.len(), 2);
        let total = projections
            .iter()
            .fold(ComplexMatrix::zeros(3, 3), |acc, p| &acc + p);
        assert!((&total - &ComplexMatrix::identity(3)).max_abs() < 1e-9);
    }

    #[test]
    fn center_of_full_algebra_is_scalars() {
        let alg = BlockAlgebra::full(3);
        let center = alg.center().unwrap();
        assert_eq!(center.len(), 1);
        let projections = alg.central_projections().unwrap();
        assert_eq!(projections.len(), 1);
        assert!((&projections[0] - &ComplexMatrix::identity(3)).max_abs() < 1e-9);
    }

    #[test]
    fn conjugated_algebra_still_closes() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let u = crate::random::unitary(&mut rng, 4);
        let alg = BlockAlgebra::block_diagonal(&[2, 2]).conjugated(&u);
        let report = alg.check().unwrap();
        assert!(report.pass, "{report:?}");
    }
}
