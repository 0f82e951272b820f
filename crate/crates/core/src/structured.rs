//! Complex matrices carrying a real or quaternionic structure.
//!
//! An anti-unitary `γ = G ∘ conj` is stored by its linear part `G`. The conjugate of an
//! operator is `L̄ = γ L γ⁻¹ = G conj(L) G⁻¹`, and the CAR transpose is `Lᵀ = (L̄)*`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Kind {
    Real,
    Quaternionic,
}

impl Kind {
    pub fn sign(self) -> f64 {
        match self {
            Kind::Real => 1.0,
            Kind::Quaternionic => -1.0,
        }
    }

    pub fn times(self, other: Kind) -> Kind {
        if self == other {
            Kind::Real
        } else {
            Kind::Quaternionic
        }
    }
}

#[derive(Debug, Clone)]
pub struct RealStructure {
    g: CMat,
    kind: Kind,
}

impl RealStructure {
    /// Validates unitarity and `G conj(G) = ±1` to 1e-12 and infers the kind.
    pub fn new(g: CMat) -> Result<Self> {
        let n = g.nrows();
        if g.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: g.ncols() });
        }
        let id = linalg::eye(n);
        let unit = linalg::dist(&(g.adjoint() * &g), &id);
        if unit > 1e-12 {
            return Err(Error::InvalidStructure(format!("G not unitary (residual {unit:.2e})")));
        }
        let sq = &g * g.conjugate();
        let kind = if linalg::dist(&sq, &id) < 1e-12 {
            Kind::Real
        } else if linalg::op_norm(&(&sq + &id)) < 1e-12 {
            Kind::Quaternionic
        } else {
            return Err(Error::InvalidStructure("G conj(G) is not ±1".into()));
        };
        Ok(Self { g, kind })
    }

    /// Entrywise complex conjugation on C^n.
    pub fn trivial(n: usize) -> Self {
        Self { g: linalg::eye(n), kind: Kind::Real }
    }

    /// Block swap V ⊕ V* → V* ⊕ V composed with conjugation.
    pub fn nambu(n_v: usize) -> Self {
        let g = linalg::kron(&linalg::pauli(1), &linalg::eye(n_v));
        Self { g, kind: Kind::Real }
    }

    /// The quaternionic structure 𝔠 = [[0, 1], [−1, 0]] ∘ conj on C², tensored with `m` copies.
    pub fn quaternion(m: usize) -> Self {
        let c = linalg::from_real(2, 2, |i, j| match (i, j) {
            (0, 1) => 1.0,
            (1, 0) => -1.0,
            _ => 0.0,
        });
        Self { g: linalg::kron(&c, &linalg::eye(m)), kind: Kind::Quaternionic }
    }

    pub fn g(&self) -> &CMat {
        &self.g
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn tensor(&self, other: &RealStructure) -> RealStructure {
        RealStructure { g: linalg::kron(&self.g, &other.g), kind: self.kind.times(other.kind) }
    }

    /// `1_copies ⊗ G`, the structure of ℓ²(sites) ⊗ W with on-site γ.
    pub fn lift(&self, copies: usize) -> RealStructure {
        RealStructure { g: linalg::kron(&linalg::eye(copies), &self.g), kind: self.kind }
    }

    /// Raw conjugation G conj(M) G⁻¹ on plain matrices.
    pub fn conj_mat(&self, m: &CMat) -> CMat {
        &self.g * m.conjugate() * self.g.adjoint()
    }

    /// Applies the anti-unitary to column vectors.
    pub fn apply(&self, v: &CMat) -> CMat {
        &self.g * v.conjugate()
    }
}

#[derive(Debug, Clone)]
pub struct StructuredMatrix {
    pub m: CMat,
    pub ctx: Arc<RealStructure>,
}

impl StructuredMatrix {
    pub fn new(m: CMat, ctx: Arc<RealStructure>) -> Result<Self> {
        let n = ctx.dim();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: m.nrows() });
        }
        Ok(Self { m, ctx })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn with(&self, m: CMat) -> Self {
        Self { m, ctx: self.ctx.clone() }
    }

    pub fn identity(ctx: Arc<RealStructure>) -> Self {
        let n = ctx.dim();
        Self { m: linalg::eye(n), ctx }
    }

    pub fn adjoint(&self) -> Self {
        self.with(linalg::adjoint(&self.m))
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.with(&self.m * &other.m)
    }
}

fn check_dims(l: &StructuredMatrix) -> Result<()> {
    let n = l.ctx.dim();
    if l.m.nrows() != n || l.m.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: l.m.nrows() });
    }
    Ok(())
}

pub fn conjugate(l: &StructuredMatrix) -> Result<StructuredMatrix> {
    check_dims(l)?;
    Ok(l.with(l.ctx.conj_mat(&l.m)))
}

pub fn car_transpose(l: &StructuredMatrix) -> Result<StructuredMatrix> {
    check_dims(l)?;
    Ok(l.with(l.ctx.conj_mat(&linalg::adjoint(&l.m))))
}

pub fn hermitian_residual(m: &CMat) -> f64 {
    linalg::op_norm(&(m - m.adjoint()))
}

/// Smallest |eigenvalue| of a Hermitian matrix.
pub fn min_abs_eig(h: &CMat) -> f64 {
    let vals = linalg::eigvalsh(&linalg::hermitian_part(h));
    vals.iter().fold(f64::INFINITY, |a, &x| a.min(x.abs()))
}

/// sign(H) for a plain Hermitian matrix.
pub fn sign_matrix(h: &CMat, gap_tol: f64) -> Result<CMat> {
    let res = hermitian_residual(h);
    if res > DEFAULT_TOL {
        return Err(Error::NotHermitian { residual: res });
    }
    let (vals, u) = linalg::eigh(&linalg::hermitian_part(h));
    let gap = vals.iter().fold(f64::INFINITY, |a, &x| a.min(x.abs()));
    if gap < gap_tol {
        return Err(Error::GapClosed { gap, tol: gap_tol });
    }
    let s: Vec<f64> = vals.iter().map(|&x| x.signum()).collect();
    Ok(&u * linalg::diag_real(&s) * u.adjoint())
}

pub fn operator_sign(h: &StructuredMatrix, gap_tol: f64) -> Result<StructuredMatrix> {
    check_dims(h)?;
    Ok(h.with(sign_matrix(&h.m, gap_tol)?))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PredicateReport {
    pub is_real: bool,
    pub is_imaginary: bool,
    pub is_hermitian: bool,
    pub is_skew: bool,
    pub is_unitary: bool,
    pub real_residual: f64,
    pub imaginary_residual: f64,
    pub hermitian_residual: f64,
    pub skew_residual: f64,
    pub unitary_residual: f64,
}

pub fn check_predicates(l: &StructuredMatrix) -> PredicateReport {
    check_predicates_tol(l, DEFAULT_TOL)
}

pub fn check_predicates_tol(l: &StructuredMatrix, tol: f64) -> PredicateReport {
    let bar = l.ctx.conj_mat(&l.m);
    let adj = linalg::adjoint(&l.m);
    let n = l.dim();
    let real_residual = linalg::op_norm(&(&bar - &l.m));
    let imaginary_residual = linalg::op_norm(&(&bar + &l.m));
    let hermitian_residual = linalg::op_norm(&(&l.m - &adj));
    let skew_residual = linalg::op_norm(&(&l.m + &adj));
    let unitary_residual = linalg::op_norm(&(&adj * &l.m - linalg::eye(n)));
    PredicateReport {
        is_real: real_residual < tol,
        is_imaginary: imaginary_residual < tol,
        is_hermitian: hermitian_residual < tol,
        is_skew: skew_residual < tol,
        is_unitary: unitary_residual < tol,
        real_residual,
        imaginary_residual,
        hermitian_residual,
        skew_residual,
        unitary_residual,
    }
}

/// W = V ⊕ V* with its block-swap real structure and charge operator.
#[derive(Debug, Clone)]
pub struct NambuContext {
    pub n_v: usize,
    pub gamma: Arc<RealStructure>,
    pub q: CMat,
}

impl NambuContext {
    pub fn new(n_v: usize) -> Self {
        let q = linalg::kron(&linalg::pauli(3), &linalg::eye(n_v));
        Self { n_v, gamma: Arc::new(RealStructure::nambu(n_v)), q }
    }

    pub fn dim_w(&self) -> usize {
        2 * self.n_v
    }

    /// Extends a linear operator A on V to diag(A, conj A) on W.
    pub fn extend_linear(&self, a: &CMat) -> CMat {
        linalg::block_diag(&[a, &linalg::conj(a)])
    }

    /// BdG Hamiltonian [[h, Δ], [−conj Δ, −conj h]].
    pub fn bdg(&self, h: &CMat, delta: &CMat) -> CMat {
        let n = self.n_v;
        let mut out = linalg::zeros(2 * n, 2 * n);
        linalg::set_block(&mut out, 0, 0, h);
        linalg::set_block(&mut out, 0, n, delta);
        linalg::set_block(&mut out, n, 0, &linalg::scale_re(&linalg::conj(delta), -1.0));
        linalg::set_block(&mut out, n, n, &linalg::scale_re(&linalg::conj(h), -1.0));
        out
    }

    pub fn structured(&self, m: CMat) -> Result<StructuredMatrix> {
        StructuredMatrix::new(m, self.gamma.clone())
    }
}
