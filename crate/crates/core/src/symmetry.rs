//! The ten symmetry classes: physical on-site symmetries on W, the derived
//! pseudo-symmetries, the commutation/anti-commutation dictionary and the
//! first-quantized (SRFL) cross-check.
//!
//! Layout of V is spin ⊗ sublattice ⊗ orbital, each factor present only when the class
//! needs it. Time reversal is `T = (iσy ⊗ 1) ∘ conj`, spin rotations `j_μ = iσ_μ ⊗ 1`,
//! and the sublattice operator `S = σz` on its factor.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::{verify_rep, CliffordRep};
use crate::error::{Error, Result};
use crate::linalg::{self, cx, dist, eye, kron, op_norm, pauli, scale, scale_re, CMat, I};
use crate::structured::{self, NambuContext, RealStructure, DEFAULT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub enum SymmetryClass {
    D,
    DIII,
    AII,
    CII,
    C,
    CI,
    AI,
    BDI,
    A,
    AIII,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Generator {
    T,
    Q,
    C,
    Spin,
}

pub const REAL_CLASSES: [SymmetryClass; 8] = [
    SymmetryClass::D,
    SymmetryClass::DIII,
    SymmetryClass::AII,
    SymmetryClass::CII,
    SymmetryClass::C,
    SymmetryClass::CI,
    SymmetryClass::AI,
    SymmetryClass::BDI,
];

pub const ALL_CLASSES: [SymmetryClass; 10] = [
    SymmetryClass::D,
    SymmetryClass::DIII,
    SymmetryClass::AII,
    SymmetryClass::CII,
    SymmetryClass::C,
    SymmetryClass::CI,
    SymmetryClass::AI,
    SymmetryClass::BDI,
    SymmetryClass::A,
    SymmetryClass::AIII,
];

impl SymmetryClass {
    pub fn label(self) -> &'static str {
        use SymmetryClass::*;
        match self {
            D => "D",
            DIII => "DIII",
            AII => "AII",
            CII => "CII",
            C => "C",
            CI => "CI",
            AI => "AI",
            BDI => "BDI",
            A => "A",
            AIII => "AIII",
        }
    }

    pub fn is_complex(self) -> bool {
        matches!(self, SymmetryClass::A | SymmetryClass::AIII)
    }

    /// Number of negative pseudo-symmetries: 0..7 for real classes, 0..1 for complex ones.
    pub fn s(self) -> usize {
        use SymmetryClass::*;
        match self {
            D | A => 0,
            DIII | AIII => 1,
            AII => 2,
            CII => 3,
            C => 4,
            CI => 5,
            AI => 6,
            BDI => 7,
        }
    }

    pub fn generators(self) -> Vec<Generator> {
        use Generator as G;
        use SymmetryClass::*;
        match self {
            D => vec![],
            DIII => vec![G::T],
            AII => vec![G::T, G::Q],
            CII => vec![G::T, G::Q, G::C],
            C => vec![G::Spin],
            CI => vec![G::Spin, G::T],
            AI => vec![G::Spin, G::T, G::Q],
            BDI => vec![G::Spin, G::T, G::Q, G::C],
            A => vec![G::Q],
            AIII => vec![G::Q, G::C],
        }
    }

    pub fn has(self, g: Generator) -> bool {
        self.generators().contains(&g)
    }

    fn needs_spin(self) -> bool {
        self.has(Generator::T) || self.has(Generator::Spin)
    }

    fn needs_sublattice(self) -> bool {
        self.has(Generator::C)
    }

    /// Dimension of V must be a multiple of this.
    pub fn block(self) -> usize {
        (if self.needs_spin() { 2 } else { 1 }) * (if self.needs_sublattice() { 2 } else { 1 })
    }
}

impl fmt::Display for SymmetryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SymmetryClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ALL_CLASSES
            .iter()
            .copied()
            .find(|c| c.label() == s)
            .ok_or_else(|| Error::InvalidClass(s.to_string()))
    }
}

/// On-site symmetries on W = V ⊕ V*. Anti-unitaries are stored by their linear part.
#[derive(Debug, Clone)]
pub struct PhysicalSymmetries {
    pub class: SymmetryClass,
    pub nambu: NambuContext,
    pub t_v: Option<CMat>,
    pub j_v: Option<[CMat; 3]>,
    pub s_v: Option<CMat>,
    pub t: Option<CMat>,
    pub j: Option<[CMat; 3]>,
    pub s: Option<CMat>,
    /// Linear part of C = γS.
    pub c: Option<CMat>,
}

impl PhysicalSymmetries {
    pub fn q(&self) -> &CMat {
        &self.nambu.q
    }

    pub fn g(&self) -> &CMat {
        self.nambu.gamma.g()
    }

    pub fn dim_w(&self) -> usize {
        self.nambu.dim_w()
    }

    /// Residuals of the stated algebraic relations.
    pub fn check(&self) -> Vec<(String, f64)> {
        let n = self.dim_w();
        let q = self.q();
        let iq = scale(q, I);
        let mut out = vec![("Q^2 = 1".to_string(), dist(&(q * q), &eye(n)))];
        out.push(("Q imaginary".into(), dist(&self.nambu.gamma.conj_mat(q), &scale_re(q, -1.0))));
        if let Some(t) = &self.t {
            out.push(("T^2 = -1".into(), dist(&(t * t.conjugate()), &scale_re(&eye(n), -1.0))));
            out.push(("T unitary".into(), dist(&(t.adjoint() * t), &eye(n))));
            // anti-linear T·(iQ) = t conj(iQ) conj
            let t_iq = t * iq.conjugate();
            let iq_t = &iq * t;
            out.push(("{T, iQ}".into(), op_norm(&(&t_iq + &iq_t))));
            out.push(("[T, gamma]".into(), dist(&(t * self.g().conjugate()), &(self.g() * t.conjugate()))));
        }
        if let Some(j) = &self.j {
            for (mu, jm) in j.iter().enumerate() {
                out.push((format!("j{}^2 = -1", mu + 1), dist(&(jm * jm), &scale_re(&eye(n), -1.0))));
                out.push((format!("[j{}, Q]", mu + 1), op_norm(&linalg::comm(jm, q))));
                if let Some(t) = &self.t {
                    out.push((format!("[j{}, T]", mu + 1), dist(&(t * jm.conjugate()), &(jm * t))));
                }
                if let Some(s) = &self.s {
                    out.push((format!("[S, j{}]", mu + 1), op_norm(&linalg::comm(s, jm))));
                }
            }
            out.push(("j1 j2 = -j3".into(), dist(&(&j[0] * &j[1]), &scale_re(&j[2], -1.0))));
        }
        if let Some(s) = &self.s {
            out.push(("S^2 = 1".into(), dist(&(s * s), &eye(n))));
            out.push(("[S, Q]".into(), op_norm(&linalg::comm(s, q))));
            if let Some(t) = &self.t {
                out.push(("[S, T]".into(), dist(&(t * s.conjugate()), &(s * t))));
            }
        }
        out
    }
}

/// Builds T, j_μ, S on V and extends them to W.
pub fn build_physical(n_v: usize, class: SymmetryClass) -> Result<PhysicalSymmetries> {
    let block = class.block();
    if n_v == 0 || n_v % block != 0 {
        return Err(Error::DimensionNotDivisible { n: n_v, block, class: class.label().into() });
    }
    let nambu = NambuContext::new(n_v);
    let spin = class.needs_spin();
    let sub = class.needs_sublattice();
    let rest = n_v / block;
    let sub_dim = if sub { 2 } else { 1 };
    let spin_op = |m: &CMat| -> CMat { kron(m, &eye(sub_dim * rest)) };
    let t_v = class.has(Generator::T).then(|| spin_op(&scale(&pauli(2), I)));
    let j_v = class.has(Generator::Spin).then(|| [1, 2, 3].map(|mu| spin_op(&scale(&pauli(mu), I))));
    let s_v = sub.then(|| {
        let spin_dim = if spin { 2 } else { 1 };
        kron(&kron(&eye(spin_dim), &pauli(3)), &eye(rest))
    });
    let t = t_v.as_ref().map(|u| nambu.extend_linear(u));
    let j = j_v.as_ref().map(|js| [0, 1, 2].map(|m| nambu.extend_linear(&js[m])));
    let s = s_v.as_ref().map(|sv| nambu.extend_linear(sv));
    let c = s.as_ref().map(|sw| nambu.gamma.g() * sw.conjugate());
    let phys = PhysicalSymmetries { class, nambu, t_v, j_v, s_v, t, j, s, c };
    for (what, res) in phys.check() {
        if res > 1e-12 {
            return Err(Error::RelationFailure { relation: what, residual: res });
        }
    }
    Ok(phys)
}

/// Pseudo-symmetries J₁…J_s, with the ambient space and any operators J must
/// additionally commute with (Q for the complex classes).
#[derive(Debug, Clone)]
pub struct PseudoSyms {
    pub ops: Vec<CMat>,
    pub amplified: bool,
    pub commutant: Vec<CMat>,
    pub ctx: Arc<RealStructure>,
}

impl PseudoSyms {
    pub fn as_rep(&self) -> CliffordRep {
        CliffordRep { r: 0, s: self.ops.len(), k: vec![], j: self.ops.clone(), ctx: self.ctx.clone(), gamma: None }
    }

    /// Lifts every operator to ℓ²(sites) ⊗ (ambient).
    pub fn lift(&self, sites: usize) -> PseudoSyms {
        let id = eye(sites);
        PseudoSyms {
            ops: self.ops.iter().map(|o| kron(&id, o)).collect(),
            amplified: self.amplified,
            commutant: self.commutant.iter().map(|o| kron(&id, o)).collect(),
            ctx: Arc::new(self.ctx.lift(sites)),
        }
    }
}

fn j_t(phys: &PhysicalSymmetries) -> Option<CMat> {
    phys.t.as_ref().map(|t| phys.g() * t.conjugate())
}

fn j_q(phys: &PhysicalSymmetries) -> Option<CMat> {
    phys.t.as_ref().map(|t| scale(&(phys.g() * phys.q() * t.conjugate()), I))
}

fn j_c(phys: &PhysicalSymmetries) -> Option<CMat> {
    phys.s.as_ref().map(|s| scale(&(phys.q() * s), -I))
}

pub fn pseudo_syms(class: SymmetryClass, phys: &PhysicalSymmetries) -> Result<PseudoSyms> {
    if phys.class != class && !class_fits(class, phys) {
        return Err(Error::InvalidClass(format!("{class} with symmetries built for {}", phys.class)));
    }
    let missing = || Error::InvalidClass(format!("{class}: physical symmetry missing"));
    let gamma = phys.nambu.gamma.clone();
    if class.is_complex() {
        let mut ops = vec![];
        if class == SymmetryClass::AIII {
            ops.push(j_c(phys).ok_or_else(missing)?);
        }
        return Ok(PseudoSyms { ops, amplified: false, commutant: vec![phys.q().clone()], ctx: gamma });
    }
    let s = class.s();
    let base: Vec<CMat> = [j_t(phys), j_q(phys), j_c(phys)]
        .into_iter()
        .take(if s >= 4 { s - 4 } else { s })
        .map(|o| o.ok_or_else(missing))
        .collect::<Result<_>>()?;
    if s < 4 {
        return Ok(PseudoSyms { ops: base, amplified: false, commutant: vec![], ctx: gamma });
    }
    let j = phys.j.as_ref().ok_or_else(missing)?;
    let n = phys.dim_w();
    let mut ops: Vec<CMat> = j.iter().map(|jm| kron(jm, &pauli(3))).collect();
    ops.push(kron(&eye(n), &scale(&pauli(2), I)));
    for b in base {
        ops.push(kron(&b, &pauli(1)));
    }
    let ctx = Arc::new(gamma.tensor(&RealStructure::trivial(2)));
    Ok(PseudoSyms { ops, amplified: true, commutant: vec![], ctx })
}

fn class_fits(class: SymmetryClass, phys: &PhysicalSymmetries) -> bool {
    class.generators().iter().all(|g| match g {
        Generator::T => phys.t.is_some(),
        Generator::Q => true,
        Generator::C => phys.s.is_some(),
        Generator::Spin => phys.j.is_some(),
    })
}

/// On-site operator lifted to `sites` copies.
pub fn lift(op: &CMat, sites: usize) -> CMat {
    kron(&eye(sites), op)
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyResult {
    pub class: SymmetryClass,
    pub commutes_with_symmetries: bool,
    pub j_anticommutes_with_pseudosyms: bool,
    pub symmetry_residual: f64,
    pub pseudo_residual: f64,
}

impl ClassifyResult {
    pub fn consistent(&self) -> bool {
        self.commutes_with_symmetries == self.j_anticommutes_with_pseudosyms
    }
}

/// Max residual of H against the class generators (lifted to all sites).
pub fn symmetry_residual(h: &CMat, phys: &PhysicalSymmetries, class: SymmetryClass) -> Result<f64> {
    let n = phys.dim_w();
    if h.nrows() % n != 0 {
        return Err(Error::DimensionMismatch { expected: n, got: h.nrows() });
    }
    let sites = h.nrows() / n;
    let missing = || Error::InvalidClass(format!("{class}: physical symmetry missing"));
    let mut worst: f64 = 0.0;
    for g in class.generators() {
        let res = match g {
            Generator::T => {
                let u = lift(phys.t.as_ref().ok_or_else(missing)?, sites);
                dist(&(&u * h.conjugate() * u.adjoint()), h)
            }
            Generator::Q => op_norm(&linalg::comm(&lift(phys.q(), sites), h)),
            Generator::C => {
                let u = lift(phys.c.as_ref().ok_or_else(missing)?, sites);
                dist(&(&u * h.conjugate() * u.adjoint()), h)
            }
            Generator::Spin => {
                let j = phys.j.as_ref().ok_or_else(missing)?;
                j.iter().map(|jm| op_norm(&linalg::comm(&lift(jm, sites), h))).fold(0.0, f64::max)
            }
        };
        worst = worst.max(res);
    }
    Ok(worst)
}

/// Max residual of a flattened J against the (lifted) pseudo-symmetries.
pub fn pseudo_residual(jm: &CMat, ps: &PseudoSyms) -> f64 {
    let x = if ps.amplified { kron(jm, &pauli(1)) } else { jm.clone() };
    let a = ps.ops.iter().map(|o| op_norm(&linalg::anticomm(&x, o)));
    let c = ps.commutant.iter().map(|o| op_norm(&linalg::comm(&x, o)));
    a.chain(c).fold(0.0, f64::max)
}

pub fn classify(h: &CMat, phys: &PhysicalSymmetries, class: SymmetryClass, gap_tol: f64) -> Result<ClassifyResult> {
    classify_tol(h, phys, class, gap_tol, DEFAULT_TOL)
}

pub fn classify_tol(
    h: &CMat,
    phys: &PhysicalSymmetries,
    class: SymmetryClass,
    gap_tol: f64,
    tol: f64,
) -> Result<ClassifyResult> {
    let sym = symmetry_residual(h, phys, class)?;
    let sites = h.nrows() / phys.dim_w();
    let jm = scale(&structured::sign_matrix(h, gap_tol)?, -I);
    let ps = pseudo_syms(class, phys)?.lift(sites);
    let pr = pseudo_residual(&jm, &ps);
    Ok(ClassifyResult {
        class,
        commutes_with_symmetries: sym < tol,
        j_anticommutes_with_pseudosyms: pr < tol,
        symmetry_residual: sym,
        pseudo_residual: pr,
    })
}

/// Random Nambu Hamiltonian on W symmetrized over the class generators, optionally
/// leaving one generator out so that the result generically breaks it.
pub fn random_compatible_h(phys: &PhysicalSymmetries, class: SymmetryClass, skip: Option<Generator>, seed: u64) -> CMat {
    let n = phys.nambu.n_v;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rnd = || cx(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let a = faer::Mat::from_fn(n, n, |_, _| rnd());
    let b = faer::Mat::from_fn(n, n, |_, _| rnd());
    let h = scale_re(&(&a + a.adjoint()), 0.5);
    let delta = scale_re(&(&b - b.transpose()), 0.5);
    let mut hw = phys.nambu.bdg(&h, &delta);
    for g in class.generators() {
        if Some(g) == skip {
            continue;
        }
        hw = match g {
            Generator::T => {
                let u = phys.t.as_ref().unwrap();
                scale_re(&(&hw + u * hw.conjugate() * u.adjoint()), 0.5)
            }
            Generator::Q => scale_re(&(&hw + phys.q() * &hw * phys.q()), 0.5),
            Generator::C => {
                let u = phys.c.as_ref().unwrap();
                scale_re(&(&hw + u * hw.conjugate() * u.adjoint()), 0.5)
            }
            Generator::Spin => {
                let j = phys.j.as_ref().unwrap();
                let mut x = hw;
                for jm in &j[..2] {
                    x = scale_re(&(&x + jm * &x * jm.adjoint()), 0.5);
                }
                x
            }
        };
    }
    linalg::hermitian_part(&hw)
}

/// Rows of the first-quantized table: squares of Θ, Ξ, Π (0 = absent).
pub const SRFL_TABLE: [(SymmetryClass, i8, i8, i8); 10] = [
    (SymmetryClass::A, 0, 0, 0),
    (SymmetryClass::AIII, 0, 0, 1),
    (SymmetryClass::D, 0, 1, 0),
    (SymmetryClass::DIII, -1, 1, 1),
    (SymmetryClass::AII, -1, 0, 0),
    (SymmetryClass::CII, -1, -1, 1),
    (SymmetryClass::C, 0, -1, 0),
    (SymmetryClass::CI, 1, -1, 1),
    (SymmetryClass::AI, 1, 0, 0),
    (SymmetryClass::BDI, 1, 1, 1),
];

#[derive(Debug, Clone, Serialize)]
pub struct SrflResult {
    pub squares: (i8, i8, i8),
    pub row: Option<SymmetryClass>,
    pub symmetric: bool,
    pub residual: f64,
}

fn antiunitary_square(u: &CMat, name: &str) -> Result<i8> {
    let n = u.nrows();
    let sq = u * u.conjugate();
    if dist(&sq, &eye(n)) < 1e-10 {
        Ok(1)
    } else if dist(&sq, &scale_re(&eye(n), -1.0)) < 1e-10 {
        Ok(-1)
    } else {
        Err(Error::InconsistentSquares(format!("{name}^2 is not ±1")))
    }
}

/// Θ, Ξ are anti-unitaries given by their linear parts, Π is unitary.
pub fn srfl_classify(h: &CMat, theta: Option<&CMat>, xi: Option<&CMat>, pi: Option<&CMat>) -> Result<SrflResult> {
    let n = h.nrows();
    let mut residual: f64 = 0.0;
    let ts = match theta {
        Some(u) => {
            residual = residual.max(dist(&(u * h.conjugate() * u.adjoint()), h));
            antiunitary_square(u, "Theta")?
        }
        None => 0,
    };
    let xs = match xi {
        Some(u) => {
            residual = residual.max(dist(&(u * h.conjugate() * u.adjoint()), &scale_re(h, -1.0)));
            antiunitary_square(u, "Xi")?
        }
        None => 0,
    };
    let ps = match pi {
        Some(p) => {
            residual = residual.max(dist(&(p * h * p.adjoint()), &scale_re(h, -1.0)));
            if dist(&(p * p), &eye(n)) > 1e-10 {
                return Err(Error::InconsistentSquares("Pi^2 != 1".into()));
            }
            1
        }
        None => 0,
    };
    let row = SRFL_TABLE.iter().find(|r| (r.1, r.2, r.3) == (ts, xs, ps)).map(|r| r.0);
    Ok(SrflResult { squares: (ts, xs, ps), row, symmetric: residual < DEFAULT_TOL, residual })
}

/// First-quantized data for a Nambu Hamiltonian: the reduced Hamiltonian and Θ, Ξ, Π.
#[derive(Debug, Clone)]
pub struct SrflData {
    pub h: CMat,
    pub theta: Option<CMat>,
    pub xi: Option<CMat>,
    pub pi: Option<CMat>,
    /// Residual of the symmetries used for the reduction itself (Q, j_μ).
    pub reduction_residual: f64,
}

fn charge_indices(n_v: usize, sites: usize) -> Vec<usize> {
    (0..sites).flat_map(|x| (0..n_v).map(move |a| x * 2 * n_v + a)).collect()
}

fn restrict_linear(a: &CMat, b: &CMat) -> CMat {
    b.adjoint() * a * b
}

fn restrict_anti(u: &CMat, b: &CMat) -> CMat {
    b.adjoint() * u * b.conjugate()
}

/// Reduces Nambu data to first-quantized data following the class recipe.
pub fn srfl_reduce(h: &CMat, phys: &PhysicalSymmetries, class: SymmetryClass) -> Result<SrflData> {
    use SymmetryClass::*;
    let nw = phys.dim_w();
    let n_v = phys.nambu.n_v;
    if h.nrows() % nw != 0 {
        return Err(Error::DimensionMismatch { expected: nw, got: h.nrows() });
    }
    let sites = h.nrows() / nw;
    let missing = || Error::InvalidClass(format!("{class}: physical symmetry missing"));
    let lifted = |m: &CMat| lift(m, sites);
    let mut red: f64 = 0.0;
    let charge = class.has(Generator::Q);
    if charge {
        red = red.max(op_norm(&linalg::comm(&lifted(phys.q()), h)));
    }
    if class.has(Generator::Spin) {
        for jm in phys.j.as_ref().ok_or_else(missing)? {
            red = red.max(op_norm(&linalg::comm(&lifted(jm), h)));
        }
    }
    // first-quantized space: W, or V when charge is conserved
    let (hspace, t_u, s_u, j_u) = if charge {
        let idx = charge_indices(n_v, sites);
        let hv = linalg::select(h, &idx, &idx);
        (
            hv,
            phys.t_v.as_ref().map(|m| lift(m, sites)),
            phys.s_v.as_ref().map(|m| lift(m, sites)),
            phys.j_v.as_ref().map(|js| js.clone().map(|m| lift(&m, sites))),
        )
    } else {
        (
            h.clone(),
            phys.t.as_ref().map(lifted),
            phys.s.as_ref().map(lifted),
            phys.j.as_ref().map(|js| js.clone().map(|m| lift(&m, sites))),
        )
    };
    let g = lift(phys.g(), sites);
    let data = match class {
        D => SrflData { h: hspace, theta: None, xi: Some(g), pi: None, reduction_residual: red },
        DIII => {
            let t = t_u.ok_or_else(missing)?;
            let pi = scale(&(&t * g.conjugate()), I);
            SrflData { h: hspace, theta: Some(t), xi: Some(g), pi: Some(pi), reduction_residual: red }
        }
        AII => SrflData { h: hspace, theta: Some(t_u.ok_or_else(missing)?), xi: None, pi: None, reduction_residual: red },
        CII => {
            let t = t_u.ok_or_else(missing)?;
            let s = s_u.ok_or_else(missing)?;
            let xi = &t * s.conjugate();
            SrflData { h: hspace, theta: Some(t), xi: Some(xi), pi: Some(s), reduction_residual: red }
        }
        A => SrflData { h: hspace, theta: None, xi: None, pi: None, reduction_residual: red },
        AIII => SrflData { h: hspace, theta: None, xi: None, pi: Some(s_u.ok_or_else(missing)?), reduction_residual: red },
        C | CI | AI | BDI => {
            let j = j_u.ok_or_else(missing)?;
            let b = linalg::eigenspace(&j[2], I, 1e-8);
            let hr = restrict_linear(&hspace, &b);
            let theta = if class.has(Generator::T) {
                let t = t_u.ok_or_else(missing)?;
                Some(restrict_anti(&(&j[1] * &t), &b))
            } else {
                None
            };
            let (xi, pi) = match class {
                C => (Some(restrict_anti(&(&g * j[1].conjugate()), &b)), None),
                CI => {
                    let xi = restrict_anti(&(&g * j[1].conjugate()), &b);
                    let pi = scale(&(theta.as_ref().unwrap() * xi.conjugate()), I);
                    (Some(xi), Some(pi))
                }
                AI => (None, None),
                _ => {
                    let s = restrict_linear(&s_u.ok_or_else(missing)?, &b);
                    let xi = theta.as_ref().unwrap() * s.conjugate();
                    (Some(xi), Some(s))
                }
            };
            SrflData { h: hr, theta, xi, pi, reduction_residual: red }
        }
    };
    Ok(data)
}

/// True iff the first-quantized route places H in `class`.
pub fn srfl_agrees(h: &CMat, phys: &PhysicalSymmetries, class: SymmetryClass) -> Result<bool> {
    let data = srfl_reduce(h, phys, class)?;
    if data.reduction_residual >= DEFAULT_TOL {
        return Ok(false);
    }
    let res = srfl_classify(&data.h, data.theta.as_ref(), data.xi.as_ref(), data.pi.as_ref())?;
    Ok(res.symmetric && res.row == Some(class))
}

/// Output of the reduction for two anti-commuting real skew-Hermitian unitaries.
#[derive(Debug, Clone)]
pub struct TwoPs {
    /// Orthonormal basis of W~ = ker(x₂x₁ − i).
    pub basis: CMat,
    /// Linear part of T = −γx₂ restricted to W~ (T² = −1).
    pub t: CMat,
    /// φ : W~ ⊗ C² → W, σ factor last.
    pub phi: CMat,
    pub x1_image: CMat,
    pub x2_image: CMat,
    pub residual: f64,
}

pub fn two_ps_reduction(x1: &CMat, x2: &CMat, gamma: &RealStructure) -> Result<TwoPs> {
    let n = x1.nrows();
    let ac = op_norm(&linalg::anticomm(x1, x2));
    if ac > DEFAULT_TOL {
        return Err(Error::NotAntiCommuting { residual: ac });
    }
    for (name, x) in [("x1", x1), ("x2", x2)] {
        let bad = [
            dist(&gamma.conj_mat(x), x),
            op_norm(&(x + x.adjoint())),
            dist(&(x.adjoint() * x), &eye(n)),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        if bad > DEFAULT_TOL {
            return Err(Error::RelationFailure { relation: format!("{name} real skew unitary"), residual: bad });
        }
    }
    let x3 = x2 * x1;
    let bp = linalg::eigenspace(&x3, I, 1e-8);
    let m = bp.ncols();
    // x₂ = [[0, u*], [−u, 0]] over W+ ⊕ W−, so u = −x₂ restricted to W+
    let u = scale_re(x2, -1.0);
    let mut phi = linalg::zeros(n, 2 * m);
    let ub = &u * &bp;
    for i in 0..m {
        for row in 0..n {
            phi[(row, 2 * i)] = bp[(row, i)];
            phi[(row, 2 * i + 1)] = ub[(row, i)];
        }
    }
    let t_lin = scale_re(&(gamma.g() * x2.conjugate()), -1.0);
    let t = restrict_anti(&t_lin, &bp);
    let x1_image = phi.adjoint() * x1 * &phi;
    let x2_image = phi.adjoint() * x2 * &phi;
    let target1 = kron(&eye(m), &scale(&pauli(1), I));
    let target2 = kron(&eye(m), &scale(&pauli(2), I));
    let cmat = linalg::from_real(2, 2, |i, j| match (i, j) {
        (0, 1) => 1.0,
        (1, 0) => -1.0,
        _ => 0.0,
    });
    let round = &phi * kron(&t, &cmat) * phi.transpose();
    let residual = [
        dist(&(phi.adjoint() * &phi), &eye(2 * m)),
        dist(&x1_image, &target1),
        dist(&x2_image, &target2),
        dist(&(&t * t.conjugate()), &scale_re(&eye(m), -1.0)),
        dist(&round, gamma.g()),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    if residual > DEFAULT_TOL || 2 * m != n {
        return Err(Error::RelationFailure { relation: "two pseudo-symmetry reduction".into(), residual });
    }
    Ok(TwoPs { basis: bp, t, phi, x1_image, x2_image, residual })
}

/// For J anti-commuting with two reduced pseudo-symmetries: checks φ*Jφ = x ⊗ iσz with x
/// Hermitian and commuting with T. Returns (form residual, Hermitian residual, T residual).
pub fn aii_structure(jm: &CMat, red: &TwoPs) -> (f64, f64, f64) {
    let m = red.basis.ncols();
    let y = red.phi.adjoint() * jm * &red.phi;
    let x = faer::Mat::from_fn(m, m, |a, b| y[(2 * a, 2 * b)] * cx(0.0, -1.0));
    let rebuilt = kron(&x, &scale(&pauli(3), I));
    (
        dist(&y, &rebuilt),
        dist(&x, &x.adjoint().to_owned()),
        dist(&(&red.t * x.conjugate()), &(&x * &red.t)),
    )
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DiiiReport {
    pub maps_plus_to_minus: f64,
    pub u_unitary: f64,
    pub form_skew: f64,
}

/// Off-diagonal block u of a class-DIII J with respect to ker(J_T ∓ i).
pub fn diii_structure(jm: &CMat, phys: &PhysicalSymmetries) -> Result<DiiiReport> {
    let nw = phys.dim_w();
    let sites = jm.nrows() / nw;
    let jt = lift(&j_t(phys).ok_or_else(|| Error::InvalidClass("DIII needs T".into()))?, sites);
    let g = lift(phys.g(), sites);
    let bp = linalg::eigenspace(&jt, I, 1e-8);
    let bm = linalg::eigenspace(&jt, -I, 1e-8);
    let leak = op_norm(&(bp.adjoint() * jm * &bp));
    let u = bm.adjoint() * jm * &bp;
    let form = bp.transpose() * &g * jm * &bp;
    Ok(DiiiReport {
        maps_plus_to_minus: leak,
        u_unitary: dist(&(u.adjoint() * &u), &eye(u.ncols())),
        form_skew: op_norm(&(&form + form.transpose())),
    })
}

/// The pseudo-symmetry list as a Clifford representation passes all checks.
pub fn pseudo_syms_valid(ps: &PseudoSyms) -> bool {
    verify_rep(&ps.as_rep()).pass
}
