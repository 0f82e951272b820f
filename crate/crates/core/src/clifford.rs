//! Matrix representations of the real Clifford algebras Cl_{r,s}, the pseudo-symmetry
//! projection, the Van Daele ORHU map and the corner isomorphism.
//!
//! Generators are built from Jordan–Wigner gamma matrices on `q` qubits,
//! `γ_{2k−1} = Z⋯Z X 1⋯1`, `γ_{2k} = Z⋯Z Y 1⋯1`. Positive generators are `k_a = γ_a`,
//! negative ones `j_α = −i γ_{r+α}`, so Cl_{1,1} comes out as `k₁ = σx`, `j₁ = −iσy`.
//! The real structure is a product of gammas chosen so that every generator is real.

use std::sync::Arc;

use faer::{c64, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, cx, dist, eye, kron, op_norm, scale, scale_re, CMat, I};
use crate::structured::{Kind, RealStructure, StructuredMatrix, DEFAULT_TOL};

pub const MAX_GENERATORS: usize = 12;

#[derive(Debug, Clone)]
pub struct CliffordRep {
    pub r: usize,
    pub s: usize,
    pub k: Vec<CMat>,
    pub j: Vec<CMat>,
    pub ctx: Arc<RealStructure>,
    pub gamma: Option<CMat>,
}

impl CliffordRep {
    pub fn dim(&self) -> usize {
        self.ctx.dim()
    }

    /// All generators, positive first.
    pub fn generators(&self) -> Vec<&CMat> {
        self.k.iter().chain(self.j.iter()).collect()
    }

    /// Tensors with C^m carrying plain conjugation.
    pub fn amplify(&self, m: usize) -> CliffordRep {
        let id = eye(m);
        CliffordRep {
            r: self.r,
            s: self.s,
            k: self.k.iter().map(|g| kron(g, &id)).collect(),
            j: self.j.iter().map(|g| kron(g, &id)).collect(),
            ctx: Arc::new(self.ctx.tensor(&RealStructure::trivial(m))),
            gamma: self.gamma.as_ref().map(|g| kron(g, &id)),
        }
    }

    /// Drops the last negative generator, returning it.
    pub fn split_last(&self) -> (CliffordRep, CMat) {
        let mut rep = self.clone();
        let last = rep.j.pop().expect("no negative generator to split off");
        rep.s -= 1;
        (rep, last)
    }
}

fn jw_gammas(q: usize) -> Vec<CMat> {
    let mut out = Vec::with_capacity(2 * q);
    for k in 0..q {
        for p in [1usize, 2] {
            let factors: Vec<CMat> = (0..q)
                .map(|l| {
                    if l < k {
                        linalg::pauli(3)
                    } else if l == k {
                        linalg::pauli(p)
                    } else {
                        linalg::pauli(0)
                    }
                })
                .collect();
            out.push(linalg::kron_all(&factors));
        }
    }
    out
}

/// Real structure G = ∏_{i∈S} γ_i with G conj(γ_i) G⁻¹ = η_i γ_i for the requested signs.
fn structure_for(gammas: &[CMat], eta: &[f64]) -> CMat {
    let n = gammas[0].nrows();
    // c_i: +1 for real gammas (odd index), −1 for imaginary ones
    let c: Vec<f64> = (0..gammas.len()).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    for parity in [0usize, 1] {
        let sign = if parity == 0 { 1.0 } else { -1.0 };
        let set: Vec<usize> = (0..gammas.len()).filter(|&i| eta[i] * c[i] * sign < 0.0).collect();
        if set.len() % 2 == parity {
            let mut g = eye(n);
            for &i in &set {
                g = &g * &gammas[i];
            }
            return g;
        }
    }
    unreachable!("an even number of gammas always admits a structure")
}

/// Standard representation of Cl_{r,s} with a real grading operator.
///
/// Size is 2^⌈(r+s)/2⌉, doubled when r+s is even and r − s ≡ 2 (mod 4), where no real
/// Hermitian grading exists at the smaller size.
pub fn standard_rep(r: usize, s: usize) -> Result<CliffordRep> {
    let n = r + s;
    if n > MAX_GENERATORS {
        return Err(Error::SizeExceeded { r, s });
    }
    if n == 0 {
        return Ok(CliffordRep {
            r,
            s,
            k: vec![],
            j: vec![],
            ctx: Arc::new(RealStructure::trivial(1)),
            gamma: Some(eye(1)),
        });
    }
    let odd = n % 2 == 1;
    let pad = !odd && (r as i64 - s as i64).rem_euclid(4) == 2;
    let q = if odd { n.div_ceil(2) } else if pad { n / 2 + 1 } else { n / 2 };
    let gammas = jw_gammas(q);
    let mut eta: Vec<f64> = vec![1.0; 2 * q];
    for e in eta.iter_mut().skip(r).take(s) {
        *e = -1.0;
    }
    let g = structure_for(&gammas, &eta);
    let ctx = Arc::new(RealStructure::new(g)?);
    let k: Vec<CMat> = gammas[..r].to_vec();
    let j: Vec<CMat> = gammas[r..n].iter().map(|g| scale(g, -I)).collect();
    let gamma = if odd || pad {
        gammas[n].clone()
    } else {
        let mut w = eye(1 << q);
        for g in k.iter().chain(j.iter()) {
            w = &w * g;
        }
        w
    };
    Ok(CliffordRep { r, s, k, j, ctx, gamma: Some(gamma) })
}

/// The irreducible quaternionic representation of Cl_{0,3} with ω = +1:
/// j_α = iσ_α on C² with the structure 𝔠 ∘ conj.
pub fn cl03_irreducible() -> CliffordRep {
    CliffordRep {
        r: 0,
        s: 3,
        k: vec![],
        j: (1..4).map(|a| scale(&linalg::pauli(a), I)).collect(),
        ctx: Arc::new(RealStructure::quaternion(1)),
        gamma: None,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RepReport {
    pub r: usize,
    pub s: usize,
    pub dim: usize,
    pub max_residual: f64,
    pub worst: String,
    pub pass: bool,
}

/// Checks the Clifford relations, reality, unitarity and grading.
pub fn verify_rep(rep: &CliffordRep) -> RepReport {
    verify_rep_tol(rep, DEFAULT_TOL)
}

pub fn verify_rep_tol(rep: &CliffordRep, tol: f64) -> RepReport {
    let n = rep.dim();
    let id = eye(n);
    let mut worst = (0.0f64, String::from("none"));
    let mut note = |res: f64, what: String| {
        if res > worst.0 || res.is_nan() {
            worst = (res, what);
        }
    };
    let gens: Vec<(&CMat, f64, String)> = rep
        .k
        .iter()
        .enumerate()
        .map(|(a, g)| (g, 1.0, format!("k{}", a + 1)))
        .chain(rep.j.iter().enumerate().map(|(a, g)| (g, -1.0, format!("j{}", a + 1))))
        .collect();
    for (g, sq, name) in &gens {
        if g.nrows() != n || g.ncols() != n {
            note(f64::INFINITY, format!("{name} dimension"));
            continue;
        }
        note(dist(&(g.adjoint() * *g), &id), format!("{name} unitary"));
        note(dist(&(*g * *g), &scale_re(&id, *sq)), format!("{name}^2"));
        note(dist(&rep.ctx.conj_mat(g), g), format!("{name} real"));
    }
    for a in 0..gens.len() {
        for b in (a + 1)..gens.len() {
            let res = op_norm(&linalg::anticomm(gens[a].0, gens[b].0));
            note(res, format!("{{{},{}}}", gens[a].2, gens[b].2));
        }
    }
    if let Some(gm) = &rep.gamma {
        note(dist(&(gm * gm), &id), "Gamma^2".into());
        note(dist(gm, &gm.adjoint().to_owned()), "Gamma Hermitian".into());
        for (g, _, name) in &gens {
            note(op_norm(&linalg::anticomm(gm, g)), format!("{{Gamma,{name}}}"));
        }
    }
    RepReport { r: rep.r, s: rep.s, dim: n, max_residual: worst.0, pass: worst.0 < tol, worst: worst.1 }
}

/// ω = j₁⋯j_s.
pub fn volume_element(rep: &CliffordRep) -> Result<StructuredMatrix> {
    if rep.r > 0 {
        return Err(Error::PositiveGeneratorsPresent { r: rep.r });
    }
    let mut w = eye(rep.dim());
    for g in &rep.j {
        w = &w * g;
    }
    StructuredMatrix::new(w, rep.ctx.clone())
}

#[derive(Debug, Clone)]
pub enum Extension {
    Extended { j_new: CMat, rep: CliffordRep },
    NotExtendable { plus: usize, minus: usize },
}

/// Extends a Cl_{0,s} representation with s ≡ 3 (mod 4) by one more negative generator.
pub fn extend_rep(rep: &CliffordRep) -> Result<Extension> {
    if rep.r > 0 {
        return Err(Error::PositiveGeneratorsPresent { r: rep.r });
    }
    if rep.s % 4 != 3 {
        return Err(Error::RelationFailure { relation: "s ≡ 3 (mod 4)".into(), residual: f64::NAN });
    }
    let report = verify_rep(rep);
    if !report.pass {
        return Err(Error::RelationFailure { relation: report.worst, residual: report.max_residual });
    }
    let w = volume_element(rep)?.m;
    let bp = linalg::eigenspace(&w, linalg::ONE, 1e-8);
    let bm = linalg::eigenspace(&w, -linalg::ONE, 1e-8);
    let (mp, mm) = (bp.ncols(), bm.ncols());
    if mp != mm || mp == 0 {
        return Ok(Extension::NotExtendable { plus: mp, minus: mm });
    }
    let m = mp;
    // intertwiners x : W+ → W− with φ−(j) x + x φ+(j) = 0, as a null space on vec(x)
    let mut rows: Vec<CMat> = Vec::new();
    for g in &rep.j {
        let phi_p = bp.adjoint() * g * &bp;
        let phi_m = bm.adjoint() * g * &bm;
        rows.push(kron(&eye(m), &phi_m) + kron(&linalg::transpose(&phi_p), &eye(m)));
    }
    let mut stacked = linalg::zeros(m * m * rows.len(), m * m);
    for (t, blk) in rows.iter().enumerate() {
        linalg::set_block(&mut stacked, t * m * m, 0, blk);
    }
    let gram = linalg::hermitian_part(&(stacked.adjoint() * &stacked));
    let (vals, vecs) = linalg::eigh(&gram);
    let null: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] < 1e-10).collect();
    if null.is_empty() {
        return Ok(Extension::NotExtendable { plus: mp, minus: mm });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut best: Option<CMat> = None;
    for _attempt in 0..8 {
        let mut x = linalg::zeros(m, m);
        for &c in &null {
            let coef = cx(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            for col in 0..m {
                for row in 0..m {
                    x[(row, col)] += coef * vecs[(col * m + row, c)];
                }
            }
        }
        let full = &bm * &x * bp.adjoint();
        let real = scale_re(&(&full + rep.ctx.conj_mat(&full)), 0.5);
        let xc = bm.adjoint() * &real * &bp;
        let smin = xc.singular_values().map(|s| s.into_iter().fold(f64::INFINITY, f64::min)).unwrap_or(0.0);
        if smin > 1e-6 {
            best = Some(xc);
            break;
        }
    }
    let Some(xc) = best else {
        return Ok(Extension::NotExtendable { plus: mp, minus: mm });
    };
    let u = linalg::polar_unitary(&xc);
    let j_new = &bm * &u * bp.adjoint() - &bp * u.adjoint() * bm.adjoint();
    let mut ext = rep.clone();
    ext.j.push(j_new.clone());
    ext.s += 1;
    ext.gamma = None;
    let report = verify_rep(&ext);
    if !report.pass {
        return Err(Error::RelationFailure { relation: report.worst, residual: report.max_residual });
    }
    Ok(Extension::Extended { j_new, rep: ext })
}

/// Graded tensor product: B's generators are twisted by A's grading.
pub fn graded_tensor(a: &CliffordRep, b: &CliffordRep) -> Result<CliffordRep> {
    let (Some(ga), Some(gb)) = (&a.gamma, &b.gamma) else {
        return Err(Error::MissingGrading);
    };
    let ib = eye(b.dim());
    let k = a.k.iter().map(|g| kron(g, &ib)).chain(b.k.iter().map(|g| kron(ga, g))).collect();
    let j = a.j.iter().map(|g| kron(g, &ib)).chain(b.j.iter().map(|g| kron(ga, g))).collect();
    Ok(CliffordRep {
        r: a.r + b.r,
        s: a.s + b.s,
        k,
        j,
        ctx: Arc::new(a.ctx.tensor(&b.ctx)),
        gamma: Some(kron(ga, gb)),
    })
}

/// Commuting projections on B ⊗ amb and their product P^{r,s}.
#[derive(Debug, Clone)]
pub struct PseudoProjection {
    pub r: usize,
    pub s: usize,
    pub p: CMat,
    pub q: Vec<CMat>,
    pub p_alpha: Vec<CMat>,
    pub ctx: Arc<RealStructure>,
    pub grading: CMat,
    pub amb_dim: usize,
    pub j1: CMat,
}

impl PseudoProjection {
    /// Projections in ε order: first the Q_a, then the P_α.
    pub fn factors(&self) -> Vec<&CMat> {
        self.q.iter().chain(self.p_alpha.iter()).collect()
    }

    /// J ⊗ j₁ on B ⊗ amb.
    pub fn lift(&self, jm: &CMat) -> CMat {
        kron(jm, &self.j1)
    }
}

fn check_amb(rep: &CliffordRep, amb: &CliffordRep) -> Result<()> {
    if amb.r != rep.r || amb.s != rep.s + 1 {
        return Err(Error::RelationFailure {
            relation: format!("ambient signature ({},{}) != ({},{})", amb.r, amb.s, rep.r, rep.s + 1),
            residual: f64::NAN,
        });
    }
    if amb.gamma.is_none() {
        return Err(Error::MissingGrading);
    }
    for r in [verify_rep(rep), verify_rep(amb)] {
        if !r.pass {
            return Err(Error::RelationFailure { relation: r.worst, residual: r.max_residual });
        }
    }
    Ok(())
}

pub fn pseudo_projection(rep: &CliffordRep, amb: &CliffordRep) -> Result<PseudoProjection> {
    check_amb(rep, amb)?;
    let n = rep.dim() * amb.dim();
    let id = eye(n);
    let j1 = amb.j[0].clone();
    let sign = if rep.s % 2 == 0 { 1.0 } else { -1.0 };
    let half = |x: CMat| scale_re(&(x + &id), 0.5);
    let q: Vec<CMat> = (0..rep.r)
        .map(|a| half(scale_re(&kron(&rep.k[a], &(&amb.k[a] * &j1)), sign)))
        .collect();
    let p_alpha: Vec<CMat> = (0..rep.s).map(|a| half(kron(&rep.j[a], &(&j1 * &amb.j[a + 1])))).collect();
    let mut p = id.clone();
    for f in q.iter().chain(p_alpha.iter()) {
        p = &p * f;
    }
    let ctx = Arc::new(rep.ctx.tensor(&amb.ctx));
    let grading = kron(&eye(rep.dim()), amb.gamma.as_ref().unwrap());
    Ok(PseudoProjection { r: rep.r, s: rep.s, p, q, p_alpha, ctx, grading, amb_dim: amb.dim(), j1 })
}

/// Residual checks that J lies in 𝔽^{r,s}.
pub fn check_iqpv(jm: &CMat, rep: &CliffordRep, tol: f64) -> Result<()> {
    let n = rep.dim();
    if jm.nrows() != n {
        return Err(Error::DimensionMismatch { expected: n, got: jm.nrows() });
    }
    let mut checks: Vec<(String, f64)> = vec![
        ("J real".into(), dist(&rep.ctx.conj_mat(jm), jm)),
        ("J skew-Hermitian".into(), op_norm(&(jm + jm.adjoint()))),
        ("J^2 = -1".into(), op_norm(&(jm * jm + eye(n)))),
    ];
    for (a, k) in rep.k.iter().enumerate() {
        checks.push((format!("{{J,K{}}}", a + 1), op_norm(&linalg::anticomm(jm, k))));
    }
    for (a, g) in rep.j.iter().enumerate() {
        checks.push((format!("{{J,J{}}}", a + 1), op_norm(&linalg::anticomm(jm, g))));
    }
    for (relation, residual) in checks {
        if !(residual < tol) {
            return Err(Error::NotIqpv { relation, residual });
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct OrhuElement {
    pub x: StructuredMatrix,
    pub p: CMat,
    pub gamma: CMat,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OrhuReport {
    pub corner: f64,
    pub hermitian: f64,
    pub real: f64,
    pub square: f64,
    pub odd: f64,
}

impl OrhuReport {
    pub fn max(&self) -> f64 {
        [self.corner, self.hermitian, self.real, self.square, self.odd].into_iter().fold(0.0, f64::max)
    }
}

impl OrhuElement {
    pub fn check(&self) -> OrhuReport {
        let x = &self.x.m;
        OrhuReport {
            corner: dist(&(&self.p * x * &self.p), x),
            hermitian: dist(x, &x.adjoint().to_owned()),
            real: dist(&self.x.ctx.conj_mat(x), x),
            square: dist(&(x * x), &self.p),
            odd: op_norm(&linalg::anticomm(&self.gamma, x)),
        }
    }
}

pub fn orhu_map(jm: &CMat, rep: &CliffordRep, amb: &CliffordRep) -> Result<OrhuElement> {
    let pp = pseudo_projection(rep, amb)?;
    orhu_map_with(jm, rep, &pp)
}

pub fn orhu_map_with(jm: &CMat, rep: &CliffordRep, pp: &PseudoProjection) -> Result<OrhuElement> {
    check_iqpv(jm, rep, DEFAULT_TOL)?;
    let x = pp.lift(jm) * &pp.p;
    Ok(OrhuElement { x: StructuredMatrix::new(x, pp.ctx.clone())?, p: pp.p.clone(), gamma: pp.grading.clone() })
}

/// Recovers J from X = (J ⊗ j₁)P via J = (2^{r+s}/m)·Tr_amb[(1 ⊗ j₁⁻¹) X].
pub fn orhu_inverse(x: &CMat, pp: &PseudoProjection) -> CMat {
    let m = pp.amb_dim;
    let nb = x.nrows() / m;
    let y = kron(&eye(nb), &scale_re(&pp.j1, -1.0)) * x;
    let factor = (1u64 << (pp.r + pp.s)) as f64 / m as f64;
    Mat::from_fn(nb, nb, |b, bp| {
        let mut t = linalg::ZERO;
        for c in 0..m {
            t += y[(b * m + c, bp * m + c)];
        }
        t * factor
    })
}

/// (J ⊗ j₁)P + (J_ref ⊗ j₁)(1 − P).
pub fn bulk_representative(
    jm: &CMat,
    j_ref: &CMat,
    rep: &CliffordRep,
    amb: &CliffordRep,
) -> Result<StructuredMatrix> {
    let pp = pseudo_projection(rep, amb)?;
    check_iqpv(jm, rep, DEFAULT_TOL)?;
    check_iqpv(j_ref, rep, DEFAULT_TOL)?;
    let n = pp.p.nrows();
    let x = pp.lift(jm) * &pp.p + pp.lift(j_ref) * (eye(n) - &pp.p);
    StructuredMatrix::new(x, pp.ctx.clone())
}

/// Ψ(x) = F* x F where the columns of F are u_ε B_P, grouped by ε in lexicographic
/// order with + first, and B_P is an orthonormal basis of the corner.
#[derive(Debug, Clone)]
pub struct CornerIso {
    pub frame: CMat,
    pub blocks: usize,
    pub corner_dim: usize,
    /// Linear part of the corner's real structure in the basis B_P, lifted to all blocks.
    pub corner_structure: CMat,
    pub projections: Vec<CMat>,
    pub signs: Vec<f64>,
}

impl CornerIso {
    pub fn apply(&self, x: &CMat) -> CMat {
        self.frame.adjoint() * x * &self.frame
    }

    pub fn inverse(&self, y: &CMat) -> CMat {
        &self.frame * y * self.frame.adjoint()
    }

    pub fn conj_target(&self, y: &CMat) -> CMat {
        &self.corner_structure * y.conjugate() * self.corner_structure.adjoint()
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CornerReport {
    pub partition: f64,
    pub orthogonality: f64,
    pub frame_unitary: f64,
    pub dimension_ok: bool,
    pub identity: f64,
    pub linear: f64,
    pub multiplicative: f64,
    pub star: f64,
    pub real: f64,
    pub inverse: f64,
    pub reference: f64,
}

impl CornerReport {
    pub fn max(&self) -> f64 {
        [
            self.partition,
            self.orthogonality,
            self.frame_unitary,
            self.identity,
            self.linear,
            self.multiplicative,
            self.star,
            self.real,
            self.inverse,
            self.reference,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn corner_iso(
    rep: &CliffordRep,
    amb: &CliffordRep,
    j_ref: &CMat,
    samples: usize,
    seed: u64,
) -> Result<(CornerIso, CornerReport)> {
    if rep.r + rep.s == 0 {
        return Err(Error::NoReference);
    }
    check_iqpv(j_ref, rep, DEFAULT_TOL).map_err(|_| Error::NoReference)?;
    let pp = pseudo_projection(rep, amb)?;
    let n = pp.p.nrows();
    let id = eye(n);
    let ib = eye(amb.dim());
    let flips: Vec<CMat> = rep
        .k
        .iter()
        .chain(rep.j.iter())
        .map(|g| kron(&(g * j_ref), &ib))
        .collect();
    let factors: Vec<&CMat> = pp.factors();
    let t = factors.len();
    let nblocks = 1usize << t;
    let mut projections = Vec::with_capacity(nblocks);
    let mut unitaries = Vec::with_capacity(nblocks);
    let mut signs = Vec::with_capacity(nblocks);
    for e in 0..nblocks {
        // bit (t−1−i) of e set means ε_i = −, so index 0 is (+,…,+)
        let mut p = id.clone();
        let mut u = id.clone();
        let mut minus = 0;
        for i in 0..t {
            if (e >> (t - 1 - i)) & 1 == 1 {
                p = &p * (&id - factors[i]);
                u = &u * &flips[i];
                minus += 1;
            } else {
                p = &p * factors[i];
            }
        }
        projections.push(p);
        unitaries.push(u);
        signs.push(if minus % 2 == 0 { 1.0 } else { -1.0 });
    }
    let mut sum = linalg::zeros(n, n);
    let mut orth: f64 = 0.0;
    for a in 0..nblocks {
        sum = &sum + &projections[a];
        for b in (a + 1)..nblocks {
            orth = orth.max(op_norm(&(&projections[a] * &projections[b])));
        }
    }
    let partition = dist(&sum, &id);
    let bp = linalg::eigenspace(&pp.p, linalg::ONE, 1e-8);
    let k = bp.ncols();
    let mut frame = linalg::zeros(n, nblocks * k);
    for (e, u) in unitaries.iter().enumerate() {
        linalg::set_block(&mut frame, 0, e * k, &(u * &bp));
    }
    let frame_unitary = if frame.ncols() == n { dist(&(frame.adjoint() * &frame), &id) } else { f64::INFINITY };
    let r_corner = bp.adjoint() * pp.ctx.g() * bp.conjugate();
    let corner_structure = kron(&eye(nblocks), &r_corner);
    let iso = CornerIso { frame, blocks: nblocks, corner_dim: k, corner_structure, projections, signs };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rand_mat = || Mat::from_fn(n, n, |_, _| cx(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let (mut linear, mut mult, mut star, mut real, mut inverse) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..samples {
        let (x, y) = (rand_mat(), rand_mat());
        let (px, py) = (iso.apply(&x), iso.apply(&y));
        let a = cx(0.3, -1.1);
        linear = linear.max(dist(&iso.apply(&(scale(&x, a) + &y)), &(scale(&px, a) + &py)));
        mult = mult.max(dist(&iso.apply(&(&x * &y)), &(&px * &py)));
        star = star.max(dist(&iso.apply(&x.adjoint().to_owned()), &px.adjoint().to_owned()));
        real = real.max(dist(&iso.apply(&pp.ctx.conj_mat(&x)), &iso.conj_target(&px)));
        inverse = inverse.max(dist(&iso.inverse(&px), &x));
    }
    let mut expected = linalg::zeros(n, n);
    let reference = pp.lift(j_ref) * &pp.p;
    let ref_block = bp.adjoint() * &reference * &bp;
    for (e, sgn) in iso.signs.iter().enumerate() {
        linalg::set_block(&mut expected, e * k, e * k, &scale_re(&ref_block, *sgn));
    }
    let report = CornerReport {
        partition,
        orthogonality: orth,
        frame_unitary,
        dimension_ok: k * nblocks == n,
        identity: dist(&iso.apply(&id), &id),
        linear,
        multiplicative: mult,
        star,
        real,
        inverse,
        reference: dist(&iso.apply(&pp.lift(j_ref)), &expected),
    };
    Ok((iso, report))
}

/// A random element of 𝔽^{r,s} for testing: the representation is standard_rep(r, s+1)
/// amplified by C^mult with its last generator as reference J_ref, and J = U J_ref U*
/// for a random real unitary U commuting with the remaining generators.
#[derive(Debug, Clone)]
pub struct IqpvSample {
    pub rep: CliffordRep,
    pub j_ref: CMat,
    pub j: CMat,
    pub generator: CMat,
}

pub fn random_iqpv(r: usize, s: usize, mult: usize, seed: u64) -> Result<IqpvSample> {
    let base = standard_rep(r, s + 1)?.amplify(mult);
    let (rep, j_ref) = base.split_last();
    let n = rep.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a0 = Mat::from_fn(n, n, |_, _| cx(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let skew = scale_re(&(&a0 - a0.adjoint()), 0.5);
    let mut a = scale_re(&(&skew + rep.ctx.conj_mat(&skew)), 0.5);
    // average over the generators: each Ad(g) is an involution, the product of the
    // commuting averages projects onto the commutant
    for g in rep.generators() {
        let gi = g.adjoint().to_owned();
        a = scale_re(&(&a + g * &a * &gi), 0.5);
    }
    let u = linalg::expm_skew(&a);
    let j = &u * &j_ref * u.adjoint();
    Ok(IqpvSample { rep, j_ref, j, generator: a })
}

/// Real span check for a list of elements: returns the real dimension of their span.
pub fn real_span_dim(elems: &[CMat], tol: f64) -> usize {
    if elems.is_empty() {
        return 0;
    }
    let n = elems[0].nrows();
    let rows = 2 * n * n;
    let mut m = Mat::<c64>::zeros(rows, elems.len());
    for (c, e) in elems.iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                m[(2 * (i * n + j), c)] = cx(e[(i, j)].re, 0.0);
                m[(2 * (i * n + j) + 1, c)] = cx(e[(i, j)].im, 0.0);
            }
        }
    }
    linalg::rank(&m, tol)
}

pub fn kind_of(rep: &CliffordRep) -> Kind {
    rep.ctx.kind()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;

    #[test]
    fn cl11_matches_pauli_model() {
        let rep = standard_rep(1, 1).unwrap();
        assert_eq!(rep.k[0], pauli(1));
        assert_eq!(rep.j[0], scale(&pauli(2), -I));
        assert_eq!(rep.ctx.kind(), Kind::Real);
        assert!(verify_rep(&rep).pass);
    }

    #[test]
    fn all_small_signatures_verify() {
        for r in 0..=8 {
            for s in 0..=(8 - r) {
                let rep = standard_rep(r, s).unwrap();
                let rep_report = verify_rep(&rep);
                assert!(rep_report.pass, "({r},{s}): {} {:.2e}", rep_report.worst, rep_report.max_residual);
            }
        }
    }

    #[test]
    fn scaled_generator_fails_unitarity() {
        let mut rep = standard_rep(2, 3).unwrap();
        rep.k[0] = scale_re(&rep.k[0], 1.01);
        let r = verify_rep(&rep);
        assert!(!r.pass);
        assert!((r.max_residual - 0.0201).abs() < 1e-3, "{}", r.max_residual);
    }

    #[test]
    fn volume_pattern_by_residue() {
        for s in 1..=8 {
            let rep = standard_rep(0, s).unwrap();
            let w = volume_element(&rep).unwrap().m;
            let n = w.nrows();
            let sq_plus = dist(&(&w * &w), &eye(n)) < 1e-12;
            let central = rep.j.iter().all(|g| op_norm(&linalg::comm(&w, g)) < 1e-12);
            let expect = match s % 4 {
                0 => (true, false),
                1 => (false, true),
                2 => (false, false),
                _ => (true, true),
            };
            assert_eq!((sq_plus, central), expect, "s = {s}");
        }
    }

    #[test]
    fn cl03_irreducible_not_extendable() {
        let rep = cl03_irreducible();
        assert!(verify_rep(&rep).pass);
        match extend_rep(&rep).unwrap() {
            Extension::NotExtendable { plus, minus } => assert_eq!((plus, minus), (2, 0)),
            _ => panic!("irreducible rep must not extend"),
        }
    }

    #[test]
    fn standard_cl03_extends() {
        let rep = standard_rep(0, 3).unwrap();
        match extend_rep(&rep).unwrap() {
            Extension::Extended { rep, .. } => assert!(verify_rep(&rep).pass),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn graded_tensor_cl11_squared() {
        let a = standard_rep(1, 1).unwrap();
        let t = graded_tensor(&a, &a).unwrap();
        assert_eq!((t.r, t.s, t.dim()), (2, 2, 4));
        assert!(verify_rep(&t).pass);
        let triv = standard_rep(0, 0).unwrap();
        let same = graded_tensor(&triv, &a).unwrap();
        assert_eq!(same.k, a.k);
        assert_eq!(same.j, a.j);
    }

    #[test]
    fn orhu_round_trip_small() {
        for (r, s) in [(0, 0), (0, 1), (1, 0), (1, 2), (2, 1)] {
            let sample = random_iqpv(r, s, 2, 7).unwrap();
            let amb = standard_rep(r, s + 1).unwrap();
            let pp = pseudo_projection(&sample.rep, &amb).unwrap();
            let x = orhu_map_with(&sample.j, &sample.rep, &pp).unwrap();
            assert!(x.check().max() < 1e-10, "({r},{s}) {:?}", x.check());
            assert!(dist(&orhu_inverse(&x.x.m, &pp), &sample.j) < 1e-12);
        }
    }

    #[test]
    fn corner_iso_small_is_bijective_on_basis() {
        let sample = random_iqpv(0, 1, 1, 3).unwrap();
        let amb = standard_rep(0, 2).unwrap();
        let (iso, report) = corner_iso(&sample.rep, &amb, &sample.j_ref, 5, 1).unwrap();
        assert!(report.max() < 1e-10, "{report:?}");
        let n = iso.frame.nrows();
        let basis: Vec<CMat> = (0..n * n)
            .map(|idx| {
                let mut e = linalg::zeros(n, n);
                e[(idx / n, idx % n)] = linalg::ONE;
                iso.apply(&e)
            })
            .collect();
        assert_eq!(real_span_dim(&basis, 1e-9), 2 * n * n / 2);
    }
}
