//! Tight-binding models on Z^d (d = 1, 2) truncated to tori and slabs: assembly of
//! disordered Nambu Hamiltonians, Bernoulli-shift disorder, covariance, flattening,
//! locality checks and the model zoo.
//!
//! Indexing is site-major: the W-component a of site x sits at `site(x) * dim_w + a`,
//! with `site(x) = x₀ + L₀·x₁`. Hoppings are stored as H(y + x, y) = t_x.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, cx, kron, pauli, scale, scale_re, CMat, I, ZERO};
use crate::structured::{self, NambuContext, StructuredMatrix};
use crate::symmetry::SymmetryClass;

pub type Offset = [i64; 2];

#[derive(Debug, Clone)]
pub struct LatticeModel {
    pub name: String,
    pub class: SymmetryClass,
    pub d: usize,
    pub nambu: NambuContext,
    /// True when the model is given by a V-block h (W kernel diag(h, −conj h)).
    pub charge_conserving: bool,
    /// Onsite term and one representative per ±x pair; −x is filled in by Hermiticity.
    pub hoppings: Vec<(Offset, CMat)>,
    /// Onsite disorder directions on W; ω ∈ [−1, 1]^k multiplies them componentwise.
    pub disorder_ops: Vec<CMat>,
    pub params: BTreeMap<String, f64>,
}

impl LatticeModel {
    pub fn n_v(&self) -> usize {
        self.nambu.n_v
    }

    pub fn dim_w(&self) -> usize {
        self.nambu.dim_w()
    }

    /// Hopping range R in the ∞-norm.
    pub fn range(&self) -> usize {
        self.hoppings.iter().map(|(x, _)| x[0].unsigned_abs().max(x[1].unsigned_abs()) as usize).max().unwrap_or(0)
    }

    pub fn disorder_dim(&self) -> usize {
        self.disorder_ops.len()
    }

    /// Bloch Hamiltonian H(k) = Σ_x t_x e^{−ik·x} on W.
    pub fn bloch(&self, k: &[f64]) -> CMat {
        let n = self.dim_w();
        let mut h = linalg::zeros(n, n);
        for (x, t) in &self.hoppings {
            let phase: f64 = (0..self.d).map(|i| k[i] * x[i] as f64).sum();
            let z = cx(phase.cos(), -phase.sin());
            if *x == [0, 0] {
                h += t;
            } else {
                h += scale(t, z);
                h += scale(&t.adjoint().to_owned(), z.conj());
            }
        }
        h
    }

    /// V block of the Bloch Hamiltonian (charge-conserving models only).
    pub fn bloch_v(&self, k: &[f64]) -> CMat {
        let n = self.n_v();
        linalg::get_block(&self.bloch(k), 0, 0, n, n)
    }

    /// Minimum |E| of the clean Bloch spectrum on a uniform grid.
    pub fn clean_gap(&self, grid: usize) -> f64 {
        let mut gap = f64::INFINITY;
        let ks: Vec<f64> = (0..grid).map(|i| 2.0 * PI * i as f64 / grid as f64).collect();
        if self.d == 1 {
            for &k in &ks {
                gap = gap.min(structured::min_abs_eig(&self.bloch(&[k])));
            }
        } else {
            for &kx in &ks {
                for &ky in &ks {
                    gap = gap.min(structured::min_abs_eig(&self.bloch(&[kx, ky])));
                }
            }
        }
        gap
    }

    /// Default clean-gap estimate used to scale disorder.
    pub fn gap_estimate(&self) -> f64 {
        self.clean_gap(if self.d == 1 { 512 } else { 64 })
    }

    /// Spinful copy V ↦ ℂ² ⊗ V of a charge-conserving model; SSH becomes class BDI.
    pub fn with_spin(&self) -> LatticeModel {
        assert!(self.charge_conserving, "with_spin needs a charge-conserving model");
        let n = self.n_v();
        let lift = |t: &CMat| {
            let h = linalg::get_block(t, 0, 0, n, n);
            let h2 = kron(&linalg::eye(2), &h);
            NambuContext::new(2 * n).extend_linear_h(&h2)
        };
        LatticeModel {
            name: format!("{}_spinful", self.name),
            class: match self.class {
                SymmetryClass::AIII => SymmetryClass::BDI,
                SymmetryClass::A => SymmetryClass::AI,
                c => c,
            },
            d: self.d,
            nambu: NambuContext::new(2 * n),
            charge_conserving: true,
            hoppings: self.hoppings.iter().map(|(x, t)| (*x, lift(t))).collect(),
            disorder_ops: self.disorder_ops.iter().map(lift).collect(),
            params: self.params.clone(),
        }
    }
}

impl NambuContext {
    /// W kernel diag(h, −conj h) of a charge-conserving V kernel h.
    pub fn extend_linear_h(&self, h: &CMat) -> CMat {
        linalg::block_diag(&[h, &scale_re(&linalg::conj(h), -1.0)])
    }
}

fn charge_model(
    name: &str,
    class: SymmetryClass,
    d: usize,
    hops_v: Vec<(Offset, CMat)>,
    dis_v: Vec<CMat>,
    params: &[(&str, f64)],
) -> LatticeModel {
    let nambu = NambuContext::new(hops_v[0].1.nrows());
    LatticeModel {
        name: name.into(),
        class,
        d,
        hoppings: hops_v.iter().map(|(x, t)| (*x, nambu.extend_linear_h(t))).collect(),
        disorder_ops: dis_v.iter().map(|t| nambu.extend_linear_h(t)).collect(),
        nambu,
        charge_conserving: true,
        params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
    }
}

fn real2(a: f64, b: f64, c: f64, d: f64) -> CMat {
    linalg::from_real(2, 2, |i, j| [[a, b], [c, d]][i][j])
}

/// Kitaev chain, class D, W = ℂ² per site.
pub fn kitaev_chain(t: f64, delta: f64, mu: f64) -> LatticeModel {
    LatticeModel {
        name: "kitaev".into(),
        class: SymmetryClass::D,
        d: 1,
        nambu: NambuContext::new(1),
        charge_conserving: false,
        hoppings: vec![([0, 0], real2(-mu, 0.0, 0.0, mu)), ([1, 0], real2(-t, -delta, delta, t))],
        disorder_ops: vec![real2(-1.0, 0.0, 0.0, 1.0)],
        params: [("t", t), ("delta", delta), ("mu", mu)].iter().map(|(k, v)| (k.to_string(), *v)).collect(),
    }
}

/// SSH chain, spinless, V = ℂ² (sublattice A, B), class AIII. Disorder acts on v.
pub fn ssh(v: f64, w: f64) -> LatticeModel {
    charge_model(
        "ssh",
        SymmetryClass::AIII,
        1,
        vec![([0, 0], real2(0.0, v, v, 0.0)), ([1, 0], real2(0.0, w, 0.0, 0.0))],
        vec![real2(0.0, 1.0, 1.0, 0.0)],
        &[("v", v), ("w", w)],
    )
}

/// Qi-Wu-Zhang Chern insulator, class A, V = ℂ². Disorder acts on the mass.
pub fn qwz(u: f64) -> LatticeModel {
    let half = |m: CMat| scale_re(&m, 0.5);
    charge_model(
        "qwz",
        SymmetryClass::A,
        2,
        vec![
            ([0, 0], scale_re(&pauli(3), u)),
            ([1, 0], half(&pauli(3) + scale(&pauli(1), I))),
            ([0, 1], half(&pauli(3) + scale(&pauli(2), I))),
        ],
        vec![pauli(3)],
        &[("u", u)],
    )
}

/// Spinless p + ip superconductor on the square lattice, class D.
pub fn p_ip(t: f64, delta: f64, mu: f64) -> LatticeModel {
    let ty = linalg::from_rows(&[&[cx(-t, 0.0), cx(0.0, -delta)], &[cx(0.0, -delta), cx(t, 0.0)]]);
    LatticeModel {
        name: "p_ip".into(),
        class: SymmetryClass::D,
        d: 2,
        nambu: NambuContext::new(1),
        charge_conserving: false,
        hoppings: vec![([0, 0], real2(-mu, 0.0, 0.0, mu)), ([1, 0], real2(-t, -delta, delta, t)), ([0, 1], ty)],
        disorder_ops: vec![real2(-1.0, 0.0, 0.0, 1.0)],
        params: [("t", t), ("delta", delta), ("mu", mu)].iter().map(|(k, v)| (k.to_string(), *v)).collect(),
    }
}

/// Atomic-limit model: a single onsite term, no hopping.
pub fn onsite(model_name: &str, class: SymmetryClass, d: usize, h0_w: CMat) -> LatticeModel {
    let nambu = NambuContext::new(h0_w.nrows() / 2);
    LatticeModel {
        name: model_name.into(),
        class,
        d,
        nambu,
        charge_conserving: false,
        hoppings: vec![([0, 0], h0_w)],
        disorder_ops: vec![],
        params: BTreeMap::new(),
    }
}

/// Builds a zoo model from its name and parameter map (missing keys take defaults).
pub fn zoo(name: &str, params: &BTreeMap<String, f64>) -> Result<LatticeModel> {
    let known: &[&str] = match name {
        "kitaev" | "p_ip" => &["t", "delta", "mu"],
        "ssh" | "ssh_spinful" => &["v", "w"],
        "qwz" => &["u"],
        _ => return Err(Error::Config(format!("model.name: unknown model `{name}`"))),
    };
    if let Some(bad) = params.keys().find(|k| !known.contains(&k.as_str())) {
        return Err(Error::Config(format!("model.params.{bad}: not a parameter of `{name}`")));
    }
    let p = |k: &str, default: f64| params.get(k).copied().unwrap_or(default);
    Ok(match name {
        "kitaev" => kitaev_chain(p("t", 1.0), p("delta", 1.0), p("mu", 0.5)),
        "p_ip" => p_ip(p("t", 1.0), p("delta", 1.0), p("mu", 2.0)),
        "ssh" => ssh(p("v", 1.0), p("w", 2.0)),
        "ssh_spinful" => ssh(p("v", 1.0), p("w", 2.0)).with_spin(),
        _ => qwz(p("u", 1.0)),
    })
}

/// Finite truncation of Z^d: per-direction size, open flag and twist angle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Geometry {
    pub dims: Vec<usize>,
    pub open: Vec<bool>,
    pub twist: Vec<f64>,
}

impl Geometry {
    pub fn torus(dims: &[usize]) -> Self {
        Self { dims: dims.to_vec(), open: vec![false; dims.len()], twist: vec![0.0; dims.len()] }
    }

    /// Open in `direction` (0-based), periodic elsewhere.
    pub fn slab(dims: &[usize], direction: usize) -> Self {
        let mut g = Self::torus(dims);
        g.open[direction] = true;
        g
    }

    pub fn with_twist(mut self, twist: &[f64]) -> Self {
        self.twist = twist.to_vec();
        self
    }

    pub fn n_sites(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn site(&self, x: &[usize]) -> usize {
        if self.dims.len() == 1 {
            x[0]
        } else {
            x[0] + self.dims[0] * x[1]
        }
    }

    pub fn coords(&self, s: usize) -> Vec<usize> {
        if self.dims.len() == 1 {
            vec![s]
        } else {
            vec![s % self.dims[0], s / self.dims[0]]
        }
    }

    /// Periodic (or open) ∞-distance between two sites.
    pub fn distance(&self, a: usize, b: usize) -> usize {
        let (ca, cb) = (self.coords(a), self.coords(b));
        (0..self.dims.len())
            .map(|i| {
                let d = ca[i].abs_diff(cb[i]);
                if self.open[i] {
                    d
                } else {
                    d.min(self.dims[i] - d)
                }
            })
            .max()
            .unwrap_or(0)
    }
}

/// Boundary condition as exposed to configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundaryCondition {
    PeriodicTorus,
    Slab { direction: usize },
}

/// Per-site disorder values ω_y ∈ [−1, 1]^k, drawn from one seed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisorderConfig {
    pub dims: Vec<usize>,
    pub k: usize,
    /// Site-major, k values per site.
    pub omega: Vec<f64>,
    pub strength: f64,
    pub seed: u64,
}

impl DisorderConfig {
    pub fn clean(dims: &[usize], k: usize) -> Self {
        let n: usize = dims.iter().product();
        Self { dims: dims.to_vec(), k, omega: vec![0.0; n * k], strength: 0.0, seed: 0 }
    }

    pub fn sample(dims: &[usize], k: usize, strength: f64, seed: u64) -> Self {
        let n: usize = dims.iter().product();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let omega = (0..n * k).map(|_| rng.random_range(-1.0..=1.0)).collect();
        Self { dims: dims.to_vec(), k, omega, strength, seed }
    }

    pub fn value(&self, site: usize, comp: usize) -> f64 {
        self.omega[site * self.k + comp]
    }

    /// Restriction to the box [0, sub) of the same lattice coordinates.
    pub fn restrict(&self, sub: &[usize]) -> Self {
        let g = Geometry::torus(&self.dims);
        let gs = Geometry::torus(sub);
        let mut omega = Vec::with_capacity(gs.n_sites() * self.k);
        for s in 0..gs.n_sites() {
            let src = g.site(&gs.coords(s));
            omega.extend_from_slice(&self.omega[src * self.k..(src + 1) * self.k]);
        }
        Self { dims: sub.to_vec(), k: self.k, omega, strength: self.strength, seed: self.seed }
    }
}

/// (ω·x)_y = ω_{y+x} with periodic wrap.
pub fn translate_config(dis: &DisorderConfig, x: &[i64]) -> DisorderConfig {
    let g = Geometry::torus(&dis.dims);
    let mut omega = vec![0.0; dis.omega.len()];
    for s in 0..g.n_sites() {
        let c = g.coords(s);
        let shifted: Vec<usize> =
            (0..c.len()).map(|i| (c[i] as i64 + x[i]).rem_euclid(dis.dims[i] as i64) as usize).collect();
        let src = g.site(&shifted);
        omega[s * dis.k..(s + 1) * dis.k].copy_from_slice(&dis.omega[src * dis.k..(src + 1) * dis.k]);
    }
    DisorderConfig { omega, ..dis.clone() }
}

/// Assembles the Nambu Hamiltonian on a geometry. Wrapping hoppings pick up e^{−iθ} per
/// crossing, so ψ_{y+L} = e^{iθ} ψ_y and L = 1 reproduces H(θ).
pub fn assemble_geom(model: &LatticeModel, dis: &DisorderConfig, geom: &Geometry) -> CMat {
    assert_eq!(geom.dims.len(), model.d, "geometry dimension");
    assert_eq!(dis.dims, geom.dims, "disorder shape");
    let nw = model.dim_w();
    let ns = geom.n_sites();
    let mut h = linalg::zeros(ns * nw, ns * nw);
    let add = |h: &mut CMat, r: usize, c: usize, t: &CMat, z: faer::c64| {
        for i in 0..nw {
            for j in 0..nw {
                h[(r * nw + i, c * nw + j)] += t[(i, j)] * z;
            }
        }
    };
    for s in 0..ns {
        let y = geom.coords(s);
        for (x, t) in &model.hoppings {
            if *x == [0, 0] {
                add(&mut h, s, s, t, cx(1.0, 0.0));
                continue;
            }
            let mut target = vec![0usize; model.d];
            let mut phase = 0.0;
            let mut dropped = false;
            for i in 0..model.d {
                let raw = y[i] as i64 + x[i];
                let l = geom.dims[i] as i64;
                let wraps = raw.div_euclid(l);
                if wraps != 0 && geom.open[i] {
                    dropped = true;
                }
                phase -= geom.twist[i] * wraps as f64;
                target[i] = raw.rem_euclid(l) as usize;
            }
            if dropped {
                continue;
            }
            let z = cx(phase.cos(), phase.sin());
            let ts = geom.site(&target);
            add(&mut h, ts, s, t, z);
            add(&mut h, s, ts, &t.adjoint().to_owned(), z.conj());
        }
        if dis.strength != 0.0 {
            for (c, op) in model.disorder_ops.iter().enumerate() {
                let w = dis.strength * dis.value(s, c);
                add(&mut h, s, s, op, cx(w, 0.0));
            }
        }
    }
    h
}

pub fn geometry_for(model: &LatticeModel, dims: &[usize], bc: BoundaryCondition) -> Geometry {
    let _ = model;
    match bc {
        BoundaryCondition::PeriodicTorus => Geometry::torus(dims),
        BoundaryCondition::Slab { direction } => Geometry::slab(dims, direction),
    }
}

/// Structured Nambu Hamiltonian on the truncation selected by `bc`.
pub fn assemble(model: &LatticeModel, dis: &DisorderConfig, bc: BoundaryCondition) -> StructuredMatrix {
    let geom = geometry_for(model, &dis.dims, bc);
    let h = assemble_geom(model, dis, &geom);
    let ctx = std::sync::Arc::new(model.nambu.gamma.lift(geom.n_sites()));
    StructuredMatrix { m: h, ctx }
}

/// Indices of the V components in a site-major W layout.
pub fn v_indices(n_v: usize, sites: usize) -> Vec<usize> {
    (0..sites).flat_map(|x| (0..n_v).map(move |a| x * 2 * n_v + a)).collect()
}

/// V block of a charge-conserving Hamiltonian on W.
pub fn v_block(h: &CMat, n_v: usize) -> CMat {
    let idx = v_indices(n_v, h.nrows() / (2 * n_v));
    linalg::select(h, &idx, &idx)
}

/// u_x* H u_x computed by index permutation, so the result is bit-exact.
pub fn translate_operator(h: &CMat, geom: &Geometry, nw: usize, x: &[i64]) -> CMat {
    let ns = geom.n_sites();
    let shift: Vec<usize> = (0..ns)
        .map(|s| {
            let c = geom.coords(s);
            let t: Vec<usize> =
                (0..c.len()).map(|i| (c[i] as i64 + x[i]).rem_euclid(geom.dims[i] as i64) as usize).collect();
            geom.site(&t)
        })
        .collect();
    faer::Mat::from_fn(ns * nw, ns * nw, |r, c| h[(shift[r / nw] * nw + r % nw, shift[c / nw] * nw + c % nw)])
}

/// Bitwise equality of two matrices.
pub fn bit_equal(a: &CMat, b: &CMat) -> bool {
    a.nrows() == b.nrows()
        && a.ncols() == b.ncols()
        && (0..a.nrows()).all(|i| {
            (0..a.ncols()).all(|j| {
                a[(i, j)].re.to_bits() == b[(i, j)].re.to_bits() && a[(i, j)].im.to_bits() == b[(i, j)].im.to_bits()
            })
        })
}

/// J = −i sign(H).
pub fn flatten(h: &StructuredMatrix, gap_tol: f64) -> Result<StructuredMatrix> {
    Ok(flatten_with_gap(h, gap_tol)?.0)
}

/// J = −i sign(H) together with the gap of H. When H has no entries between the V and
/// V* components of a site-major Nambu layout, the two blocks are treated separately.
pub fn flatten_with_gap(h: &StructuredMatrix, gap_tol: f64) -> Result<(StructuredMatrix, f64)> {
    let n = h.dim();
    let per_site = per_site_dim(h);
    if let Some(n_v) = per_site.map(|d| d / 2).filter(|&n_v| n_v > 0 && charge_blocks_vanish(&h.m, n_v)) {
        let sites = n / (2 * n_v);
        let vi = v_indices(n_v, sites);
        let wi: Vec<usize> = vi.iter().map(|i| i + n_v).collect();
        let (sv, gv) = sign_and_gap(&linalg::select(&h.m, &vi, &vi), gap_tol)?;
        let (sw, gw) = sign_and_gap(&linalg::select(&h.m, &wi, &wi), gap_tol)?;
        let mut s = linalg::zeros(n, n);
        for a in 0..vi.len() {
            for b in 0..vi.len() {
                s[(vi[a], vi[b])] = sv[(a, b)];
                s[(wi[a], wi[b])] = sw[(a, b)];
            }
        }
        return Ok((h.with(scale(&s, -I)), gv.min(gw)));
    }
    let (s, g) = sign_and_gap(&h.m, gap_tol)?;
    Ok((h.with(scale(&s, -I)), g))
}

/// Per-site dimension of a lifted context I ⊗ G, read off from the first row of G.
fn per_site_dim(h: &StructuredMatrix) -> Option<usize> {
    let g = h.ctx.g();
    let n = g.nrows();
    // the Nambu G swaps V and V*: the first row has its entry at column n_v
    let col = (0..n).find(|&j| g[(0, j)] != ZERO)?;
    (col > 0 && n % (2 * col) == 0).then_some(2 * col)
}

fn charge_blocks_vanish(h: &CMat, n_v: usize) -> bool {
    let n = h.nrows();
    (0..n).all(|i| (0..n).all(|j| ((i % (2 * n_v)) < n_v) == ((j % (2 * n_v)) < n_v) || h[(i, j)] == ZERO))
}

fn sign_and_gap(h: &CMat, gap_tol: f64) -> Result<(CMat, f64)> {
    let res = structured::hermitian_residual(h);
    if res > structured::DEFAULT_TOL {
        return Err(Error::NotHermitian { residual: res });
    }
    let (vals, u) = linalg::eigh(&linalg::hermitian_part(h));
    let gap = vals.iter().fold(f64::INFINITY, |a, &x| a.min(x.abs()));
    if gap < gap_tol {
        return Err(Error::GapClosed { gap, tol: gap_tol });
    }
    let mut us = u.clone();
    for (c, &v) in vals.iter().enumerate() {
        if v < 0.0 {
            for r in 0..us.nrows() {
                us[(r, c)] = -us[(r, c)];
            }
        }
    }
    Ok((us * u.adjoint(), gap))
}

pub fn gap(h: &CMat) -> f64 {
    structured::min_abs_eig(h)
}

/// True iff every kernel block beyond distance R vanishes exactly.
pub fn controlled_check(h: &CMat, geom: &Geometry, nw: usize, r: usize) -> bool {
    let ns = geom.n_sites();
    for a in 0..ns {
        for b in 0..ns {
            if geom.distance(a, b) <= r {
                continue;
            }
            for i in 0..nw {
                for j in 0..nw {
                    if h[(a * nw + i, b * nw + j)] != ZERO {
                        return false;
                    }
                }
            }
        }
    }
    true
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    /// Decay length; 0 when the kernel is strictly local.
    pub xi: f64,
    pub prefactor: f64,
    pub r2: f64,
    /// (distance, max block norm) samples used.
    pub samples: Vec<(usize, f64)>,
    /// Kernel vanishes (below floor) beyond the fitted window.
    pub local: bool,
}

impl DecayFit {
    pub fn ok(&self) -> bool {
        self.local || (self.xi.is_finite() && self.xi > 0.0 && self.r2 > 0.95)
    }
}

pub const DECAY_FLOOR: f64 = 1e-13;

/// Least-squares fit of log max‖J(x, y)‖ against distance.
pub fn fit_profile(profile: &[(usize, f64)]) -> DecayFit {
    let samples: Vec<(usize, f64)> = profile.iter().copied().filter(|&(r, v)| r >= 2 && v > DECAY_FLOOR).collect();
    if samples.len() < 3 {
        return DecayFit { xi: 0.0, prefactor: 0.0, r2: 1.0, samples, local: true };
    }
    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|s| s.0 as f64).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 0.0 } else { sxy * sxy / (sxx * syy) };
    let xi = if slope < 0.0 { -1.0 / slope } else { f64::INFINITY };
    DecayFit { xi, prefactor: (my - slope * mx).exp(), r2, samples, local: false }
}

/// Max block norm of the kernel per distance, 0 ≤ r < L_min / 2.
pub fn kernel_profile(j: &CMat, geom: &Geometry, nw: usize) -> Vec<(usize, f64)> {
    let lmin = geom.dims.iter().zip(&geom.open).map(|(&l, &o)| if o { l } else { l / 2 }).min().unwrap_or(1);
    let mut best = vec![0.0f64; lmin];
    let ns = geom.n_sites();
    for a in 0..ns {
        for b in 0..ns {
            let r = geom.distance(a, b);
            if r >= lmin {
                continue;
            }
            let blk = j.submatrix(a * nw, b * nw, nw, nw);
            best[r] = best[r].max(blk.norm_l2());
        }
    }
    best.into_iter().enumerate().collect()
}

pub fn decay_fit(j: &CMat, geom: &Geometry, nw: usize) -> DecayFit {
    fit_profile(&kernel_profile(j, geom, nw))
}

/// Spectrum of the clean Kitaev chain on a ring of L sites.
pub fn kitaev_dispersion(t: f64, delta: f64, mu: f64, l: usize) -> Vec<f64> {
    let mut e: Vec<f64> = (0..l)
        .flat_map(|n| {
            let k = 2.0 * PI * n as f64 / l as f64;
            let v = ((2.0 * t * k.cos() + mu).powi(2) + (2.0 * delta * k.sin()).powi(2)).sqrt();
            [v, -v]
        })
        .collect();
    e.sort_by(f64::total_cmp);
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dist;

    #[test]
    fn single_site_is_onsite_block() {
        let h0 = real2(1.0, 0.0, 0.0, -1.0);
        let m = onsite("atom", SymmetryClass::D, 1, h0.clone());
        let h = assemble(&m, &DisorderConfig::clean(&[1], 0), BoundaryCondition::PeriodicTorus);
        assert!(bit_equal(&h.m, &h0));
    }

    #[test]
    fn kitaev_matches_dispersion() {
        let (t, d, mu) = (1.0, 0.7, 0.4);
        let m = kitaev_chain(t, d, mu);
        let h = assemble(&m, &DisorderConfig::clean(&[8], 1), BoundaryCondition::PeriodicTorus);
        let e = linalg::eigvalsh(&h.m);
        let oracle = kitaev_dispersion(t, d, mu, 8);
        for (a, b) in e.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn zero_strength_ignores_seed() {
        let m = kitaev_chain(1.0, 1.0, 0.5);
        let a = assemble(&m, &DisorderConfig::clean(&[10], 1), BoundaryCondition::PeriodicTorus);
        let b = assemble(&m, &DisorderConfig::sample(&[10], 1, 0.0, 42), BoundaryCondition::PeriodicTorus);
        assert!(bit_equal(&a.m, &b.m));
    }

    #[test]
    fn translate_identities() {
        let d = DisorderConfig::sample(&[5, 4], 1, 0.3, 9);
        assert_eq!(translate_config(&d, &[0, 0]), d);
        assert_eq!(translate_config(&translate_config(&d, &[2, -1]), &[-2, 1]), d);
    }

    #[test]
    fn nambu_reality_of_zoo() {
        for m in [kitaev_chain(1.0, 1.0, 0.5), ssh(1.0, 2.0), ssh(1.0, 2.0).with_spin()] {
            let dis = DisorderConfig::sample(&[6], m.disorder_dim(), 0.2, 3);
            let h = assemble(&m, &dis, BoundaryCondition::PeriodicTorus);
            let p = structured::check_predicates_tol(&h, 1e-12);
            assert!(p.is_imaginary && p.is_hermitian, "{}: {p:?}", m.name);
        }
        for m in [qwz(1.0), p_ip(1.0, 1.0, 2.0)] {
            let dis = DisorderConfig::sample(&[4, 4], m.disorder_dim(), 0.2, 3);
            let h = assemble(&m, &dis, BoundaryCondition::PeriodicTorus);
            let p = structured::check_predicates_tol(&h, 1e-12);
            assert!(p.is_imaginary && p.is_hermitian, "{}: {p:?}", m.name);
        }
    }

    #[test]
    fn twisted_single_cell_is_bloch() {
        let m = qwz(0.7);
        let geom = Geometry::torus(&[1, 1]).with_twist(&[0.3, -1.1]);
        let h = assemble_geom(&m, &DisorderConfig::clean(&[1, 1], 1), &geom);
        assert!(dist(&h, &m.bloch(&[0.3, -1.1])) < 1e-14);
    }

    #[test]
    fn gaps_of_zoo() {
        assert!((kitaev_chain(1.0, 1.0, 0.0).clean_gap(512) - 2.0).abs() < 1e-12);
        assert!(ssh(1.0, 1.0).clean_gap(512) < 1e-12);
        assert!(qwz(0.0).clean_gap(64) < 1e-12);
        assert!(qwz(1.0).clean_gap(64) > 0.5);
    }

    #[test]
    fn controlled_examples() {
        let m = kitaev_chain(1.0, 1.0, 0.5);
        let geom = Geometry::torus(&[8]);
        let h = assemble_geom(&m, &DisorderConfig::clean(&[8], 1), &geom);
        assert!(!controlled_check(&h, &geom, 2, 0));
        assert!(controlled_check(&h, &geom, 2, 1));
        let a = onsite("atom", SymmetryClass::D, 1, real2(1.0, 0.0, 0.0, -1.0));
        let ha = assemble_geom(&a, &DisorderConfig::clean(&[8], 0), &geom);
        assert!(controlled_check(&ha, &geom, 2, 0));
    }
}
