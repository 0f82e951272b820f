//! Half-space side: Szegő compression of a torus J onto a slab, edge censuses, the
//! chiral Toeplitz index, zero-mode parity, spectral flow on cylinders, and the
//! end-to-end bulk-boundary check.
//!
//! A torus of 2·L sites in the boundary direction is cut into a lower half [0, L) and an
//! upper half [L, 2L). The cut between them is the boundary studied: `plus` is the
//! right (high-coordinate) edge of the lower half, `minus` the left edge of the upper half.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::invariants::{self, InvariantReport};
use crate::lattice::{self, DecayFit, DisorderConfig, Geometry, LatticeModel};
use crate::linalg::{self, kron, CMat, I, ONE};
use crate::structured::StructuredMatrix;
use crate::symmetry::{self, build_physical, SymmetryClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Half {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Edge {
    Left,
    Right,
    Bulk,
}

impl Edge {
    pub fn label(self) -> &'static str {
        match self {
            Edge::Left => "left",
            Edge::Right => "right",
            Edge::Bulk => "bulk",
        }
    }
}

#[derive(Debug, Clone)]
pub struct HalfSpaceOperator {
    pub jhat: StructuredMatrix,
    /// Slab geometry of the half (open in `direction`).
    pub geom: Geometry,
    pub nw: usize,
    pub direction: usize,
    pub half: Half,
    pub defect_fit: DecayFit,
    pub real_residual: f64,
    pub skew_residual: f64,
}

/// Sites of the torus belonging to one half, in slab order.
pub fn half_sites(torus: &Geometry, direction: usize, half: Half) -> Vec<usize> {
    let l = torus.dims[direction] / 2;
    let off = if half == Half::Lower { 0 } else { l };
    (0..torus.n_sites()).filter(|&s| (off..off + l).contains(&torus.coords(s)[direction])).collect()
}

fn expand(sites: &[usize], nw: usize) -> Vec<usize> {
    sites.iter().flat_map(|&s| (0..nw).map(move |a| s * nw + a)).collect()
}

/// Distance of each slab site from the nearer edge along `direction`.
fn edge_distance(geom: &Geometry, direction: usize, s: usize) -> usize {
    let c = geom.coords(s)[direction];
    c.min(geom.dims[direction] - 1 - c)
}

/// Max row-block norm of a slab operator per distance from the boundary.
pub fn boundary_profile(m: &CMat, geom: &Geometry, nw: usize, direction: usize) -> Vec<(usize, f64)> {
    let half = geom.dims[direction] / 2;
    let mut best = vec![0.0f64; half.max(1)];
    for s in 0..geom.n_sites() {
        let n = edge_distance(geom, direction, s);
        if n >= best.len() {
            continue;
        }
        let row = m.submatrix(s * nw, 0, nw, m.ncols());
        best[n] = best[n].max(row.norm_l2());
    }
    best.into_iter().enumerate().collect()
}

/// Ĵ = qJq for the chosen half of a torus whose length along `direction` is 2L.
pub fn szego_compress(
    j: &StructuredMatrix,
    torus: &Geometry,
    nw: usize,
    direction: usize,
    half: Half,
    xi: f64,
) -> Result<HalfSpaceOperator> {
    let l = torus.dims[direction] / 2;
    if (l as f64) < 8.0 * xi {
        return Err(Error::SlabTooThin { l, xi });
    }
    let sites = half_sites(torus, direction, half);
    let idx = expand(&sites, nw);
    let m = linalg::select(&j.m, &idx, &idx);
    let per_site = j.ctx.g().submatrix(0, 0, nw, nw).to_owned();
    let ctx = Arc::new(crate::structured::RealStructure::new(per_site)?.lift(sites.len()));
    let mut dims = torus.dims.clone();
    dims[direction] = l;
    let geom = Geometry::slab(&dims, direction);
    let jhat = StructuredMatrix { m, ctx };
    let real_residual = linalg::op_norm(&(jhat.ctx.conj_mat(&jhat.m) - &jhat.m));
    let skew_residual = linalg::op_norm(&(&jhat.m + jhat.m.adjoint()));
    let n = jhat.dim();
    let defect = &jhat.m * &jhat.m + linalg::eye(n);
    let defect_fit = lattice::fit_profile(&boundary_profile(&defect, &geom, nw, direction));
    Ok(HalfSpaceOperator {
        jhat,
        geom,
        nw,
        direction,
        half,
        defect_fit,
        real_residual,
        skew_residual,
    })
}

/// Projection weights onto the quarter-slab nearest to each edge.
fn quarter_masks(geom: &Geometry, nw: usize, direction: usize) -> (Vec<bool>, Vec<bool>) {
    let l = geom.dims[direction];
    let q = (l / 4).max(1);
    let mut left = vec![false; geom.n_sites() * nw];
    let mut right = left.clone();
    for s in 0..geom.n_sites() {
        let c = geom.coords(s)[direction];
        for a in 0..nw {
            left[s * nw + a] = c < q;
            right[s * nw + a] = c >= l - q;
        }
    }
    (left, right)
}

fn weight(v: &CMat, col: usize, mask: &[bool]) -> f64 {
    (0..v.nrows()).filter(|&r| mask[r]).map(|r| v[(r, col)].norm_sqr()).sum()
}

/// Rotates a subspace so that its vectors are edge-localized where possible, by
/// diagonalizing P_right − P_left inside it.
fn localize(k: &CMat, left: &[bool], right: &[bool]) -> CMat {
    if k.ncols() == 0 {
        return k.clone();
    }
    let x = linalg::diag_real(&(0..k.nrows()).map(|r| (right[r] as i32 - left[r] as i32) as f64).collect::<Vec<_>>());
    let m = linalg::hermitian_part(&(k.adjoint() * x * k));
    let (_, u) = linalg::eigh(&m);
    k * u
}

/// Counts of localized vectors of a subspace at (left, right) edge.
fn edge_counts(k: &CMat, left: &[bool], right: &[bool]) -> (usize, usize) {
    let v = localize(k, left, right);
    let mut out = (0, 0);
    for c in 0..v.ncols() {
        if weight(&v, c, left) > 0.5 {
            out.0 += 1;
        } else if weight(&v, c, right) > 0.5 {
            out.1 += 1;
        }
    }
    out
}

/// Near-kernel threshold max(1e-6, 10·e^{−L/ξ}), capped at 0.5.
pub fn zero_threshold(l: usize, xi: f64) -> f64 {
    let t = if xi > 0.0 { 10.0 * (-(l as f64) / xi).exp() } else { 0.0 };
    t.max(1e-6).min(0.5)
}

#[derive(Debug, Clone, Serialize)]
pub struct ToeplitzReport {
    pub left: i64,
    pub right: i64,
    pub ker_u: usize,
    pub ker_u_star: usize,
    pub threshold: f64,
    pub smallest_singular: Vec<f64>,
}

/// Index of û, where ĴK₁ = [[0, û], [û*, 0]] over the K₁ = ±1 eigenspaces; each
/// near-kernel vector is attributed to the edge carrying most of its weight.
/// `k1` acts on one site of the space Ĵ acts on (the V block when `v_block` is set).
pub fn toeplitz_index(hso: &HalfSpaceOperator, k1: &CMat, v_block: Option<usize>, threshold: f64) -> Result<ToeplitzReport> {
    let (jm, nw) = match v_block {
        Some(n_v) => (lattice::v_block(&hso.jhat.m, n_v), n_v),
        None => (hso.jhat.m.clone(), hso.nw),
    };
    let sites = hso.geom.n_sites();
    let k = kron(&linalg::eye(sites), k1);
    let ac = linalg::op_norm(&linalg::anticomm(&jm, &k));
    if ac > 1e-8 {
        return Err(Error::NotChiral(format!("Ĵ does not anti-commute with K₁ (residual {ac:.2e})")));
    }
    let id = linalg::eye(sites);
    let bp = kron(&id, &linalg::eigenspace(k1, ONE, 1e-8));
    let bm = kron(&id, &linalg::eigenspace(k1, -ONE, 1e-8));
    let jk = &jm * &k;
    let u = bp.adjoint() * &jk * &bm;
    let svd = u.svd().map_err(|_| Error::InvalidStructure("svd failed".into()))?;
    let sv: Vec<f64> = (0..u.nrows().min(u.ncols())).map(|i| svd.S().column_vector()[i].re).collect();
    let (left_m, right_m) = quarter_masks(&hso.geom, nw, hso.direction);
    // ker û ⊂ K₁ = −1 (right singular vectors), ker û* ⊂ K₁ = +1 (left singular vectors)
    let small: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] < threshold).collect();
    let ker_u = &bm * linalg::columns(&svd.V().to_owned(), &small);
    let ker_us = &bp * linalg::columns(&svd.U().to_owned(), &small);
    let (lu, ru) = edge_counts(&ker_u, &left_m, &right_m);
    let (lus, rus) = edge_counts(&ker_us, &left_m, &right_m);
    let mut smallest = sv.clone();
    smallest.sort_by(f64::total_cmp);
    smallest.truncate(4);
    Ok(ToeplitzReport {
        left: lu as i64 - lus as i64,
        right: ru as i64 - rus as i64,
        ker_u: ker_u.ncols() + u.ncols().saturating_sub(u.nrows()),
        ker_u_star: ker_us.ncols() + u.nrows().saturating_sub(u.ncols()),
        threshold,
        smallest_singular: smallest,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ParityReport {
    pub left: usize,
    pub right: usize,
    pub threshold: f64,
}

/// Near-zero modes of iĴ counted per edge.
pub fn zero_mode_count(hso: &HalfSpaceOperator, threshold: f64) -> ParityReport {
    let h = linalg::hermitian_part(&linalg::scale(&hso.jhat.m, I));
    let (vals, u) = linalg::eigh(&h);
    let idx: Vec<usize> = (0..vals.len()).filter(|&i| vals[i].abs() < threshold).collect();
    let k = linalg::columns(&u, &idx);
    let (lm, rm) = quarter_masks(&hso.geom, hso.nw, hso.direction);
    let (left, right) = edge_counts(&k, &lm, &rm);
    ParityReport { left, right, threshold }
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeMode {
    pub energy: f64,
    pub edge: Edge,
    pub weight: f64,
    pub chirality: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeCensus {
    pub modes: Vec<EdgeMode>,
    pub slab_gap: f64,
    pub bulk_gap: f64,
    pub left: usize,
    pub right: usize,
}

impl EdgeCensus {
    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    fn merge(mut self, other: EdgeCensus) -> EdgeCensus {
        self.modes.extend(other.modes);
        self.slab_gap = self.slab_gap.min(other.slab_gap);
        self.left += other.left;
        self.right += other.right;
        self
    }
}

/// In-gap (|E| < bulk_gap / 2), boundary-localized (weight > 0.5) modes of a slab H.
pub fn edge_census(
    h: &CMat,
    geom: &Geometry,
    nw: usize,
    direction: usize,
    bulk_gap: f64,
    chiral: Option<&CMat>,
) -> EdgeCensus {
    let (vals, u) = linalg::eigh(&linalg::hermitian_part(h));
    let slab_gap = vals.iter().fold(f64::INFINITY, |a, &x| a.min(x.abs()));
    let idx: Vec<usize> = (0..vals.len()).filter(|&i| vals[i].abs() < 0.5 * bulk_gap).collect();
    let (lm, rm) = quarter_masks(geom, nw, direction);
    let v = localize(&linalg::columns(&u, &idx), &lm, &rm);
    let gamma = chiral.map(|c| kron(&linalg::eye(geom.n_sites()), c));
    let mut modes = vec![];
    let (mut left, mut right) = (0, 0);
    for c in 0..v.ncols() {
        let col = v.col(c).as_mat().to_owned();
        let (wl, wr) = (weight(&v, c, &lm), weight(&v, c, &rm));
        let edge = if wl > 0.5 {
            left += 1;
            Edge::Left
        } else if wr > 0.5 {
            right += 1;
            Edge::Right
        } else {
            continue;
        };
        let energy = (col.adjoint() * h * &col)[(0, 0)].re;
        let chirality = gamma.as_ref().map(|g| (col.adjoint() * g * &col)[(0, 0)].re);
        modes.push(EdgeMode { energy, edge, weight: wl.max(wr), chirality });
    }
    EdgeCensus { modes, slab_gap, bulk_gap, left, right }
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowReport {
    /// Signed zero crossings (upward = +1) of branches localized at each edge.
    pub left: i64,
    pub right: i64,
    pub crossings: usize,
}

/// Spectral flow through E = 0 of a closed family θ ↦ H(θ), θ ∈ [0, 2π), sampled at
/// half-integer steps; crossings are matched by eigenvector overlap.
pub fn spectral_flow(
    family: &dyn Fn(f64) -> CMat,
    steps: usize,
    geom: &Geometry,
    nw: usize,
    direction: usize,
    window: f64,
) -> FlowReport {
    let (lm, rm) = quarter_masks(geom, nw, direction);
    let sample = |i: usize| {
        let th = 2.0 * PI * (i as f64 + 0.5) / steps as f64;
        let (vals, u) = linalg::eigh(&linalg::hermitian_part(&family(th)));
        let idx: Vec<usize> = (0..vals.len()).filter(|&k| vals[k].abs() < window).collect();
        (idx.iter().map(|&k| vals[k]).collect::<Vec<f64>>(), linalg::columns(&u, &idx))
    };
    let mut prev = sample(0);
    let first = prev.clone();
    let (mut left, mut right, mut crossings) = (0i64, 0i64, 0usize);
    for i in 1..=steps {
        let cur = if i == steps { first.clone() } else { sample(i) };
        let ov = prev.1.adjoint() * &cur.1;
        for a in 0..prev.0.len() {
            let mut best = (0.0, usize::MAX);
            for b in 0..cur.0.len() {
                let o = ov[(a, b)].norm();
                if o > best.0 {
                    best = (o, b);
                }
            }
            if best.1 == usize::MAX || best.0 < 0.5 {
                continue;
            }
            let (ea, eb) = (prev.0[a], cur.0[best.1]);
            if ea.signum() == eb.signum() {
                continue;
            }
            crossings += 1;
            let dir = if eb > ea { 1 } else { -1 };
            let (wl, wr) = (weight(&prev.1, a, &lm), weight(&prev.1, a, &rm));
            if wl > 0.5 {
                left += dir;
            } else if wr > 0.5 {
                right += dir;
            }
        }
        prev = cur;
    }
    FlowReport { left, right, crossings }
}

/// Whether a half-space operator anti-commutes with the lifted pseudo-symmetries.
pub fn pseudo_residual(hso: &HalfSpaceOperator, class: SymmetryClass, n_v: usize) -> Result<f64> {
    let phys = build_physical(n_v, class)?;
    let ps = symmetry::pseudo_syms(class, &phys)?.lift(hso.geom.n_sites());
    Ok(symmetry::pseudo_residual(&hso.jhat.m, &ps))
}

/// Settings for one bulk-boundary evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct BbSettings {
    /// Slab length L; the torus has 2L sites along the boundary direction.
    pub l: usize,
    /// Transverse size for d = 2 (momenta when clean, sites when disordered).
    pub transverse: usize,
    pub gap_tol: f64,
    pub winding_steps: usize,
    pub flow_steps: usize,
}

impl Default for BbSettings {
    fn default() -> Self {
        Self { l: 60, transverse: 24, gap_tol: 1e-6, winding_steps: 64, flow_steps: 192 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BbPoint {
    pub model: String,
    pub class: SymmetryClass,
    pub params: std::collections::BTreeMap<String, f64>,
    pub seed: Option<u64>,
    pub strength: f64,
    pub bulk_gap: f64,
    pub xi: f64,
    pub flag: Option<String>,
    pub bulk: Option<InvariantReport>,
    pub edge_kind: &'static str,
    pub index_plus: Option<i64>,
    pub index_minus: Option<i64>,
    pub agree: Option<bool>,
    pub antisymmetric: Option<bool>,
    pub census: Option<EdgeCensus>,
    /// Zero invariant ⇒ slab gap ≥ bulk gap / 2 and empty census; nonzero ⇒ non-empty census.
    pub triviality_ok: Option<bool>,
}

impl BbPoint {
    pub fn gapped(&self) -> bool {
        self.flag.is_none()
    }
}

fn empty_point(model: &LatticeModel, dis: &DisorderConfig, edge_kind: &'static str) -> BbPoint {
    BbPoint {
        model: model.name.clone(),
        class: model.class,
        params: model.params.clone(),
        seed: (dis.strength != 0.0).then_some(dis.seed),
        strength: dis.strength,
        bulk_gap: 0.0,
        xi: 0.0,
        flag: None,
        bulk: None,
        edge_kind,
        index_plus: None,
        index_minus: None,
        agree: None,
        antisymmetric: None,
        census: None,
        triviality_ok: None,
    }
}

fn triviality(nontrivial: bool, census: &EdgeCensus) -> bool {
    if nontrivial {
        !census.is_empty()
    } else {
        census.is_empty() && census.slab_gap >= 0.5 * census.bulk_gap
    }
}

/// Bulk invariant versus boundary observable for one model and disorder draw.
/// `dis` lives on the torus: 2L sites for d = 1, transverse × 2L for disordered d = 2.
pub fn bb_check(model: &LatticeModel, dis: &DisorderConfig, settings: &BbSettings) -> Result<BbPoint> {
    match model.d {
        1 => bb_check_1d(model, dis, settings),
        _ => bb_check_2d(model, dis, settings),
    }
}

fn bb_check_1d(model: &LatticeModel, dis: &DisorderConfig, st: &BbSettings) -> Result<BbPoint> {
    let chiral = invariants::chiral_operator(model).ok();
    let d_class = model.class == SymmetryClass::D;
    let edge_kind = if d_class { "zero_mode_parity" } else { "toeplitz_index" };
    let mut pt = empty_point(model, dis, edge_kind);
    let torus = Geometry::torus(&dis.dims);
    let h = lattice::assemble(model, dis, lattice::BoundaryCondition::PeriodicTorus);
    let j = match lattice::flatten_with_gap(&h, st.gap_tol) {
        Ok((j, gap)) => {
            pt.bulk_gap = gap;
            j
        }
        Err(Error::GapClosed { gap, .. }) => {
            pt.bulk_gap = gap;
            pt.flag = Some("gapless".into());
            return Ok(pt);
        }
        Err(e) => return Err(e),
    };
    let fit = lattice::decay_fit(&j.m, &torus, model.dim_w());
    pt.xi = if fit.local { 0.0 } else { fit.xi };
    let l = dis.dims[0] / 2;
    let lower = match szego_compress(&j, &torus, model.dim_w(), 0, Half::Lower, pt.xi) {
        Ok(x) => x,
        Err(Error::SlabTooThin { .. }) => {
            pt.flag = Some("slab_too_thin".into());
            return Ok(pt);
        }
        Err(e) => return Err(e),
    };
    let upper = szego_compress(&j, &torus, model.dim_w(), 0, Half::Upper, pt.xi)?;
    let thr = zero_threshold(l, pt.xi);
    let bulk = if d_class {
        if dis.strength == 0.0 {
            invariants::pfaffian_z2(model)?
        } else {
            invariants::pfaffian_z2_disordered(model, dis)?
        }
    } else if dis.strength == 0.0 {
        invariants::winding_1d(model, 512)?
    } else {
        invariants::winding_disordered(model, dis, st.winding_steps)?
    };
    let nontrivial = bulk.nontrivial();
    if d_class {
        let p = zero_mode_count(&lower, thr);
        let m = zero_mode_count(&upper, thr);
        pt.index_plus = Some((p.right % 2) as i64);
        pt.index_minus = Some((m.left % 2) as i64);
        pt.agree = Some(nontrivial == (p.right % 2 == 1));
        pt.antisymmetric = Some((p.right + m.left) % 2 == 0);
    } else {
        let (k1, on_v) = chiral.ok_or_else(|| Error::NotChiral(model.name.clone()))?;
        let vb = on_v.then_some(model.n_v());
        let p = toeplitz_index(&lower, &k1, vb, thr)?;
        let m = toeplitz_index(&upper, &k1, vb, thr)?;
        pt.index_plus = Some(p.right);
        pt.index_minus = Some(m.left);
        pt.agree = Some(bulk.value == p.right);
        pt.antisymmetric = Some(p.right + m.left == 0);
    }
    // pipeline (b): slab Hamiltonian on the lower half with the same disorder
    let sub = dis.restrict(&[l]);
    let slab_geom = Geometry::slab(&[l], 0);
    let hs = lattice::assemble_geom(model, &sub, &slab_geom);
    let census = edge_census(&hs, &slab_geom, model.dim_w(), 0, pt.bulk_gap, None);
    pt.triviality_ok = Some(triviality(nontrivial, &census));
    pt.census = Some(census);
    pt.bulk = Some(bulk);
    Ok(pt)
}

/// Cylinder Hamiltonian (open in y, L sites) at transverse momentum/twist θ on the space
/// where the Chern number lives.
fn cylinder(model: &LatticeModel, dis: &DisorderConfig, lx: usize, l: usize, theta: f64) -> (CMat, usize) {
    let geom = Geometry::slab(&[lx, l], 1).with_twist(&[theta, 0.0]);
    let h = lattice::assemble_geom(model, dis, &geom);
    if model.charge_conserving {
        (lattice::v_block(&h, model.n_v()), model.n_v())
    } else {
        (h, model.dim_w())
    }
}

fn bb_check_2d(model: &LatticeModel, dis: &DisorderConfig, st: &BbSettings) -> Result<BbPoint> {
    let mut pt = empty_point(model, dis, "spectral_flow");
    let clean = dis.strength == 0.0;
    let l = st.l;
    let (bulk, bulk_gap) = if clean {
        let gap = model.clean_gap(st.transverse.max(48));
        if gap < st.gap_tol {
            pt.flag = Some("gapless".into());
            return Ok(pt);
        }
        (invariants::chern_2d(model, 24)?, gap)
    } else {
        let h = lattice::assemble_geom(model, dis, &Geometry::torus(&dis.dims));
        let gap = lattice::gap(&h);
        if gap < st.gap_tol {
            pt.flag = Some("gapless".into());
            pt.bulk_gap = gap;
            return Ok(pt);
        }
        (invariants::bott_index(model, dis, st.gap_tol)?, gap)
    };
    pt.bulk_gap = bulk_gap;
    let (lx, sub) = if clean {
        (1, DisorderConfig::clean(&[1, l], model.disorder_dim()))
    } else {
        (dis.dims[0], dis.restrict(&[dis.dims[0], l]))
    };
    let geom = Geometry::slab(&[lx, l], 1);
    let nw = if model.charge_conserving { model.n_v() } else { model.dim_w() };
    let family = |th: f64| cylinder(model, &sub, lx, l, th).0;
    let steps = if clean { st.flow_steps } else { st.flow_steps.min(64) };
    let flow = spectral_flow(&family, steps, &geom, nw, 1, 0.5 * bulk_gap);
    pt.index_plus = Some(flow.right);
    pt.index_minus = Some(flow.left);
    pt.agree = Some(bulk.value.abs() == flow.right.abs() && bulk.value.abs() == flow.left.abs());
    pt.antisymmetric = Some(flow.right + flow.left == 0);
    let momenta: Vec<f64> = if clean {
        (0..st.transverse).map(|n| 2.0 * PI * n as f64 / st.transverse as f64).collect()
    } else {
        vec![0.0]
    };
    let mut census: Option<EdgeCensus> = None;
    for th in momenta {
        let (h, nw) = cylinder(model, &sub, lx, l, th);
        let c = edge_census(&h, &geom, nw, 1, bulk_gap, None);
        census = Some(match census {
            None => c,
            Some(acc) => acc.merge(c),
        });
    }
    let census = census.expect("at least one momentum");
    pt.triviality_ok = Some(triviality(bulk.nontrivial(), &census));
    pt.census = Some(census);
    pt.bulk = Some(bulk);
    Ok(pt)
}

/// (index₊, index₋) on the two sides of the cut of a 1D torus.
pub fn left_right_compare(model: &LatticeModel, dis: &DisorderConfig, settings: &BbSettings) -> Result<(i64, i64)> {
    let p = bb_check(model, dis, settings)?;
    match (p.index_plus, p.index_minus) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(Error::GapClosed { gap: p.bulk_gap, tol: settings.gap_tol }),
    }
}
