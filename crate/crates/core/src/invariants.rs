//! Bulk invariants: winding, plaquette Chern number, Pfaffian parity and Bott index,
//! plus the KR-of-torus bookkeeping and homotopy probes along model paths.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use faer::c64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{self, DisorderConfig, Geometry, LatticeModel};
use crate::linalg::{self, cx, kron, CMat, I, ONE, ZERO};
use crate::structured;
use crate::symmetry::{build_physical, SymmetryClass};

/// Residual above which a report is marked indeterminate.
pub const INDETERMINATE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InvariantKind {
    Winding,
    Chern,
    PfaffianZ2,
    Bott,
}

impl InvariantKind {
    pub fn label(self) -> &'static str {
        match self {
            InvariantKind::Winding => "winding",
            InvariantKind::Chern => "chern",
            InvariantKind::PfaffianZ2 => "pfaffian_z2",
            InvariantKind::Bott => "bott",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantReport {
    pub kind: InvariantKind,
    pub value: i64,
    pub raw: f64,
    pub residual: f64,
    pub indeterminate: bool,
    pub model: String,
    pub class: SymmetryClass,
    pub params: BTreeMap<String, f64>,
    pub seed: Option<u64>,
}

impl InvariantReport {
    fn new(kind: InvariantKind, raw: f64, model: &LatticeModel, seed: Option<u64>) -> Self {
        let value = raw.round();
        let residual = (raw - value).abs();
        Self {
            kind,
            value: value as i64,
            raw,
            residual,
            indeterminate: residual >= INDETERMINATE,
            model: model.name.clone(),
            class: model.class,
            params: model.params.clone(),
            seed,
        }
    }

    /// Topologically non-trivial value (−1 for the Pfaffian sign, nonzero otherwise).
    pub fn nontrivial(&self) -> bool {
        match self.kind {
            InvariantKind::PfaffianZ2 => self.value == -1,
            _ => self.value != 0,
        }
    }
}

/// Chiral operator on the first-quantized space of the model (V when charge is
/// conserved, W otherwise) and whether that space is V.
pub fn chiral_operator(model: &LatticeModel) -> Result<(CMat, bool)> {
    let phys = build_physical(model.n_v(), model.class)?;
    if model.charge_conserving {
        if let Some(s) = phys.s_v {
            return Ok((s, true));
        }
    } else if let (Some(t), SymmetryClass::DIII) = (&phys.t, model.class) {
        return Ok((linalg::scale(&(t * phys.g().conjugate()), I), false));
    } else if let Some(s) = phys.s {
        return Ok((s, false));
    }
    Err(Error::NotChiral(format!("{} in class {}", model.name, model.class)))
}

/// Lower-left block P₋ h P₊ in the chiral eigenbasis.
fn chiral_block(h: &CMat, bp: &CMat, bm: &CMat) -> CMat {
    bm.adjoint() * h * bp
}

/// Total phase of det f(θ) over θ ∈ [0, 2π], subdividing steps whose phase jump is large.
pub fn det_phase_winding(f: &dyn Fn(f64) -> CMat, steps: usize) -> Result<f64> {
    fn det(m: &CMat) -> c64 {
        m.determinant()
    }
    fn seg(f: &dyn Fn(f64) -> CMat, a: f64, b: f64, da: c64, db: c64, depth: usize) -> Result<f64> {
        if da.norm() == 0.0 || db.norm() == 0.0 {
            return Err(Error::GapClosed { gap: 0.0, tol: 0.0 });
        }
        let step = (db / da).arg();
        if step.abs() < 0.5 || depth == 0 {
            return Ok(step);
        }
        let m = 0.5 * (a + b);
        let dm = det(&f(m));
        Ok(seg(f, a, m, da, dm, depth - 1)? + seg(f, m, b, dm, db, depth - 1)?)
    }
    let thetas: Vec<f64> = (0..=steps).map(|i| 2.0 * PI * i as f64 / steps as f64).collect();
    let dets: Vec<c64> = thetas.iter().map(|&t| det(&f(t))).collect();
    let mut total = 0.0;
    for i in 0..steps {
        total += seg(f, thetas[i], thetas[i + 1], dets[i], dets[i + 1], 20)?;
    }
    Ok(total / (2.0 * PI))
}

fn chiral_bases(gamma: &CMat) -> (CMat, CMat) {
    (linalg::eigenspace(gamma, ONE, 1e-8), linalg::eigenspace(gamma, -ONE, 1e-8))
}

/// Clean 1D winding number of the chiral block over the Brillouin circle.
pub fn winding_1d(model: &LatticeModel, k_points: usize) -> Result<InvariantReport> {
    let (gamma, on_v) = chiral_operator(model)?;
    let gap = model.clean_gap(k_points);
    if gap < 1e-8 {
        return Err(Error::GapClosed { gap, tol: 1e-8 });
    }
    let (bp, bm) = chiral_bases(&gamma);
    let f = |k: f64| {
        let h = if on_v { model.bloch_v(&[k]) } else { model.bloch(&[k]) };
        chiral_block(&h, &bp, &bm)
    };
    let raw = det_phase_winding(&f, k_points)?;
    Ok(InvariantReport::new(InvariantKind::Winding, raw, model, None))
}

/// Winding of a disordered ring: det phase of the chiral block of the twisted supercell.
pub fn winding_disordered(model: &LatticeModel, dis: &DisorderConfig, steps: usize) -> Result<InvariantReport> {
    let (gamma, on_v) = chiral_operator(model)?;
    let l = dis.dims[0];
    if l < 2 * model.range().max(1) {
        return Err(Error::DimensionMismatch { expected: 2 * model.range().max(1), got: l });
    }
    let (bp1, bm1) = chiral_bases(&gamma);
    let (bp, bm) = (kron(&linalg::eye(l), &bp1), kron(&linalg::eye(l), &bm1));
    let h_at = |theta: f64| {
        let geom = Geometry::torus(&[l]).with_twist(&[theta]);
        let h = lattice::assemble_geom(model, dis, &geom);
        if on_v {
            lattice::v_block(&h, model.n_v())
        } else {
            h
        }
    };
    let (h0, h_half, h_pi) = (h_at(0.0), h_at(0.5 * PI), h_at(PI));
    let gap = lattice::gap(&h0);
    if gap < 1e-8 {
        return Err(Error::GapClosed { gap, tol: 1e-8 });
    }
    // each bond wraps at most once, so H(θ) = A + e^{−iθ}B + e^{iθ}B*
    let a = linalg::scale_re(&(&h0 + &h_pi), 0.5);
    let b = linalg::scale_re(&(linalg::scale_re(&(&h0 - &h_pi), 0.5) + linalg::scale(&(&h_half - &a), I)), 0.5);
    let (ab, bb, cb) = (chiral_block(&a, &bp, &bm), chiral_block(&b, &bp, &bm), chiral_block(&b.adjoint().to_owned(), &bp, &bm));
    let f = |t: f64| {
        let z = cx(t.cos(), -t.sin());
        &ab + linalg::scale(&bb, z) + linalg::scale(&cb, z.conj())
    };
    let raw = det_phase_winding(&f, steps)?;
    Ok(InvariantReport::new(InvariantKind::Winding, raw, model, Some(dis.seed)))
}

/// Pfaffian of a skew-symmetric matrix by Parlett-Reid elimination with pivoting.
pub fn pfaffian(a: &CMat) -> c64 {
    let n = a.nrows();
    if n % 2 == 1 {
        return ZERO;
    }
    let mut m = a.clone();
    let mut pf = ONE;
    let mut k = 0;
    while k + 1 < n {
        // pivot: largest entry in column k below the diagonal
        let mut p = k + 1;
        let mut best = m[(k + 1, k)].norm();
        for i in k + 2..n {
            if m[(i, k)].norm() > best {
                best = m[(i, k)].norm();
                p = i;
            }
        }
        if p != k + 1 {
            swap_sym(&mut m, k + 1, p);
            pf = -pf;
        }
        let piv = m[(k, k + 1)];
        if piv == ZERO {
            return ZERO;
        }
        pf *= piv;
        // eliminate the rest of row/column k with the 2×2 pivot block
        if k + 2 < n {
            let tau: Vec<c64> = (k + 2..n).map(|i| m[(k, i)] / piv).collect();
            let col: Vec<c64> = (k + 2..n).map(|i| m[(i, k + 1)]).collect();
            for ii in 0..tau.len() {
                for jj in 0..tau.len() {
                    m[(k + 2 + ii, k + 2 + jj)] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
        k += 2;
    }
    pf
}

fn swap_sym(m: &mut CMat, a: usize, b: usize) {
    let n = m.nrows();
    for j in 0..n {
        let t = m[(a, j)];
        m[(a, j)] = m[(b, j)];
        m[(b, j)] = t;
    }
    for i in 0..n {
        let t = m[(i, a)];
        m[(i, a)] = m[(i, b)];
        m[(i, b)] = t;
    }
}

/// Pfaffian by expansion along the first row (reference implementation, small n).
pub fn pfaffian_expansion(a: &CMat) -> c64 {
    let n = a.nrows();
    if n == 0 {
        return ONE;
    }
    if n % 2 == 1 {
        return ZERO;
    }
    let mut total = ZERO;
    for j in 1..n {
        let keep: Vec<usize> = (1..n).filter(|&i| i != j).collect();
        let minor = linalg::select(a, &keep, &keep);
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        total += a[(0, j)] * pfaffian_expansion(&minor) * sign;
    }
    total
}

/// Majorana change of basis per site: Ω = (1/√2)[[1, 1], [−i, i]] ⊗ 1_V.
pub fn majorana_basis(n_v: usize, sites: usize) -> CMat {
    let s = 1.0 / 2f64.sqrt();
    let omega = linalg::from_rows(&[&[cx(s, 0.0), cx(s, 0.0)], &[cx(0.0, -s), cx(0.0, s)]]);
    kron(&linalg::eye(sites), &kron(&omega, &linalg::eye(n_v)))
}

/// −iΩHΩ*, real and skew for a BdG Hamiltonian.
pub fn majorana_form(h: &CMat, n_v: usize) -> Result<CMat> {
    let sites = h.nrows() / (2 * n_v);
    let om = majorana_basis(n_v, sites);
    let a = linalg::scale(&(&om * h * om.adjoint()), -I);
    let skew = linalg::max_abs(&(&a + a.transpose()));
    let imag = (0..a.nrows())
        .flat_map(|i| (0..a.ncols()).map(move |j| (i, j)))
        .map(|(i, j)| a[(i, j)].im.abs())
        .fold(0.0, f64::max);
    let res = skew.max(imag);
    if res > 1e-10 {
        return Err(Error::NotSkew { residual: res });
    }
    Ok(a)
}

fn pf_sign_product(a0: &CMat, a1: &CMat) -> (f64, f64) {
    let (p0, p1) = (pfaffian(a0), pfaffian(a1));
    let prod = p0 * p1;
    let raw = prod.re.signum();
    let residual = if prod.norm() == 0.0 { 1.0 } else { prod.im.abs() / prod.norm() };
    (raw, residual)
}

/// sign(Pf H̃(0) · Pf H̃(π)) for a clean class-D chain.
pub fn pfaffian_z2(model: &LatticeModel) -> Result<InvariantReport> {
    if model.class != SymmetryClass::D || model.d != 1 {
        return Err(Error::InvalidClass(format!("pfaffian_z2 needs a class D chain, got {}", model.class)));
    }
    let a0 = majorana_form(&model.bloch(&[0.0]), model.n_v())?;
    let a1 = majorana_form(&model.bloch(&[PI]), model.n_v())?;
    let (raw, residual) = pf_sign_product(&a0, &a1);
    let mut rep = InvariantReport::new(InvariantKind::PfaffianZ2, raw, model, None);
    rep.residual = residual;
    rep.indeterminate = residual >= INDETERMINATE || raw == 0.0;
    Ok(rep)
}

/// Disordered ring: Pfaffian signs of the periodic and antiperiodic supercells.
pub fn pfaffian_z2_disordered(model: &LatticeModel, dis: &DisorderConfig) -> Result<InvariantReport> {
    let l = dis.dims[0];
    let h = |theta: f64| lattice::assemble_geom(model, dis, &Geometry::torus(&[l]).with_twist(&[theta]));
    let (h0, h1) = (h(0.0), h(PI));
    let gap = lattice::gap(&h0).min(lattice::gap(&h1));
    if gap < 1e-8 {
        return Err(Error::GapClosed { gap, tol: 1e-8 });
    }
    let a0 = majorana_form(&h0, model.n_v())?;
    let a1 = majorana_form(&h1, model.n_v())?;
    let (raw, residual) = pf_sign_product(&a0, &a1);
    let mut rep = InvariantReport::new(InvariantKind::PfaffianZ2, raw, model, Some(dis.seed));
    rep.residual = residual;
    rep.indeterminate = residual >= INDETERMINATE || raw == 0.0;
    Ok(rep)
}

/// Bloch matrix on the space where the Chern number is evaluated (V if charge conserving).
fn chern_bloch(model: &LatticeModel, k: &[f64]) -> CMat {
    if model.charge_conserving {
        model.bloch_v(k)
    } else {
        model.bloch(k)
    }
}

/// Occupied (negative-energy) eigenvectors.
fn occupied(h: &CMat) -> (CMat, f64) {
    let (vals, u) = linalg::eigh(&linalg::hermitian_part(h));
    let idx: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] < 0.0).collect();
    let gap = vals.iter().fold(f64::INFINITY, |a, &x| a.min(x.abs()));
    (linalg::columns(&u, &idx), gap)
}

/// Lattice field strength of the occupied bands, summed over a grid × grid torus.
/// Orientation: agrees with (1/2πi)∫Tr(P[∂ₓP, ∂ᵧP]) for the occupied projector P.
pub fn chern_2d(model: &LatticeModel, grid: usize) -> Result<InvariantReport> {
    if model.d != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: model.d });
    }
    let step = 2.0 * PI / grid as f64;
    let mut states = Vec::with_capacity(grid * grid);
    let mut gap = f64::INFINITY;
    for iy in 0..grid {
        for ix in 0..grid {
            let (v, g) = occupied(&chern_bloch(model, &[ix as f64 * step, iy as f64 * step]));
            gap = gap.min(g);
            states.push(v);
        }
    }
    if gap < 1e-8 {
        return Err(Error::GapClosed { gap, tol: 1e-8 });
    }
    let at = |ix: usize, iy: usize| &states[(iy % grid) * grid + (ix % grid)];
    let link = |a: &CMat, b: &CMat| {
        let d = (a.adjoint() * b).determinant();
        d / d.norm()
    };
    let mut total = 0.0;
    for iy in 0..grid {
        for ix in 0..grid {
            let u1 = link(at(ix, iy), at(ix + 1, iy));
            let u2 = link(at(ix + 1, iy), at(ix + 1, iy + 1));
            let u3 = link(at(ix, iy + 1), at(ix + 1, iy + 1));
            let u4 = link(at(ix, iy), at(ix, iy + 1));
            total += (u1 * u2 * u3.conj() * u4.conj()).arg();
        }
    }
    let raw = total / (2.0 * PI);
    Ok(InvariantReport::new(InvariantKind::Chern, raw, model, None))
}

/// Bott index of the negative spectral projection of i·J on a 2D torus.
/// `nw` is the internal dimension per site of the space J acts on.
pub fn bott_index_raw(j: &CMat, geom: &Geometry, nw: usize) -> Result<f64> {
    if geom.dims.len() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: geom.dims.len() });
    }
    let h = linalg::hermitian_part(&linalg::scale(j, I));
    let (vals, u) = linalg::eigh(&h);
    let gap = vals.iter().fold(f64::INFINITY, |a, &x| a.min(x.abs()));
    if gap < 1e-8 {
        return Err(Error::GapClosed { gap, tol: 1e-8 });
    }
    let idx: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] < 0.0).collect();
    let b = linalg::columns(&u, &idx);
    let n = geom.n_sites() * nw;
    let phases = |axis: usize| -> Vec<c64> {
        (0..n)
            .map(|r| {
                let c = geom.coords(r / nw);
                let a = 2.0 * PI * c[axis] as f64 / geom.dims[axis] as f64;
                cx(a.cos(), a.sin())
            })
            .collect()
    };
    let compress = |ph: &[c64]| {
        let mut eb = b.clone();
        for r in 0..n {
            for c in 0..eb.ncols() {
                eb[(r, c)] *= ph[r];
            }
        }
        linalg::polar_unitary(&(b.adjoint() * eb))
    };
    let ux = compress(&phases(0));
    let uy = compress(&phases(1));
    let w = &ux * &uy * ux.adjoint() * uy.adjoint();
    let eig = w.eigenvalues().map_err(|_| Error::InvalidStructure("eigenvalues failed".into()))?;
    let total: f64 = eig.iter().map(|z| z.arg()).sum();
    Ok(total / (2.0 * PI))
}

/// Bott index of a flattened J on a torus; charge-conserving models use the V block.
pub fn bott_index(model: &LatticeModel, dis: &DisorderConfig, gap_tol: f64) -> Result<InvariantReport> {
    let geom = Geometry::torus(&dis.dims);
    let h = lattice::assemble_geom(model, dis, &geom);
    let (h, nw) = if model.charge_conserving { (lattice::v_block(&h, model.n_v()), model.n_v()) } else { (h, model.dim_w()) };
    let j = linalg::scale(&structured::sign_matrix(&h, gap_tol)?, -I);
    let raw = bott_index_raw(&j, &geom, nw)?;
    Ok(InvariantReport::new(InvariantKind::Bott, raw, model, Some(dis.seed)))
}

/// Point groups KO_n, n mod 8.
pub const KO_POINT: [&str; 8] = ["Z", "Z2", "Z2", "0", "Z", "0", "0", "0"];

#[derive(Debug, Clone, Serialize)]
pub struct KrSummand {
    pub multiplicity: u64,
    pub degree: usize,
    pub group: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct KrGroupTable {
    pub d: usize,
    pub shift: usize,
    pub decomposition: Vec<KrSummand>,
}

impl KrGroupTable {
    /// The strong (i = d) summand.
    pub fn strong(&self) -> &KrSummand {
        self.decomposition.last().expect("non-empty decomposition")
    }
}

fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// ⊕_{i=0}^{d} C(d, i)·KO_{s−r+2−i}.
pub fn expected_group(d: usize, r: usize, s: usize) -> KrGroupTable {
    let shift = (s as i64 - r as i64 + 2).rem_euclid(8) as usize;
    let decomposition = (0..=d)
        .map(|i| {
            let degree = (shift as i64 - i as i64).rem_euclid(8) as usize;
            KrSummand { multiplicity: binomial(d, i), degree, group: KO_POINT[degree] }
        })
        .collect();
    KrGroupTable { d, shift, decomposition }
}

/// Rank over Z of the complex K-group of the d-torus in either degree.
pub fn complex_rank(d: usize) -> u64 {
    if d == 0 {
        1
    } else {
        1u64 << (d - 1)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbePoint {
    pub t: f64,
    pub gap: f64,
    pub gapless: bool,
    pub value: Option<i64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HomotopyReport {
    pub points: Vec<ProbePoint>,
    /// Indices i where the value differs between consecutive gapped points.
    pub changes: Vec<usize>,
    /// Every change is bracketed by a gap closing (flagged point or located minimum).
    pub changes_explained: bool,
}

/// Evaluates an invariant along t ∈ [0, 1] in `steps` intervals.
pub fn homotopy_probe(
    path: &dyn Fn(f64) -> LatticeModel,
    steps: usize,
    gap_tol: f64,
    invariant: &dyn Fn(&LatticeModel) -> Result<InvariantReport>,
) -> HomotopyReport {
    let grid = |m: &LatticeModel| if m.d == 1 { 512 } else { 48 };
    let points: Vec<ProbePoint> = (0..=steps)
        .map(|i| {
            let t = i as f64 / steps as f64;
            let m = path(t);
            let gap = m.clean_gap(grid(&m));
            let gapless = gap < gap_tol;
            let value = if gapless { None } else { invariant(&m).ok().filter(|r| !r.indeterminate).map(|r| r.value) };
            ProbePoint { t, gap, gapless, value }
        })
        .collect();
    let gapped: Vec<usize> = (0..points.len()).filter(|&i| points[i].value.is_some()).collect();
    let mut changes = vec![];
    let mut explained = true;
    for w in gapped.windows(2) {
        let (a, b) = (w[0], w[1]);
        if points[a].value != points[b].value {
            changes.push(b);
            let flagged = (a + 1..b).any(|i| points[i].gapless);
            if !flagged {
                // look for a closing between the samples
                let (mut lo, mut hi) = (points[a].t, points[b].t);
                for _ in 0..60 {
                    let m1 = lo + (hi - lo) / 3.0;
                    let m2 = hi - (hi - lo) / 3.0;
                    if path(m1).clean_gap(grid(&path(m1))) < path(m2).clean_gap(grid(&path(m2))) {
                        hi = m2;
                    } else {
                        lo = m1;
                    }
                }
                let m = path(0.5 * (lo + hi));
                if m.clean_gap(grid(&m)) >= gap_tol.max(1e-3) {
                    explained = false;
                }
            }
        }
    }
    HomotopyReport { points, changes, changes_explained: explained }
}
