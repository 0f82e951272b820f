//! End-to-end acceptance suite. Each test prints one PASS/FAIL line to stderr
//! (bypassing the harness capture) and then asserts.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;
use std::time::{Duration, Instant};

use faer::c64;
use tenfold::boundary::{self, BbPoint, BbSettings};
use tenfold::clifford::{self, Extension};
use tenfold::experiment::{self, ExperimentConfig};
use tenfold::invariants;
use tenfold::lattice::{self, DisorderConfig, Geometry, LatticeModel};
use tenfold::linalg::{self, dist, I};
use tenfold::structured;
use tenfold::symmetry::{self, ALL_CLASSES};

fn report(n: usize, name: &str, ok: bool, detail: &str, elapsed: Duration) {
    let status = if ok { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "acceptance {n:>2} {status} {name} ({:.1} s): {detail}", elapsed.as_secs_f64());
}

fn grid(a: f64, b: f64, step: f64) -> Vec<f64> {
    let n = ((b - a) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| ((a + i as f64 * step) * 1e9).round() / 1e9).collect()
}

#[test]
fn c01_clifford_suite() {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    let mut all_pass = true;
    for r in 0..=8 {
        for s in 0..=(8 - r) {
            let rep = clifford::standard_rep(r, s).unwrap();
            let rr = clifford::verify_rep(&rep);
            all_pass &= rr.pass;
            worst = worst.max(rr.max_residual);
        }
    }
    let c11 = clifford::standard_rep(1, 1).unwrap();
    let seed_exact = c11.k[0] == linalg::pauli(1) && c11.j[0] == linalg::scale(&linalg::pauli(2), -I);
    let mut omega_ok = true;
    for s in [3, 7] {
        let rep = clifford::standard_rep(0, s).unwrap();
        let w = clifford::volume_element(&rep).unwrap().m;
        let n = w.nrows();
        omega_ok &= dist(&(&w * &w), &linalg::eye(n)) < 1e-12;
        omega_ok &= rep.j.iter().all(|g| linalg::op_norm(&linalg::comm(&w, g)) < 1e-12);
    }
    // an irreducible Cl_{0,3} with ω = +1 only cannot be extended
    let not_ext = matches!(
        clifford::extend_rep(&clifford::cl03_irreducible()).unwrap(),
        Extension::NotExtendable { minus: 0, .. }
    );
    // Cl_{0,2}: i = j1, j = j2, k = j1 j2 span the quaternions
    let q = clifford::standard_rep(0, 2).unwrap();
    let (qi, qj) = (&q.j[0], &q.j[1]);
    let qk = qi * qj;
    let n = qi.nrows();
    let m1 = linalg::scale_re(&linalg::eye(n), -1.0);
    let quat = [qi * qi, qj * qj, &qk * &qk, qi * qj * &qk].iter().all(|x| dist(x, &m1) < 1e-14)
        && dist(&(qj * &qk), qi) < 1e-14
        && dist(&(&qk * qi), qj) < 1e-14
        && dist(&(qj * qi), &linalg::scale_re(&qk, -1.0)) < 1e-14
        && clifford::real_span_dim(&[linalg::eye(n), qi.clone(), qj.clone(), qk.clone()], 1e-12) == 4;
    let el = t0.elapsed();
    let ok = all_pass && worst < 1e-10 && seed_exact && omega_ok && not_ext && quat && el < Duration::from_secs(10);
    report(
        1,
        "Clifford suite",
        ok,
        &format!(
            "45 signatures max residual {worst:.1e}; Cl(1,1) seed exact {seed_exact}; ω central/involutive {omega_ok}; quaternion table {quat}"
        ),
        el,
    );
    assert!(ok);
}

#[test]
fn c02_orhu_suite() {
    let t0 = Instant::now();
    let sigs: Vec<(usize, usize)> = (0..=4).flat_map(|n| (0..=n).map(move |r| (r, n - r))).collect();
    let (mut worst, mut round_trip, mut bulk_sq, mut distinct) = (0.0f64, 0.0f64, 0.0f64, true);
    let mut count = 0;
    let mut seed = 0u64;
    while count < 100 {
        let (r, s) = sigs[count % sigs.len()];
        let dim = clifford::standard_rep(r, s + 1).unwrap().dim();
        let mult = if 2 * dim <= 16 { 1 + (seed as usize % 2) } else { 1 };
        seed += 1;
        if dim * mult > 16 {
            continue;
        }
        let a = clifford::random_iqpv(r, s, mult, seed).unwrap();
        let b = clifford::random_iqpv(r, s, mult, seed + 1000).unwrap();
        let amb = clifford::standard_rep(r, s + 1).unwrap().amplify(mult);
        let pp = clifford::pseudo_projection(&a.rep, &amb).unwrap();
        let xa = clifford::orhu_map_with(&a.j, &a.rep, &pp).unwrap();
        let xb = clifford::orhu_map_with(&b.j, &b.rep, &pp).unwrap();
        worst = worst.max(xa.check().max());
        round_trip = round_trip.max(dist(&clifford::orhu_inverse(&xa.x.m, &pp), &a.j));
        // different vacua map to different ORHUs
        if dist(&a.j, &b.j) > 1e-6 {
            distinct &= dist(&xa.x.m, &xb.x.m) > 1e-8;
        }
        let bulk = clifford::bulk_representative(&a.j, &a.j_ref, &a.rep, &amb).unwrap().m;
        bulk_sq = bulk_sq.max(dist(&(&bulk * &bulk), &linalg::eye(bulk.nrows())));
        count += 1;
    }
    let sample = clifford::random_iqpv(1, 1, 1, 11).unwrap();
    let amb = clifford::standard_rep(1, 2).unwrap();
    let (_, corner) = clifford::corner_iso(&sample.rep, &amb, &sample.j_ref, 50, 5).unwrap();
    let el = t0.elapsed();
    let ok = worst < 1e-10
        && round_trip < 1e-10
        && distinct
        && bulk_sq < 1e-10
        && corner.multiplicative < 1e-9
        && corner.max() < 1e-9
        && el < Duration::from_secs(60);
    report(
        2,
        "ORHU / Van Daele suite",
        ok,
        &format!(
            "100 IQPV: ORHU residual {worst:.1e}, round trip {round_trip:.1e}, injective {distinct}, bulk² {bulk_sq:.1e}; corner multiplicativity {:.1e}",
            corner.multiplicative
        ),
        el,
    );
    assert!(ok);
}

#[test]
fn c03_symmetry_dictionary() {
    let t0 = Instant::now();
    let mut bad = vec![];
    for class in ALL_CLASSES {
        let phys = symmetry::build_physical(3 * class.block(), class).unwrap();
        assert!(phys.dim_w() <= 64);
        for seed in 0..3 {
            let h = symmetry::random_compatible_h(&phys, class, None, seed);
            let c = symmetry::classify_tol(&h, &phys, class, 1e-8, 1e-8).unwrap();
            let srfl = symmetry::srfl_agrees(&h, &phys, class).unwrap();
            if !(c.commutes_with_symmetries && c.j_anticommutes_with_pseudosyms && srfl) {
                bad.push(format!("{class} seed {seed} compatible {c:?} srfl {srfl}"));
            }
            for skip in class.generators() {
                let h = symmetry::random_compatible_h(&phys, class, Some(skip), seed);
                let c = symmetry::classify_tol(&h, &phys, class, 1e-8, 1e-8).unwrap();
                if c.commutes_with_symmetries || !c.consistent() {
                    bad.push(format!("{class} seed {seed} without {skip:?}: {c:?}"));
                }
            }
        }
    }
    let ok = bad.is_empty();
    report(3, "symmetry dictionary", ok, &format!("10 classes × 3 seeds, mismatches {bad:?}"), t0.elapsed());
    assert!(ok);
}

#[test]
fn c04_covariance() {
    let t0 = Instant::now();
    let models = [
        lattice::kitaev_chain(1.0, 0.7, 0.3),
        lattice::ssh(0.8, 1.3),
        lattice::ssh(1.0, 2.0).with_spin(),
        lattice::qwz(1.2),
        lattice::p_ip(1.0, 0.6, 1.5),
    ];
    let mut fails = 0;
    for i in 0..20u64 {
        let m = &models[i as usize % models.len()];
        let dims: Vec<usize> = if m.d == 1 { vec![7 + i as usize % 5] } else { vec![4, 3 + i as usize % 3] };
        let dis = DisorderConfig::sample(&dims, m.disorder_dim(), 0.5, 100 + i);
        let geom = Geometry::torus(&dims);
        let x: Vec<i64> = (0..m.d).map(|a| (i as i64 * (a as i64 + 3)) % 11 - 5).collect();
        let h = lattice::assemble_geom(m, &dis, &geom);
        let lhs = lattice::translate_operator(&h, &geom, m.dim_w(), &x);
        let rhs = lattice::assemble_geom(m, &lattice::translate_config(&dis, &x), &geom);
        if !lattice::bit_equal(&lhs, &rhs) {
            fails += 1;
        }
    }
    let ok = fails == 0;
    report(4, "covariance", ok, &format!("20 configs, {fails} byte-level mismatches"), t0.elapsed());
    assert!(ok);
}

#[test]
fn c05_flattening() {
    let t0 = Instant::now();
    let zoo: Vec<(LatticeModel, Vec<usize>)> = vec![
        (lattice::kitaev_chain(1.0, 1.0, 0.5), vec![60]),
        (lattice::kitaev_chain(1.0, 0.6, 3.0), vec![60]),
        (lattice::ssh(1.0, 2.0), vec![60]),
        (lattice::ssh(2.0, 1.0), vec![60]),
        (lattice::ssh(1.0, 2.0).with_spin(), vec![40]),
        (lattice::qwz(1.0), vec![12, 12]),
        (lattice::qwz(3.0), vec![12, 12]),
        (lattice::p_ip(1.0, 1.0, 2.0), vec![12, 12]),
    ];
    let mut lines = vec![];
    let mut ok = true;
    for (m, dims) in &zoo {
        let dis = DisorderConfig::clean(dims, m.disorder_dim());
        let h = lattice::assemble(m, &dis, lattice::BoundaryCondition::PeriodicTorus);
        let j = lattice::flatten(&h, 1e-6).unwrap();
        let p = structured::check_predicates_tol(&j, 1e-10);
        let sq = dist(&(&j.m * &j.m), &linalg::scale_re(&linalg::eye(j.dim()), -1.0));
        let fit = lattice::decay_fit(&j.m, &Geometry::torus(dims), m.dim_w());
        let good = p.is_real && p.is_skew && p.is_unitary && sq < 1e-10 && fit.xi.is_finite() && fit.r2 > 0.95;
        ok &= good;
        lines.push(format!("{}{:?} xi {:.3} R² {:.4}", m.name, m.params.values().collect::<Vec<_>>(), fit.xi, fit.r2));
    }
    report(5, "flattening", ok, &lines.join("; "), t0.elapsed());
    assert!(ok);
}

/// Winding of q(k) = v + w e^{ik} by phase accumulation.
fn ssh_winding_oracle(v: f64, w: f64, n: usize) -> i64 {
    let mut total = 0.0;
    let q = |k: f64| c64::new(v + w * k.cos(), w * k.sin());
    for i in 0..n {
        let (k0, k1) = (2.0 * PI * i as f64 / n as f64, 2.0 * PI * (i + 1) as f64 / n as f64);
        total += (q(k1) * q(k0).conj()).arg();
    }
    (total / (2.0 * PI)).round() as i64
}

/// (1/2πi) Σ Tr(P[∂ₓP, ∂ᵧP]) Δk² with central differences of the occupied projector.
fn chern_projector_oracle(m: &LatticeModel, n: usize) -> f64 {
    let h = 2.0 * PI / n as f64;
    let proj = |kx: f64, ky: f64| {
        let hk = m.bloch_v(&[kx, ky]);
        let (vals, u) = linalg::eigh(&hk);
        let idx: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] < 0.0).collect();
        let b = linalg::columns(&u, &idx);
        &b * b.adjoint()
    };
    let mut total = c64::new(0.0, 0.0);
    for ix in 0..n {
        for iy in 0..n {
            let (kx, ky) = (ix as f64 * h, iy as f64 * h);
            let p = proj(kx, ky);
            let dx = linalg::scale_re(&(proj(kx + h, ky) - proj(kx - h, ky)), 0.5 / h);
            let dy = linalg::scale_re(&(proj(kx, ky + h) - proj(kx, ky - h)), 0.5 / h);
            total += linalg::trace(&(&p * linalg::comm(&dx, &dy)));
        }
    }
    (total * h * h / (c64::new(0.0, 2.0 * PI))).re
}

#[test]
fn c06_bulk_invariants_vs_oracles() {
    let t0 = Instant::now();
    let mut worst_res = 0.0f64;
    let mut notes = vec![];
    // SSH: 21-point grid of v/w
    let mut ssh_ok = true;
    for v in grid(0.0, 2.0, 0.1) {
        if (v - 1.0f64).abs() < 1e-9 {
            continue;
        }
        let r = invariants::winding_1d(&lattice::ssh(v, 1.0), 512).unwrap();
        worst_res = worst_res.max(r.residual);
        ssh_ok &= r.value == ssh_winding_oracle(v, 1.0, 4096) && (r.value == 0 || r.value == 1);
    }
    notes.push(format!("SSH grid {ssh_ok}"));
    // Kitaev: flip at |μ| = 2|t|
    let mut kit_ok = true;
    for mu in grid(-4.0, 4.0, 0.1) {
        if (mu.abs() - 2.0).abs() < 1e-9 {
            continue;
        }
        let r = invariants::pfaffian_z2(&lattice::kitaev_chain(1.0, 1.0, mu)).unwrap();
        worst_res = worst_res.max(r.residual);
        kit_ok &= r.value == if mu.abs() < 2.0 { -1 } else { 1 };
    }
    notes.push(format!("Kitaev flip {kit_ok}"));
    // QWZ: grid 24 versus a 96-point projector oracle
    let mut qwz_ok = true;
    for u in [-3.0, -1.5, -0.5, 0.5, 1.5, 3.0] {
        let m = lattice::qwz(u);
        let r = invariants::chern_2d(&m, 24).unwrap();
        let oracle = chern_projector_oracle(&m, 96);
        worst_res = worst_res.max(r.residual);
        qwz_ok &= r.value == oracle.round() as i64 && (oracle - oracle.round()).abs() < 0.05;
        notes.push(format!("qwz({u}) C={} oracle {oracle:.4}", r.value));
    }
    // Bott = Chern on 10 clean configurations
    let mut bott_ok = true;
    let cfgs: Vec<LatticeModel> = [-2.5, -1.5, -0.5, 0.5, 1.5, 2.5]
        .iter()
        .map(|&u| lattice::qwz(u))
        .chain([0.5, 1.5, 2.5, 5.0].iter().map(|&mu| lattice::p_ip(1.0, 1.0, mu)))
        .collect();
    for m in &cfgs {
        let c = invariants::chern_2d(m, 24).unwrap();
        let b = invariants::bott_index(m, &DisorderConfig::clean(&[12, 12], m.disorder_dim()), 1e-6).unwrap();
        worst_res = worst_res.max(b.residual);
        bott_ok &= b.value == c.value;
    }
    notes.push(format!("Bott=Chern {bott_ok}"));
    let ok = ssh_ok && kit_ok && qwz_ok && bott_ok && worst_res < 0.01;
    report(6, "bulk invariants vs oracles", ok, &format!("{}; max residual {worst_res:.1e}", notes.join(", ")), t0.elapsed());
    assert!(ok);
}

struct Sweep {
    points: Vec<BbPoint>,
}

impl Sweep {
    fn gapped(&self) -> impl Iterator<Item = &BbPoint> {
        self.points.iter().filter(|p| p.gapped())
    }

    fn flagged(&self, flag: &str) -> usize {
        self.points.iter().filter(|p| p.flag.as_deref() == Some(flag)).count()
    }
}

fn sweep(models: &[LatticeModel], seeds: u64, st: &BbSettings) -> Sweep {
    let mut points = vec![];
    for m in models {
        let dims = experiment::bb_torus_dims(m, st);
        let strength = 0.3 * m.gap_estimate();
        points.push(boundary::bb_check(m, &DisorderConfig::clean(&dims, m.disorder_dim()), st).unwrap());
        for seed in 0..seeds {
            let dis = DisorderConfig::sample(&dims, m.disorder_dim(), strength, seed);
            points.push(boundary::bb_check(m, &dis, st).unwrap());
        }
    }
    Sweep { points }
}

/// Criteria 7, 8 and 10 share the same runs.
#[test]
fn c07_c08_c10_bulk_boundary() {
    let t0 = Instant::now();
    let st = BbSettings { l: 60, ..BbSettings::default() };
    let ssh_models: Vec<LatticeModel> = grid(0.5, 2.0, 0.1).into_iter().map(|v| lattice::ssh(v, 1.0)).collect();
    let kit_models: Vec<LatticeModel> =
        grid(0.0, 4.0, 0.25).into_iter().map(|mu| lattice::kitaev_chain(1.0, 1.0, mu)).collect();
    let s_ssh = sweep(&ssh_models, 20, &st);
    let s_kit = sweep(&kit_models, 20, &st);
    let st2 = BbSettings { l: 24, transverse: 24, ..BbSettings::default() };
    let qwz: Vec<BbPoint> =
        [1.0, -1.0, 3.0].iter().map(|&u| boundary::bb_check(&lattice::qwz(u), &DisorderConfig::clean(&[24, 48], 1), &st2).unwrap()).collect();
    // points violating L ≥ 8ξ at L = 60 are re-evaluated on the smallest admissible slab
    let thin: Vec<&BbPoint> = s_ssh.points.iter().chain(&s_kit.points).filter(|p| p.flag.as_deref() == Some("slab_too_thin")).collect();
    let st80 = BbSettings { l: 80, ..BbSettings::default() };
    let rechecked: Vec<BbPoint> = thin
        .iter()
        .map(|p| {
            let m = lattice::zoo(&p.model, &p.params).unwrap();
            let dims = experiment::bb_torus_dims(&m, &st80);
            let dis = match p.seed {
                None => DisorderConfig::clean(&dims, m.disorder_dim()),
                Some(s) => DisorderConfig::sample(&dims, m.disorder_dim(), p.strength, s),
            };
            boundary::bb_check(&m, &dis, &st80).unwrap()
        })
        .collect();
    let el = t0.elapsed();
    let thin_ok = rechecked.iter().filter(|p| p.gapped() && p.agree == Some(true) && p.antisymmetric == Some(true) && p.triviality_ok == Some(true)).count();

    let all: Vec<&BbPoint> = s_ssh.gapped().chain(s_kit.gapped()).collect();
    let agree = all.iter().filter(|p| p.agree == Some(true)).count();
    let qwz_agree = qwz.iter().all(|p| p.gapped() && p.agree == Some(true));
    let skipped = format!(
        "flagged gapless {} / slab_too_thin {}",
        s_ssh.flagged("gapless") + s_kit.flagged("gapless"),
        s_ssh.flagged("slab_too_thin") + s_kit.flagged("slab_too_thin")
    );
    let qwz_desc: Vec<String> = qwz
        .iter()
        .map(|p| format!("u={} C={:?} edges ({:?},{:?})", p.params["u"], p.bulk.as_ref().map(|b| b.value), p.index_plus, p.index_minus))
        .collect();
    let ok7 = agree == all.len() && qwz_agree && thin_ok == rechecked.len() && el < Duration::from_secs(600);
    report(
        7,
        "bulk-boundary correspondence",
        ok7,
        &format!(
            "{agree}/{} gapped SSH+Kitaev runs agree ({skipped}; thin points at L = 80: {thin_ok}/{} agree); QWZ cylinder {}",
            all.len(),
            rechecked.len(),
            qwz_desc.join(", ")
        ),
        el,
    );

    let all2: Vec<&BbPoint> = all.iter().copied().chain(qwz.iter()).collect();
    let anti = all2.iter().filter(|p| p.antisymmetric == Some(true)).count();
    let ok8 = anti == all2.len();
    report(8, "edge antisymmetry", ok8, &format!("{anti}/{} runs with index₊ + index₋ = 0", all2.len()), el);

    let triv = all2.iter().filter(|p| p.triviality_ok == Some(true)).count();
    let ok10 = triv == all2.len();
    let bad: Vec<String> = all2
        .iter()
        .filter(|p| p.triviality_ok != Some(true))
        .take(5)
        .map(|p| format!("{} {:?} seed {:?}", p.model, p.params, p.seed))
        .collect();
    report(10, "triviality criterion", ok10, &format!("{triv}/{} runs; first failures {bad:?}", all2.len()), el);
    assert!(ok7 && ok8 && ok10);
}

#[test]
fn c09_disorder_invariance() {
    let t0 = Instant::now();
    let cases: Vec<(LatticeModel, Vec<usize>)> = vec![
        (lattice::kitaev_chain(1.0, 1.0, 0.5), vec![60]),
        (lattice::kitaev_chain(1.0, 1.0, 3.0), vec![60]),
        (lattice::ssh(1.0, 2.0), vec![60]),
        (lattice::ssh(2.0, 1.0), vec![60]),
        (lattice::qwz(1.0), vec![16, 16]),
        (lattice::qwz(3.0), vec![16, 16]),
    ];
    let mut ok = true;
    let mut notes = vec![];
    for (m, dims) in &cases {
        let clean = experiment::bulk_invariant_of(m, &DisorderConfig::clean(dims, m.disorder_dim()), 1e-6).unwrap();
        let strength = 0.3 * m.gap_estimate();
        let mut vals = BTreeMap::new();
        let mut worst = 0.0f64;
        for seed in 0..50 {
            let dis = DisorderConfig::sample(dims, m.disorder_dim(), strength, seed);
            let r = experiment::bulk_invariant_of(m, &dis, 1e-6).unwrap();
            worst = worst.max(r.residual);
            *vals.entry(r.value).or_insert(0) += 1;
        }
        let constant = vals.len() == 1 && vals.contains_key(&clean.value) && worst < 0.01;
        ok &= constant;
        notes.push(format!("{} {:?}: {:?}", m.name, m.params.values().collect::<Vec<_>>(), vals));
    }
    report(9, "disorder invariance", ok, &notes.join("; "), t0.elapsed());
    assert!(ok);
}

#[test]
fn c11_determinism() {
    let t0 = Instant::now();
    let dir = std::env::temp_dir().join(format!("tenfold-acceptance-{}", std::process::id()));
    let text = "task = \"bb-check\"\nmodel = \"kitaev\"\nsize = 40\n[grid]\nmu = \"0.5:3.5:1.5\"\n[disorder]\nrelative = 0.3\nseeds = \"0..4\"\n";
    let mut outputs = vec![];
    for (run, jobs) in [(0, 1), (1, 1), (2, 2)] {
        let mut cfg = ExperimentConfig::from_toml(text).unwrap();
        cfg.output.dir = dir.join(format!("run{run}"));
        let out = experiment::run(&cfg, jobs).unwrap();
        assert!(out.passed, "{:?}", out.failures);
        let files: Vec<Vec<u8>> =
            ["bb.csv", "invariants.csv", "modes.csv"].iter().map(|f| std::fs::read(cfg.output.dir.join(f)).unwrap()).collect();
        outputs.push(files);
    }
    let _ = std::fs::remove_dir_all(&dir);
    let ok = outputs.windows(2).all(|w| w[0] == w[1]);
    let rows = String::from_utf8_lossy(&outputs[0][0]).lines().count() - 1;
    report(11, "determinism", ok, &format!("3 reruns (1, 1, 2 workers) of a {rows}-row sweep byte-identical"), t0.elapsed());
    assert!(ok);
}
