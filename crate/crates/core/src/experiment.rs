//! Config-driven experiment runner: parameter grids × seeds, evaluated on a bounded worker
//! pool, written as report.json plus RFC-4180 CSV tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{self, BbSettings, EdgeMode};
use crate::clifford;
use crate::error::{Error, Result};
use crate::invariants::{self, InvariantReport};
use crate::lattice::{self, DisorderConfig, LatticeModel};
use crate::symmetry::{self, SymmetryClass, ALL_CLASSES};

pub const SCHEMA: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    VerifyClifford,
    Classify,
    BulkInvariant,
    EdgeSpectrum,
    BbCheck,
    DisorderSweep,
    HomotopySweep,
}

impl Task {
    pub fn label(self) -> &'static str {
        match self {
            Task::VerifyClifford => "verify-clifford",
            Task::Classify => "classify",
            Task::BulkInvariant => "bulk-invariant",
            Task::EdgeSpectrum => "edge-spectrum",
            Task::BbCheck => "bb-check",
            Task::DisorderSweep => "disorder-sweep",
            Task::HomotopySweep => "homotopy-sweep",
        }
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.into()))
            .map_err(|_| Error::Config(format!("task: unknown task `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Torus,
    Slab,
}

/// Grid axis: an explicit list or an inclusive `"start:stop:step"` range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Values(Vec<f64>),
    Range(String),
}

impl GridSpec {
    pub fn values(&self, key: &str) -> Result<Vec<f64>> {
        match self {
            GridSpec::Values(v) if !v.is_empty() => Ok(v.clone()),
            GridSpec::Values(_) => Err(Error::Config(format!("grid.{key}: empty list"))),
            GridSpec::Range(s) => {
                let bad = || Error::Config(format!("grid.{key}: expected \"start:stop:step\", got `{s}`"));
                let parts: Vec<f64> =
                    s.split(':').map(|p| p.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
                let [a, b, h] = parts[..] else { return Err(bad()) };
                if !(h > 0.0) || b < a {
                    return Err(bad());
                }
                let n = ((b - a) / h + 1e-9).floor() as usize;
                // round to the step's decimal grid so that 0.1-steps print as 0.3, not 0.30000000000000004
                Ok((0..=n).map(|i| round12(a + i as f64 * h)).collect())
            }
        }
    }
}

fn round12(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

/// Seed range `A..B` (half-open).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedRange {
    pub start: u64,
    pub end: u64,
}

impl FromStr for SeedRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("seeds: expected `A..B`, got `{s}`"));
        let (a, b) = s.split_once("..").ok_or_else(bad)?;
        let start = a.trim().parse().map_err(|_| bad())?;
        let end = b.trim().parse().map_err(|_| bad())?;
        if end < start {
            return Err(bad());
        }
        Ok(SeedRange { start, end })
    }
}

impl Serialize for SeedRange {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}..{}", self.start, self.end))
    }
}

impl<'de> Deserialize<'de> for SeedRange {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(|e: Error| serde::de::Error::custom(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DisorderSpec {
    /// Absolute strength; ignored when `relative` is set.
    pub strength: f64,
    /// Strength as a fraction of each point's clean gap.
    pub relative: Option<f64>,
    pub seeds: Option<SeedRange>,
    /// Also evaluate the clean model at every grid point.
    pub clean: bool,
}

impl Default for DisorderSpec {
    fn default() -> Self {
        Self { strength: 0.0, relative: None, seeds: None, clean: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Smallest admissible |E| before a spectrum counts as gapless.
    pub gap: f64,
    /// Algebraic residuals (Clifford relations, flattening predicates).
    pub residual: f64,
    /// Distance of a raw invariant from the nearest integer.
    pub invariant: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { gap: 1e-6, residual: 1e-10, invariant: 0.01 }
    }
}

impl Tolerances {
    /// Applies a `KEY=VAL` override.
    pub fn set(&mut self, kv: &str) -> Result<()> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("tolerance: expected KEY=VAL, got `{kv}`")))?;
        let val: f64 = v.trim().parse().map_err(|_| Error::Config(format!("tolerances.{k}: not a number `{v}`")))?;
        if !(val > 0.0) {
            return Err(Error::Config(format!("tolerances.{k}: must be positive")));
        }
        match k.trim() {
            "gap" => self.gap = val,
            "residual" => self.residual = val,
            "invariant" => self.invariant = val,
            other => return Err(Error::Config(format!("tolerances.{other}: unknown tolerance"))),
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub dir: PathBuf,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub task: Option<Task>,
    pub model: Option<String>,
    /// Expected class of the model; for `classify`, restricts the classes examined.
    pub class: Option<SymmetryClass>,
    /// Slab length L (the torus has 2L sites) or torus length for bulk tasks.
    pub size: Option<usize>,
    /// Transverse extent for d = 2.
    pub transverse: Option<usize>,
    pub boundary: Option<Boundary>,
    pub params: BTreeMap<String, f64>,
    pub grid: BTreeMap<String, GridSpec>,
    /// Endpoint parameters for `homotopy-sweep` (path is linear from `params`).
    pub end: BTreeMap<String, f64>,
    pub steps: Option<usize>,
    /// Largest r + s for `verify-clifford`.
    pub max_order: usize,
    /// Random Hamiltonians per class for `classify`.
    pub samples: usize,
    pub disorder: DisorderSpec,
    pub tolerances: Tolerances,
    pub output: OutputSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            task: None,
            model: None,
            class: None,
            size: None,
            transverse: None,
            boundary: None,
            params: BTreeMap::new(),
            grid: BTreeMap::new(),
            end: BTreeMap::new(),
            steps: None,
            max_order: 8,
            samples: 4,
            disorder: DisorderSpec::default(),
            tolerances: Tolerances::default(),
            output: OutputSpec::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().trim().to_string() + &span_key(text, e.span())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Fills task-dependent defaults and validates cross-field constraints.
    pub fn resolve(mut self) -> Result<Self> {
        let task = self.task.ok_or_else(|| Error::Config("task: missing".into()))?;
        let needs_model = !matches!(task, Task::VerifyClifford | Task::Classify);
        if needs_model {
            let model = self.base_model()?;
            if let Some(c) = self.class {
                if c != model.class {
                    return Err(Error::Config(format!(
                        "class: model `{}` is in class {}, not {c}",
                        model.name, model.class
                    )));
                }
            }
            let d = model.d;
            self.size.get_or_insert(if d == 1 { 60 } else { 24 });
            self.transverse.get_or_insert(if d == 1 { 1 } else { 24 });
            let bc = match task {
                Task::BulkInvariant | Task::DisorderSweep | Task::HomotopySweep => Boundary::Torus,
                _ => Boundary::Slab,
            };
            match self.boundary {
                None => self.boundary = Some(bc),
                Some(b) if b != bc => {
                    return Err(Error::Config(format!("boundary: task {} requires {bc:?}", task.label())))
                }
                _ => {}
            }
            for key in self.grid.keys().chain(self.end.keys()) {
                let mut p = self.params.clone();
                p.insert(key.clone(), 0.0);
                lattice::zoo(self.model.as_deref().unwrap_or_default(), &p)?;
            }
            for (k, g) in &self.grid {
                g.values(k)?;
            }
            if self.size == Some(0) || self.transverse == Some(0) {
                return Err(Error::Config("size: must be positive".into()));
            }
        }
        if task == Task::HomotopySweep {
            if self.end.is_empty() {
                return Err(Error::Config("end: homotopy-sweep needs an endpoint table".into()));
            }
            self.steps.get_or_insert(40);
        }
        if task == Task::DisorderSweep && self.disorder.seeds.is_none() {
            return Err(Error::Config("disorder.seeds: disorder-sweep needs a seed range".into()));
        }
        if let Some(r) = self.disorder.relative {
            if !(r >= 0.0) {
                return Err(Error::Config("disorder.relative: must be non-negative".into()));
            }
        }
        if self.max_order > clifford::MAX_GENERATORS {
            return Err(Error::Config(format!("max_order: at most {}", clifford::MAX_GENERATORS)));
        }
        Ok(self)
    }

    fn base_model(&self) -> Result<LatticeModel> {
        let name = self.model.as_deref().ok_or_else(|| Error::Config("model: missing".into()))?;
        lattice::zoo(name, &self.params)
    }

    /// Cartesian product of the grid axes (keys in sorted order, last key fastest).
    pub fn grid_points(&self) -> Result<Vec<BTreeMap<String, f64>>> {
        let mut pts = vec![self.params.clone()];
        for (k, g) in &self.grid {
            let vals = g.values(k)?;
            pts = pts
                .into_iter()
                .flat_map(|p| {
                    vals.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.insert(k.clone(), v);
                        q
                    })
                })
                .collect();
        }
        Ok(pts)
    }

    fn seed_list(&self) -> Vec<Option<u64>> {
        let mut out = vec![];
        let disordered = self.disorder.relative.is_some_and(|r| r > 0.0) || self.disorder.strength > 0.0;
        if self.disorder.clean || !disordered || self.disorder.seeds.is_none() {
            out.push(None);
        }
        if disordered {
            if let Some(r) = self.disorder.seeds {
                out.extend((r.start..r.end).map(Some));
            }
        }
        out
    }
}

/// Names the TOML key at an error span when the message does not already.
fn span_key(text: &str, span: Option<std::ops::Range<usize>>) -> String {
    let Some(r) = span else { return String::new() };
    let line = text[..r.start.min(text.len())].lines().count().max(1);
    format!(" (line {line})")
}

/// One evaluation unit: grid point × seed.
#[derive(Debug, Clone)]
struct Job {
    params: BTreeMap<String, f64>,
    seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub passed: bool,
    pub failures: Vec<String>,
    pub files: Vec<PathBuf>,
}

pub fn params_label(p: &BTreeMap<String, f64>) -> String {
    let mut s = String::new();
    for (i, (k, v)) in p.iter().enumerate() {
        if i > 0 {
            s.push(';');
        }
        let _ = write!(s, "{k}={v}");
    }
    s
}

fn seed_label(s: Option<u64>) -> String {
    s.map(|x| x.to_string()).unwrap_or_else(|| "clean".into())
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Rows of an RFC-4180 table with a fixed header.
struct Table {
    name: &'static str,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &'static str, header: &[&'static str]) -> Self {
        Self { name, header: header.to_vec(), rows: vec![] }
    }

    fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(self.name);
        let io = |e: csv::Error| Error::Io(format!("{}: {e}", path.display()));
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_path(&path).map_err(io)?;
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}

const INVARIANT_HEADER: [&str; 7] = ["model", "class", "params", "seed", "kind", "value", "residual"];
const MODE_HEADER: [&str; 6] = ["params", "seed", "E", "edge", "weight", "chirality"];

fn invariant_row(r: &InvariantReport) -> Vec<String> {
    vec![
        r.model.clone(),
        r.class.to_string(),
        params_label(&r.params),
        seed_label(r.seed),
        r.kind.label().into(),
        r.value.to_string(),
        r.residual.to_string(),
    ]
}

fn mode_rows(params: &BTreeMap<String, f64>, seed: Option<u64>, modes: &[EdgeMode]) -> Vec<Vec<String>> {
    modes
        .iter()
        .map(|m| {
            vec![
                params_label(params),
                seed_label(seed),
                m.energy.to_string(),
                m.edge.label().into(),
                m.weight.to_string(),
                opt(m.chirality),
            ]
        })
        .collect()
}

/// Runs the configured task on a pool of `jobs` workers and writes artifacts to the output
/// directory. Config errors are returned as `Err`; failed assertions give `passed = false`.
pub fn run(cfg: &ExperimentConfig, jobs: usize) -> Result<Outcome> {
    let cfg = cfg.clone().resolve()?;
    // kernels stay sequential so that floating-point reductions do not depend on the worker count
    faer::set_global_parallelism(faer::Par::Seq);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("jobs: {e}")))?;
    let (tables, records, failures) = pool.install(|| dispatch(&cfg))?;
    std::fs::create_dir_all(&cfg.output.dir).map_err(|e| Error::Io(format!("{}: {e}", cfg.output.dir.display())))?;
    let mut files = vec![];
    for t in &tables {
        files.push(t.write(&cfg.output.dir)?);
    }
    let report = serde_json::json!({
        "schema": SCHEMA,
        "task": cfg.task.map(Task::label),
        "config": cfg,
        "passed": failures.is_empty(),
        "failures": failures,
        "records": records,
    });
    let path = cfg.output.dir.join("report.json");
    let text = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))? + "\n";
    std::fs::write(&path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    files.push(path);
    Ok(Outcome { passed: failures.is_empty(), failures, files })
}

type Dispatched = (Vec<Table>, Vec<serde_json::Value>, Vec<String>);

fn dispatch(cfg: &ExperimentConfig) -> Result<Dispatched> {
    match cfg.task.expect("resolved") {
        Task::VerifyClifford => verify_clifford(cfg),
        Task::Classify => classify(cfg),
        Task::BulkInvariant => bulk_invariant(cfg, false),
        Task::DisorderSweep => bulk_invariant(cfg, true),
        Task::EdgeSpectrum => bb_sweep(cfg, true),
        Task::BbCheck => bb_sweep(cfg, false),
        Task::HomotopySweep => homotopy(cfg),
    }
}

fn to_json<T: Serialize>(x: &T) -> serde_json::Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn verify_clifford(cfg: &ExperimentConfig) -> Result<Dispatched> {
    let sigs: Vec<(usize, usize)> =
        (0..=cfg.max_order).flat_map(|n| (0..=n).map(move |r| (r, n - r))).filter(|&(r, s)| r + s >= 1).collect();
    let reports: Vec<Result<clifford::RepReport>> = sigs
        .par_iter()
        .map(|&(r, s)| clifford::standard_rep(r, s).map(|rep| clifford::verify_rep_tol(&rep, cfg.tolerances.residual)))
        .collect();
    let mut t = Table::new("clifford.csv", &["r", "s", "dim", "max_residual", "worst", "pass"]);
    let (mut recs, mut fails) = (vec![], vec![]);
    for rep in reports {
        let rep = rep?;
        if !rep.pass {
            fails.push(format!("Cl({},{}): {} residual {:e}", rep.r, rep.s, rep.worst, rep.max_residual));
        }
        t.rows.push(vec![
            rep.r.to_string(),
            rep.s.to_string(),
            rep.dim.to_string(),
            rep.max_residual.to_string(),
            rep.worst.clone(),
            rep.pass.to_string(),
        ]);
        recs.push(to_json(&rep));
    }
    Ok((vec![t], recs, fails))
}

#[derive(Debug, Clone, Serialize)]
struct ClassifyRecord {
    class: SymmetryClass,
    seed: u64,
    compatible: bool,
    commutes: bool,
    anticommutes: bool,
    srfl_agrees: bool,
    symmetry_residual: f64,
    pseudo_residual: f64,
}

fn classify(cfg: &ExperimentConfig) -> Result<Dispatched> {
    let classes: Vec<SymmetryClass> = match cfg.class {
        Some(c) => vec![c],
        None => ALL_CLASSES.to_vec(),
    };
    let seeds: Vec<u64> = match cfg.disorder.seeds {
        Some(r) => (r.start..r.end).collect(),
        None => (0..cfg.samples as u64).collect(),
    };
    let units: Vec<(SymmetryClass, u64, bool)> = classes
        .iter()
        .flat_map(|&c| seeds.iter().flat_map(move |&s| [(c, s, true), (c, s, false)]))
        .collect();
    let out: Vec<Result<Option<ClassifyRecord>>> = units
        .par_iter()
        .map(|&(class, seed, compatible)| {
            let phys = symmetry::build_physical(3 * class.block(), class)?;
            let skip = if compatible { None } else { class.generators().last().copied() };
            if !compatible && skip.is_none() {
                return Ok(None);
            }
            let h = symmetry::random_compatible_h(&phys, class, skip, seed);
            let res = symmetry::classify_tol(&h, &phys, class, cfg.tolerances.gap, 1e-8)?;
            let srfl = symmetry::srfl_agrees(&h, &phys, class)?;
            Ok(Some(ClassifyRecord {
                class,
                seed,
                compatible,
                commutes: res.commutes_with_symmetries,
                anticommutes: res.j_anticommutes_with_pseudosyms,
                srfl_agrees: srfl,
                symmetry_residual: res.symmetry_residual,
                pseudo_residual: res.pseudo_residual,
            }))
        })
        .collect();
    let mut t = Table::new(
        "classify.csv",
        &["class", "seed", "compatible", "commutes", "anticommutes", "srfl_agrees", "symmetry_residual", "pseudo_residual"],
    );
    let (mut recs, mut fails) = (vec![], vec![]);
    for r in out {
        let Some(r) = r? else { continue };
        if r.commutes != r.anticommutes || r.commutes != r.compatible || (r.compatible && !r.srfl_agrees) {
            fails.push(format!("class {} seed {} compatible={}: dictionary mismatch", r.class, r.seed, r.compatible));
        }
        t.rows.push(vec![
            r.class.to_string(),
            r.seed.to_string(),
            r.compatible.to_string(),
            r.commutes.to_string(),
            r.anticommutes.to_string(),
            r.srfl_agrees.to_string(),
            r.symmetry_residual.to_string(),
            r.pseudo_residual.to_string(),
        ]);
        recs.push(to_json(&r));
    }
    Ok((vec![t], recs, fails))
}

fn jobs_for(cfg: &ExperimentConfig) -> Result<Vec<Job>> {
    let seeds = cfg.seed_list();
    Ok(cfg
        .grid_points()?
        .into_iter()
        .flat_map(|p| seeds.iter().map(move |&seed| Job { params: p.clone(), seed }))
        .collect())
}

/// Disorder strength for a model: absolute, or relative to its clean gap.
fn strength_for(cfg: &ExperimentConfig, model: &LatticeModel) -> f64 {
    match cfg.disorder.relative {
        Some(r) => r * model.gap_estimate(),
        None => cfg.disorder.strength,
    }
}

/// Strong bulk invariant of a model on an L-torus (L × L in d = 2) with one disorder draw.
pub fn bulk_invariant_of(model: &LatticeModel, dis: &DisorderConfig, gap_tol: f64) -> Result<InvariantReport> {
    let clean = dis.strength == 0.0;
    match (model.d, model.class) {
        (1, SymmetryClass::D) if clean => invariants::pfaffian_z2(model),
        (1, SymmetryClass::D) => invariants::pfaffian_z2_disordered(model, dis),
        (1, _) if clean => invariants::winding_1d(model, 512),
        (1, _) => invariants::winding_disordered(model, dis, 64),
        (_, _) if clean => invariants::chern_2d(model, 24),
        _ => invariants::bott_index(model, dis, gap_tol),
    }
}

fn torus_dims(model: &LatticeModel, cfg: &ExperimentConfig) -> Vec<usize> {
    let l = cfg.size.expect("resolved");
    if model.d == 1 {
        vec![l]
    } else {
        vec![l, l]
    }
}

fn bulk_invariant(cfg: &ExperimentConfig, sweep: bool) -> Result<Dispatched> {
    let name = cfg.model.clone().expect("resolved");
    let jobs = jobs_for(cfg)?;
    let out: Vec<Result<InvariantReport>> = jobs
        .par_iter()
        .map(|job| {
            let model = lattice::zoo(&name, &job.params)?;
            let dims = torus_dims(&model, cfg);
            let dis = match job.seed {
                None => DisorderConfig::clean(&dims, model.disorder_dim()),
                Some(s) => DisorderConfig::sample(&dims, model.disorder_dim(), strength_for(cfg, &model), s),
            };
            let mut r = bulk_invariant_of(&model, &dis, cfg.tolerances.gap)?;
            r.seed = job.seed;
            Ok(r)
        })
        .collect();
    let mut t = Table::new("invariants.csv", &INVARIANT_HEADER);
    let (mut recs, mut fails) = (vec![], vec![]);
    let mut by_point: BTreeMap<String, Vec<i64>> = BTreeMap::new();
    for (job, r) in jobs.iter().zip(out) {
        let r = match r {
            Ok(r) => r,
            Err(e @ Error::Config(_)) => return Err(e),
            Err(Error::GapClosed { .. }) => {
                // closings are flagged, not failures
                let m = lattice::zoo(&name, &job.params)?;
                t.rows.push(vec![
                    m.name.clone(),
                    m.class.to_string(),
                    params_label(&job.params),
                    seed_label(job.seed),
                    "gapless".into(),
                    String::new(),
                    String::new(),
                ]);
                recs.push(serde_json::json!({ "params": job.params, "seed": job.seed, "flag": "gapless" }));
                continue;
            }
            Err(e) => {
                fails.push(format!("{} seed {}: {e}", params_label(&job.params), seed_label(job.seed)));
                continue;
            }
        };
        if r.residual >= cfg.tolerances.invariant {
            fails.push(format!(
                "{} seed {}: {} residual {:e}",
                params_label(&job.params),
                seed_label(job.seed),
                r.kind.label(),
                r.residual
            ));
        }
        by_point.entry(params_label(&job.params)).or_default().push(r.value);
        t.rows.push(invariant_row(&r));
        recs.push(to_json(&r));
    }
    if sweep {
        for (p, vals) in &by_point {
            if vals.iter().any(|v| *v != vals[0]) {
                fails.push(format!("{p}: invariant not constant across seeds {vals:?}"));
            }
        }
    }
    Ok((vec![t], recs, fails))
}

fn bb_settings(cfg: &ExperimentConfig) -> BbSettings {
    BbSettings {
        l: cfg.size.expect("resolved"),
        transverse: cfg.transverse.expect("resolved"),
        gap_tol: cfg.tolerances.gap,
        ..BbSettings::default()
    }
}

/// Torus on which `bb_check` draws disorder: 2L sites in d = 1, transverse × 2L in d = 2.
pub fn bb_torus_dims(model: &LatticeModel, st: &BbSettings) -> Vec<usize> {
    if model.d == 1 {
        vec![2 * st.l]
    } else {
        vec![st.transverse, 2 * st.l]
    }
}

fn bb_sweep(cfg: &ExperimentConfig, modes_only: bool) -> Result<Dispatched> {
    let name = cfg.model.clone().expect("resolved");
    let st = bb_settings(cfg);
    let jobs = jobs_for(cfg)?;
    let out: Vec<Result<boundary::BbPoint>> = jobs
        .par_iter()
        .map(|job| {
            let model = lattice::zoo(&name, &job.params)?;
            let dims = bb_torus_dims(&model, &st);
            let dis = match job.seed {
                None => DisorderConfig::clean(&dims, model.disorder_dim()),
                Some(s) => DisorderConfig::sample(&dims, model.disorder_dim(), strength_for(cfg, &model), s),
            };
            boundary::bb_check(&model, &dis, &st)
        })
        .collect();
    let mut bb = Table::new(
        "bb.csv",
        &[
            "model", "class", "params", "seed", "strength", "bulk_gap", "flag", "kind", "bulk", "edge_kind", "edge_plus",
            "edge_minus", "agree", "antisymmetric", "triviality_ok",
        ],
    );
    let mut modes = Table::new("modes.csv", &MODE_HEADER);
    let mut inv = Table::new("invariants.csv", &INVARIANT_HEADER);
    let (mut recs, mut fails) = (vec![], vec![]);
    for (job, p) in jobs.iter().zip(out) {
        let tag = format!("{} seed {}", params_label(&job.params), seed_label(job.seed));
        let p = match p {
            Ok(p) => p,
            Err(e @ Error::Config(_)) => return Err(e),
            Err(e) => {
                fails.push(format!("{tag}: {e}"));
                continue;
            }
        };
        if p.gapped() {
            if let Some(c) = &p.census {
                if let Some(m) = c.modes.iter().find(|m| m.weight <= 0.5 || m.energy.abs() >= 0.5 * c.bulk_gap) {
                    fails.push(format!("{tag}: census mode E = {:e}, weight {} outside bounds", m.energy, m.weight));
                }
                modes.rows.extend(mode_rows(&job.params, job.seed, &c.modes));
            }
            if let Some(b) = &p.bulk {
                inv.rows.push(invariant_row(b));
                if b.residual >= cfg.tolerances.invariant {
                    fails.push(format!("{tag}: {} residual {:e}", b.kind.label(), b.residual));
                }
            }
            if !modes_only {
                for (what, ok) in
                    [("bulk/edge", p.agree), ("antisymmetry", p.antisymmetric), ("triviality", p.triviality_ok)]
                {
                    if ok != Some(true) {
                        fails.push(format!("{tag}: {what} check failed"));
                    }
                }
            }
        }
        bb.rows.push(vec![
            p.model.clone(),
            p.class.to_string(),
            params_label(&p.params),
            seed_label(job.seed),
            p.strength.to_string(),
            p.bulk_gap.to_string(),
            p.flag.clone().unwrap_or_default(),
            p.bulk.as_ref().map(|b| b.kind.label().to_string()).unwrap_or_default(),
            opt(p.bulk.as_ref().map(|b| b.value)),
            p.edge_kind.into(),
            opt(p.index_plus),
            opt(p.index_minus),
            opt(p.agree),
            opt(p.antisymmetric),
            opt(p.triviality_ok),
        ]);
        recs.push(to_json(&p));
    }
    let tables = if modes_only { vec![modes] } else { vec![bb, inv, modes] };
    Ok((tables, recs, fails))
}

fn homotopy(cfg: &ExperimentConfig) -> Result<Dispatched> {
    let name = cfg.model.clone().expect("resolved");
    let (a, b) = (cfg.params.clone(), cfg.end.clone());
    let path = |t: f64| {
        let mut p = a.clone();
        for (k, &vb) in &b {
            let va = a.get(k).copied().unwrap_or_else(|| default_param(&name, k));
            p.insert(k.clone(), round12(va + t * (vb - va)));
        }
        lattice::zoo(&name, &p).expect("validated keys")
    };
    let gap_tol = cfg.tolerances.gap;
    let inv = |m: &LatticeModel| {
        let dims = torus_dims(m, cfg);
        bulk_invariant_of(m, &DisorderConfig::clean(&dims, m.disorder_dim()), gap_tol)
    };
    let rep = invariants::homotopy_probe(&path, cfg.steps.expect("resolved"), gap_tol, &inv);
    let mut t = Table::new("homotopy.csv", &["t", "params", "gap", "gapless", "value"]);
    for p in &rep.points {
        t.rows.push(vec![
            p.t.to_string(),
            params_label(&path(p.t).params),
            p.gap.to_string(),
            p.gapless.to_string(),
            opt(p.value),
        ]);
    }
    let mut fails = vec![];
    if !rep.changes_explained {
        fails.push(format!("invariant changes at {:?} without a gap closing", rep.changes));
    }
    Ok((vec![t], vec![to_json(&rep)], fails))
}

fn default_param(name: &str, key: &str) -> f64 {
    lattice::zoo(name, &BTreeMap::new()).ok().and_then(|m| m.params.get(key).copied()).unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_key_is_named() {
        let e = ExperimentConfig::from_toml("model = \"ssh\"\nbogus = 1\n").unwrap_err();
        assert!(e.to_string().contains("bogus"), "{e}");
        let e = ExperimentConfig::from_toml("[disorder]\nstrenght = 0.1\n").unwrap_err();
        assert!(e.to_string().contains("strenght"), "{e}");
    }

    #[test]
    fn grid_cardinality() {
        let cfg = ExperimentConfig::from_toml(
            "task = \"bulk-invariant\"\nmodel = \"kitaev\"\n[grid]\nmu = \"0:4:0.2\"\n[disorder]\nrelative = 0.3\nseeds = \"0..10\"\nclean = false\n",
        )
        .unwrap()
        .resolve()
        .unwrap();
        assert_eq!(jobs_for(&cfg).unwrap().len(), 210);
        assert_eq!(cfg.grid_points().unwrap()[3]["mu"], 0.6);
    }

    #[test]
    fn bad_params_and_tolerances() {
        let cfg = ExperimentConfig::from_toml("task = \"bb-check\"\nmodel = \"ssh\"\n[params]\nq = 1.0\n").unwrap();
        let e = cfg.resolve().unwrap_err();
        assert!(e.to_string().contains("params.q"), "{e}");
        let mut t = Tolerances::default();
        assert!(t.set("gap=1e-5").is_ok());
        assert!(t.set("nope=1").unwrap_err().to_string().contains("nope"));
    }
}
