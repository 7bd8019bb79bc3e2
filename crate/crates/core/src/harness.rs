//! Experiment runner: seeded trials of one algorithm on one instance, each
//! judged by an exact reference, aggregated into a report.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bst::{natural, noisy_sort, repetition_sort, Located, OrderedTree};
use crate::delaunay;
use crate::error::{Error, Result};
use crate::hull::convex_hull_2d;
use crate::instance::{generate_instance, Instance, Kind};
use crate::noise::{derive_seed, NoiseStats, NoisyContext};
use crate::oracle;
use crate::predicates::{Point2, RatPoint, COORD_BOUND};
use crate::sweep::{closest_pair, intersect_segments, SweepOptions, SweepTrapezoid};
use crate::trapezoid::{build_trap_map, build_with_order, TrapKey};
use crate::Params;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Sort points lexicographically by noisy tree insertion.
    Sort,
    /// Merge sort with every comparison amplified.
    SortBaseline,
    /// Noisy searches in a fixed balanced tree.
    BstSearch,
    Trapmap,
    Sweep,
    ClosestPair,
    Hull,
    Delaunay,
    Emst,
}

impl Algorithm {
    pub const ALL: [Algorithm; 9] = [
        Algorithm::Sort,
        Algorithm::SortBaseline,
        Algorithm::BstSearch,
        Algorithm::Trapmap,
        Algorithm::Sweep,
        Algorithm::ClosestPair,
        Algorithm::Hull,
        Algorithm::Delaunay,
        Algorithm::Emst,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Sort => "sort",
            Algorithm::SortBaseline => "sort-baseline",
            Algorithm::BstSearch => "bst-search",
            Algorithm::Trapmap => "trapmap",
            Algorithm::Sweep => "sweep",
            Algorithm::ClosestPair => "closest-pair",
            Algorithm::Hull => "hull",
            Algorithm::Delaunay => "delaunay",
            Algorithm::Emst => "emst",
        }
    }

    pub fn default_kind(self) -> Kind {
        match self {
            Algorithm::Trapmap => Kind::SegmentsNoncrossing,
            Algorithm::Sweep => Kind::SegmentsCrossing,
            _ => Kind::PointsUniform,
        }
    }

    pub fn wants_segments(self) -> bool {
        matches!(self, Algorithm::Trapmap | Algorithm::Sweep)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase().replace('_', "-");
        let alias = match s.as_str() {
            "bst" => "bst-search",
            "trapezoid" | "trapezoid-map" => "trapmap",
            "intersect" | "segments" => "sweep",
            "hull2d" => "hull",
            "closest" => "closest-pair",
            other => other,
        };
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == alias)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown algorithm {s}")))
    }
}

/// Where the instance comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSource {
    /// Generated from `(kind, n, seed)`; `None` picks the algorithm's default.
    Generated(Option<Kind>),
    Given(Instance),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub algo: Algorithm,
    pub n: usize,
    pub p: f64,
    pub c: f64,
    pub seed: u64,
    pub trials: u64,
    pub source: InstanceSource,
    pub emit_trapezoids: bool,
    pub instrumented: bool,
    /// Point-location queries per trial (trapmap, default none) or
    /// searches per trial (bst-search, default one per key).
    pub queries: usize,
    pub params: Params,
}

impl ExperimentConfig {
    pub fn new(algo: Algorithm, n: usize, p: f64, seed: u64, trials: u64) -> Self {
        ExperimentConfig {
            algo,
            n,
            p,
            c: Params::default().c,
            seed,
            trials,
            source: InstanceSource::Generated(None),
            emit_trapezoids: false,
            instrumented: false,
            queries: 0,
            params: Params::default(),
        }
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self.params.c = c;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.p) {
            return Err(Error::InvalidNoiseLevel(self.p));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.c.is_nan() || self.c <= 0.0 {
            return Err(Error::InvalidConfig(format!("c = {} must be positive", self.c)));
        }
        Ok(())
    }

    /// Loads or generates the instance.
    pub fn instance(&self) -> Result<Instance> {
        let inst = match &self.source {
            InstanceSource::Given(i) => i.clone(),
            InstanceSource::Generated(kind) => {
                generate_instance(kind.unwrap_or(self.algo.default_kind()), self.n, self.seed)?
            }
        };
        if inst.kind().is_segments() != self.algo.wants_segments() {
            return Err(Error::InvalidConfig(format!("{} cannot run on a {} instance", self.algo, inst.kind())));
        }
        Ok(inst)
    }
}

/// One trial. Wall time lives in [`ExperimentReport::seconds`] so that the
/// records themselves replay byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub success: bool,
    pub calls: u64,
    pub consultations: u64,
    pub walks: u64,
    pub retries: u64,
    pub stay_pushes: u64,
    /// Output or structure size: crossings, map leaves, DAG nodes, hull
    /// vertices.
    pub size: u64,
    pub queries: u64,
    pub query_agree: u64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub algo: Algorithm,
    pub kind: String,
    pub n: usize,
    pub p: f64,
    pub c: f64,
    pub seed: u64,
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    pub mean_calls: f64,
    pub p95_calls: u64,
    pub mean_consultations: f64,
    pub p95_consultations: u64,
    pub total_retries: u64,
    pub mean_size: f64,
    /// The quantity calls are normalized by, e.g. `n log2 n`.
    pub normalizer: f64,
    pub normalizer_name: String,
    pub calls_ratio: f64,
    pub queries: u64,
    pub query_agree: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub summary: Summary,
    pub records: Vec<TrialRecord>,
    #[serde(skip)]
    pub seconds: Vec<f64>,
}

pub const CSV_HEADER: &str =
    "trial,seed,success,calls,consultations,walks,retries,stay_pushes,size,queries,query_agree,error";

impl ExperimentReport {
    pub fn success_rate(&self) -> f64 {
        self.summary.success_rate
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.records {
            let err = r.error.as_deref().unwrap_or("").replace([',', '\n', '"'], " ");
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.trial,
                r.seed,
                r.success,
                r.calls,
                r.consultations,
                r.walks,
                r.retries,
                r.stay_pushes,
                r.size,
                r.queries,
                r.query_agree,
                err
            ));
        }
        s
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary).expect("summary serializes")
    }

    pub fn timing_csv(&self) -> String {
        let mut s = String::from("trial,seconds\n");
        for (i, t) in self.seconds.iter().enumerate() {
            s.push_str(&format!("{i},{t:.6}\n"));
        }
        s
    }

    /// Writes `<stem>.csv`, `<stem>.json` and `<stem>.timing.csv`.
    pub fn write(&self, stem: &std::path::Path) -> Result<()> {
        let with = |ext: &str| {
            let mut p = stem.as_os_str().to_owned();
            p.push(ext);
            std::path::PathBuf::from(p)
        };
        std::fs::write(with(".csv"), self.to_csv())?;
        std::fs::write(with(".json"), self.summary_json() + "\n")?;
        std::fs::write(with(".timing.csv"), self.timing_csv())?;
        Ok(())
    }
}

/// Exact answers shared by every trial.
enum Reference {
    Sorted(Vec<Point2>),
    Search(OrderedTree<Point2>),
    Trapmap,
    Crossings(Vec<(usize, usize, RatPoint)>, Option<Vec<SweepTrapezoid>>),
    Closest(Point2, Point2),
    Hull(Vec<Point2>),
    Delaunay,
    Emst(Vec<(usize, usize)>),
}

fn reference(cfg: &ExperimentConfig, inst: &Instance) -> Result<Reference> {
    Ok(match cfg.algo {
        Algorithm::Sort | Algorithm::SortBaseline => {
            let mut v = inst.points()?.to_vec();
            v.sort();
            Reference::Sorted(v)
        }
        Algorithm::BstSearch => {
            let pts = inst.points()?;
            let mut t = OrderedTree::with_scale(pts.len());
            let mut ctx = NoisyContext::exact();
            for &p in pts {
                t.insert(p, &natural, &mut ctx, &cfg.params)?;
            }
            Reference::Search(t)
        }
        Algorithm::Trapmap => Reference::Trapmap,
        Algorithm::Sweep => {
            let segs = inst.segments()?;
            let traps = if cfg.emit_trapezoids {
                let opts = SweepOptions { emit_trapezoids: true, instrumented: false };
                intersect_segments(segs, &mut NoisyContext::exact(), &cfg.params, opts)?.trapezoids
            } else {
                None
            };
            Reference::Crossings(oracle::all_crossings(segs), traps)
        }
        Algorithm::ClosestPair => {
            let pts = inst.points()?;
            let (i, j) = oracle::closest_pair(pts).ok_or(Error::TooFewPoints { needed: 2, got: pts.len() })?;
            Reference::Closest(pts[i].min(pts[j]), pts[i].max(pts[j]))
        }
        Algorithm::Hull => Reference::Hull(oracle::convex_hull(inst.points()?)),
        Algorithm::Delaunay => Reference::Delaunay,
        Algorithm::Emst => Reference::Emst(oracle::emst(inst.points()?)),
    })
}

struct Outcome {
    success: bool,
    size: u64,
    queries: u64,
    query_agree: u64,
}

impl Outcome {
    fn plain(success: bool, size: u64) -> Self {
        Outcome { success, size, queries: 0, query_agree: 0 }
    }
}

fn run_trial(cfg: &ExperimentConfig, inst: &Instance, refr: &Reference, ctx: &mut NoisyContext) -> Result<Outcome> {
    let params = &cfg.params;
    let lex = |a: &Point2, b: &Point2| Ok(a.cmp(b));
    match (cfg.algo, refr) {
        (Algorithm::Sort, Reference::Sorted(want)) => {
            let got = noisy_sort(inst.points()?, &lex, ctx, params)?;
            Ok(Outcome::plain(&got == want, got.len() as u64))
        }
        (Algorithm::SortBaseline, Reference::Sorted(want)) => {
            let got = repetition_sort(inst.points()?, &lex, ctx, params)?;
            Ok(Outcome::plain(&got == want, got.len() as u64))
        }
        (Algorithm::BstSearch, Reference::Search(tree)) => {
            let pts = inst.points()?;
            let count = if cfg.queries == 0 { pts.len() } else { cfg.queries };
            let mut pick = ChaCha8Rng::seed_from_u64(ctx.seed() ^ 0x5ea7c4);
            let mut agree = 0;
            for _ in 0..count {
                // alternate stored keys and absent keys
                let q = if pick.gen::<bool>() {
                    pts[pick.gen_range(0..pts.len())]
                } else {
                    Point2::new(pick.gen_range(-COORD_BOUND..=COORD_BOUND), pick.gen_range(-COORD_BOUND..=COORD_BOUND))
                };
                let got = tree.search(&q, &natural, ctx, params)?;
                let want = tree.exact_locate(&q, &natural)?;
                agree += u64::from(same_location(got, want));
            }
            let ok = agree == count as u64;
            Ok(Outcome { success: ok, size: tree.len() as u64, queries: count as u64, query_agree: agree })
        }
        (Algorithm::Trapmap, _) => {
            let segs = inst.segments()?;
            let map = build_trap_map(segs, ctx, params)?;
            let mut exact = NoisyContext::exact();
            let replay = build_with_order(segs, map.insertion_order(), &mut exact, params)?;
            let leaves = map.canonical_leaves();
            let n = segs.len() as u64;
            let mut ok = leaves == replay.canonical_leaves() && leaves.len() as u64 <= 3 * n + 1;
            if cfg.instrumented {
                ok &= leaves == oracle::trapezoid_decomposition(segs);
            }
            let count = cfg.queries as u64;
            let mut agree = 0;
            let xs: std::collections::HashSet<i64> = segs.iter().flat_map(|s| [s.a.x, s.b.x]).collect();
            let mut pick = ChaCha8Rng::seed_from_u64(ctx.seed() ^ 0x9e0c1);
            let b = crate::trapezoid::BOX - 1;
            let mut done = 0;
            while done < count {
                let q = Point2::new(pick.gen_range(-b..=b), pick.gen_range(-b..=b));
                if xs.contains(&q.x) {
                    continue;
                }
                // points on a supporting line make the exact query fail; redraw
                let want: TrapKey = match replay.query(q, &mut exact, params) {
                    Ok(id) => replay.key(id),
                    Err(Error::GeneralPositionViolation(_)) => continue,
                    Err(e) => return Err(e),
                };
                done += 1;
                if let Ok(id) = map.query(q, ctx, params) {
                    agree += u64::from(map.key(id) == want);
                }
            }
            Ok(Outcome { success: ok, size: leaves.len() as u64, queries: count, query_agree: agree })
        }
        (Algorithm::Sweep, Reference::Crossings(want, traps)) => {
            let opts = SweepOptions { emit_trapezoids: cfg.emit_trapezoids, instrumented: cfg.instrumented };
            let out = intersect_segments(inst.segments()?, ctx, params, opts)?;
            let ok = &out.crossings == want && out.trapezoids == *traps;
            Ok(Outcome::plain(ok, out.crossings.len() as u64))
        }
        (Algorithm::ClosestPair, Reference::Closest(a, b)) => {
            let got = closest_pair(inst.points()?, ctx, params)?;
            Ok(Outcome::plain(got == (*a, *b), 2))
        }
        (Algorithm::Hull, Reference::Hull(want)) => {
            let pts = inst.points()?;
            let got = convex_hull_2d(pts, ctx, params)?;
            let ok = &got == want && oracle::check_hull(pts, &got).is_ok();
            Ok(Outcome::plain(ok, got.len() as u64))
        }
        (Algorithm::Delaunay, _) => {
            let pts = inst.points()?;
            let dt = delaunay::build_delaunay(pts, ctx, params)?;
            let tris = dt.result().triangles;
            let mut ok = oracle::check_delaunay(pts, &tris).is_ok();
            if cfg.instrumented {
                ok &= oracle::empty_circumcircles(pts, &tris);
            }
            Ok(Outcome::plain(ok, dt.node_count() as u64))
        }
        (Algorithm::Emst, Reference::Emst(want)) => {
            let got = delaunay::emst(inst.points()?, ctx, params)?;
            Ok(Outcome::plain(&got == want, got.len() as u64))
        }
        _ => Err(Error::InvalidConfig("reference does not match the algorithm".into())),
    }
}

fn same_location(a: Located, b: Located) -> bool {
    match (a, b) {
        (Located::Found(x), Located::Found(y)) => x == y,
        (Located::Vacant { parent: p, side: s }, Located::Vacant { parent: q, side: t }) => p == q && s == t,
        _ => false,
    }
}

/// Runs all trials. Module errors become failed trials; only invalid
/// configurations and unusable instances abort.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let inst = cfg.instance()?;
    run_on_instance(cfg, &inst)
}

pub fn run_on_instance(cfg: &ExperimentConfig, inst: &Instance) -> Result<ExperimentReport> {
    cfg.validate()?;
    let refr = reference(cfg, inst)?;
    let rows: Vec<(TrialRecord, f64)> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let seed = derive_seed(cfg.seed, trial);
            let mut ctx = NoisyContext::new(cfg.p, seed)?;
            let start = std::time::Instant::now();
            let res = run_trial(cfg, inst, &refr, &mut ctx);
            let secs = start.elapsed().as_secs_f64();
            let st: NoiseStats = ctx.stats();
            let (success, size, queries, query_agree, error) = match res {
                Ok(o) => (o.success, o.size, o.queries, o.query_agree, None),
                Err(e) => (false, 0, 0, 0, Some(e.to_string())),
            };
            let rec = TrialRecord {
                trial,
                seed,
                success,
                calls: st.calls,
                consultations: st.consultations,
                walks: st.walks,
                retries: st.retries,
                stay_pushes: st.stay_pushes,
                size,
                queries,
                query_agree,
                error,
            };
            Ok((rec, secs))
        })
        .collect::<Result<_>>()?;
    let (records, seconds): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    let (normalizer, normalizer_name) = normalizer(cfg.algo, inst);
    let summary = summarize(cfg, inst, &records, normalizer, normalizer_name);
    Ok(ExperimentReport { summary, records, seconds })
}

fn log2n(n: usize) -> f64 {
    (n.max(2) as f64).log2()
}

fn normalizer(algo: Algorithm, inst: &Instance) -> (f64, String) {
    let n = inst.len();
    match (algo, inst) {
        (Algorithm::Sweep, Instance::Segments { segments, .. }) => {
            let k = oracle::all_crossings(segments).len();
            ((n + k) as f64 * log2n(n), "(n+k)log2n".into())
        }
        _ => (n as f64 * log2n(n), "nlog2n".into()),
    }
}

fn percentile95(mut v: Vec<u64>) -> u64 {
    if v.is_empty() {
        return 0;
    }
    v.sort_unstable();
    let idx = ((v.len() as f64) * 0.95).ceil() as usize;
    v[idx.clamp(1, v.len()) - 1]
}

fn summarize(
    cfg: &ExperimentConfig,
    inst: &Instance,
    records: &[TrialRecord],
    normalizer: f64,
    normalizer_name: String,
) -> Summary {
    let t = records.len().max(1) as f64;
    let successes = records.iter().filter(|r| r.success).count() as u64;
    let mean = |f: &dyn Fn(&TrialRecord) -> u64| records.iter().map(|r| f(r) as f64).sum::<f64>() / t;
    let mean_calls = mean(&|r| r.calls);
    Summary {
        algo: cfg.algo,
        kind: inst.kind().name().to_string(),
        n: inst.len(),
        p: cfg.p,
        c: cfg.c,
        seed: cfg.seed,
        trials: cfg.trials,
        successes,
        success_rate: successes as f64 / t,
        mean_calls,
        p95_calls: percentile95(records.iter().map(|r| r.calls).collect()),
        mean_consultations: mean(&|r| r.consultations),
        p95_consultations: percentile95(records.iter().map(|r| r.consultations).collect()),
        total_retries: records.iter().map(|r| r.retries).sum(),
        mean_size: mean(&|r| r.size),
        normalizer,
        normalizer_name,
        calls_ratio: mean_calls / normalizer,
        queries: records.iter().map(|r| r.queries).sum(),
        query_agree: records.iter().map(|r| r.query_agree).sum(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub success_rate: f64,
    pub mean_calls: f64,
    pub normalizer: f64,
    pub calls_ratio: f64,
    pub mean_size: f64,
    /// `mean_size / n`, e.g. DAG nodes per input item.
    pub size_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub algo: Algorithm,
    pub rows: Vec<ScalingRow>,
    /// Largest relative deviation of `calls_ratio` from its mean.
    pub calls_ratio_spread: f64,
    pub size_ratio_spread: f64,
}

fn spread(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len().max(1) as f64;
    v.iter().map(|x| (x - m).abs() / m).fold(0.0, f64::max)
}

/// Runs the same experiment at several sizes, each on its own generated
/// instance.
pub fn scaling(base: &ExperimentConfig, ns: &[usize]) -> Result<ScalingReport> {
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let cfg = ExperimentConfig { n, ..base.clone() };
        let rep = run_experiment(&cfg)?;
        let s = &rep.summary;
        rows.push(ScalingRow {
            n: s.n,
            success_rate: s.success_rate,
            mean_calls: s.mean_calls,
            normalizer: s.normalizer,
            calls_ratio: s.calls_ratio,
            mean_size: s.mean_size,
            size_ratio: s.mean_size / s.n as f64,
        });
    }
    let cr: Vec<f64> = rows.iter().map(|r| r.calls_ratio).collect();
    let sr: Vec<f64> = rows.iter().map(|r| r.size_ratio).collect();
    Ok(ScalingReport { algo: base.algo, calls_ratio_spread: spread(&cr), size_ratio_spread: spread(&sr), rows })
}

impl ScalingReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,success_rate,mean_calls,normalizer,calls_ratio,mean_size,size_ratio\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.n, r.success_rate, r.mean_calls, r.normalizer, r.calls_ratio, r.mean_size, r.size_ratio
            ));
        }
        s
    }
}
