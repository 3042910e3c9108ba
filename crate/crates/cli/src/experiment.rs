//! Experiment runner: build one method's index, answer every query with
//! full verification, and score the answers against ground truth.

use std::str::FromStr;
use std::time::{Duration, Instant};

use fclsh_core::mih::default_parts;
use fclsh_core::rng::{derive_seed, stream_rng, Stream};
use fclsh_core::transform::make_plan;
use fclsh_core::{
    choose_k, Dataset, HashPath, IndexConfig, IndexSet, LinearScan, MihIndex, PlanOverride,
    PreprocessPlan, QueryScratch, RangeSearch,
};
use log::info;

use crate::clock::MonotonicClock;
use crate::error::{CliError, Result};
use crate::format::MetricsRow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    /// Covering LSH, hashes through the Hadamard transform.
    Fclsh,
    /// Covering LSH, one hash function at a time.
    Bclsh,
    /// Bit-sampling LSH.
    Classic,
    /// Multi-index hashing.
    Mih,
    /// Exhaustive scan.
    Linear,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Fclsh => "fclsh",
            Method::Bclsh => "bclsh",
            Method::Classic => "classic",
            Method::Mih => "mih",
            Method::Linear => "linear",
        }
    }

    /// Methods whose index depends on random draws.
    pub fn is_randomized(self) -> bool {
        matches!(self, Method::Fclsh | Method::Bclsh | Method::Classic)
    }
}

/// How repeats pick their seeds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum SeedMode {
    /// Each repeat derives its own seed from the base seed.
    #[default]
    Fresh,
    /// Every repeat reuses the base seed.
    Fixed,
}

/// Dimension transform for the covering methods.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum PlanChoice {
    /// Pick replication or partitioning from `c`, `r` and `n`.
    #[default]
    Auto,
    Identity,
    Replicate(usize),
    Partition(usize),
}

impl FromStr for PlanChoice {
    type Err = CliError;

    /// `auto`, `identity`, `replicate:T` or `partition:T`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || CliError::Usage(format!("plan `{s}` is not auto, identity, replicate:T or partition:T"));
        match s.split_once(':') {
            None if s == "auto" => Ok(PlanChoice::Auto),
            None if s == "identity" => Ok(PlanChoice::Identity),
            Some((kind, t)) => {
                let t: usize = t.parse().map_err(|_| bad())?;
                match kind {
                    "replicate" => Ok(PlanChoice::Replicate(t)),
                    "partition" => Ok(PlanChoice::Partition(t)),
                    _ => Err(bad()),
                }
            }
            None => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub method: Method,
    pub r: usize,
    /// Approximation ratio used when choosing a transform.
    pub c: f64,
    /// Target false-negative rate for bit sampling.
    pub delta: f64,
    /// Bit-sampling table count; defaults to `2^(r+1) - 1`.
    pub tables: Option<usize>,
    /// Bits per bit-sampling table; defaults to the value meeting `delta`.
    pub samples: Option<usize>,
    /// MIH substring count; defaults to `ceil(d / log2 n)`.
    pub parts: Option<usize>,
    pub plan: Option<PlanChoice>,
    pub seed: u64,
    pub repeats: usize,
    pub seed_mode: SeedMode,
}

impl ExperimentConfig {
    pub fn new(method: Method, r: usize) -> Self {
        ExperimentConfig {
            method,
            r,
            c: 1.0,
            delta: 0.1,
            tables: None,
            samples: None,
            parts: None,
            plan: None,
            seed: 0,
            repeats: 5,
            seed_mode: SeedMode::Fresh,
        }
    }

    /// Rejects flags that do not apply to the method and out-of-range values.
    pub fn validate(&self, data: &Dataset, queries: &Dataset) -> Result<()> {
        let usage = |msg: String| Err(CliError::Usage(msg));
        let m = self.method.name();
        if data.is_empty() {
            return usage("the dataset is empty".into());
        }
        if queries.dims() != data.dims() {
            return usage(format!(
                "queries have {} bits, the dataset {}",
                queries.dims(),
                data.dims()
            ));
        }
        if self.r > data.dims() {
            return usage(format!("radius {} exceeds the dimension {}", self.r, data.dims()));
        }
        if self.repeats == 0 {
            return usage("repeats must be at least 1".into());
        }
        if !(self.c.is_finite() && self.c >= 1.0) {
            return usage(format!("c = {} must be a finite value >= 1", self.c));
        }
        let covering = matches!(self.method, Method::Fclsh | Method::Bclsh);
        if self.plan.is_some() && !covering {
            return usage(format!("--plan does not apply to {m}"));
        }
        if (self.tables.is_some() || self.samples.is_some()) && self.method != Method::Classic {
            return usage(format!("--tables and --samples do not apply to {m}"));
        }
        if self.parts.is_some() && self.method != Method::Mih {
            return usage(format!("--parts does not apply to {m}"));
        }
        if self.method == Method::Classic && !(self.delta > 0.0 && self.delta < 1.0) {
            return usage(format!("delta = {} must lie in (0, 1)", self.delta));
        }
        if self.tables == Some(0) || self.samples == Some(0) || self.parts == Some(0) {
            return usage("table, sample and part counts must be positive".into());
        }
        Ok(())
    }

    /// Seed of repeat `rep`.
    pub fn run_seed(&self, rep: usize) -> u64 {
        match self.seed_mode {
            SeedMode::Fixed => self.seed,
            SeedMode::Fresh => derive_seed(self.seed, Stream::Run, rep as u64),
        }
    }
}

/// A built index for one method.
pub enum Searcher<'a> {
    Index(IndexSet<'a>),
    Mih(MihIndex<'a>),
    Linear(LinearScan<'a>),
}

impl Searcher<'_> {
    pub fn as_search(&self) -> &dyn RangeSearch {
        match self {
            Searcher::Index(i) => i,
            Searcher::Mih(m) => m,
            Searcher::Linear(l) => l,
        }
    }

    /// One-line description of the index shape.
    pub fn describe(&self) -> String {
        match self {
            Searcher::Index(i) => {
                let s = i.stats();
                format!(
                    "{:?} plan x{}, {} partitions, {} tables, {} postings, {} buckets, {:.1} MiB",
                    i.plan().kind(),
                    i.plan().factor(),
                    s.partitions,
                    s.tables,
                    s.postings,
                    s.buckets,
                    s.heap_bytes as f64 / (1 << 20) as f64
                )
            }
            Searcher::Mih(m) => format!("{} substrings", m.parts()),
            Searcher::Linear(_) => "linear scan".into(),
        }
    }
}

pub fn covering_plan(cfg: &ExperimentConfig, data: &Dataset, seed: u64) -> Result<PreprocessPlan> {
    let (d, r) = (data.dims(), cfg.r as u32);
    let mut rng = stream_rng(seed, Stream::Permutation, 0);
    let plan = match cfg.plan.unwrap_or_default() {
        PlanChoice::Identity => PreprocessPlan::identity(d, r),
        PlanChoice::Auto if r == 0 || data.len() < 2 => PreprocessPlan::identity(d, r),
        PlanChoice::Auto => make_plan(d, r, cfg.c, data.len(), None, &mut rng)?,
        PlanChoice::Replicate(t) => {
            make_plan(d, r, cfg.c, data.len().max(2), Some(PlanOverride::Replicate(t)), &mut rng)?
        }
        PlanChoice::Partition(t) => {
            make_plan(d, r, cfg.c, data.len().max(2), Some(PlanOverride::Partition(t)), &mut rng)?
        }
    };
    Ok(plan)
}

/// `(tables, samples)` for bit sampling.
pub fn classic_shape(cfg: &ExperimentConfig, dims: usize) -> Result<(usize, usize)> {
    let tables = match cfg.tables {
        Some(t) => t,
        None if cfg.r + 1 < usize::BITS as usize => (1usize << (cfg.r + 1)) - 1,
        None => return Err(CliError::Resource(format!("radius {} needs too many tables", cfg.r))),
    };
    let samples = match cfg.samples {
        Some(k) => k,
        None => choose_k(dims, cfg.r, tables, cfg.delta)?,
    };
    Ok((tables, samples))
}

pub fn build_searcher<'a>(cfg: &ExperimentConfig, data: &'a Dataset, seed: u64) -> Result<Searcher<'a>> {
    Ok(match cfg.method {
        Method::Fclsh | Method::Bclsh => {
            let path = if cfg.method == Method::Fclsh { HashPath::Fast } else { HashPath::Slow };
            let plan = covering_plan(cfg, data, seed)?;
            Searcher::Index(IndexSet::build(data, plan, &IndexConfig::covering(path, seed))?)
        }
        Method::Classic => {
            let (tables, samples) = classic_shape(cfg, data.dims())?;
            let plan = PreprocessPlan::identity(data.dims(), cfg.r as u32);
            Searcher::Index(IndexSet::build(data, plan, &IndexConfig::classic(tables, samples, seed))?)
        }
        Method::Mih => {
            let parts = cfg.parts.unwrap_or_else(|| default_parts(data.dims(), data.len()));
            Searcher::Mih(MihIndex::build(data, parts)?)
        }
        Method::Linear => Searcher::Linear(LinearScan::new(data)),
    })
}

/// Ids present in both ascending lists.
fn overlap(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

#[derive(Debug, Clone, Default)]
struct Accumulator {
    collisions: f64,
    candidates: f64,
    found: f64,
    precision: f64,
    recall: f64,
    s1: Duration,
    s2: Duration,
    s3: Duration,
}

/// Runs `cfg.repeats` builds and returns one averaged row per query.
/// `truth[q]` lists the ids within `cfg.r` of query `q`, ascending.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    data: &Dataset,
    queries: &Dataset,
    truth: &[Vec<u32>],
) -> Result<Vec<MetricsRow>> {
    cfg.validate(data, queries)?;
    if truth.len() != queries.len() {
        return Err(CliError::Usage(format!(
            "ground truth covers {} queries, expected {}",
            truth.len(),
            queries.len()
        )));
    }
    if cfg.method.is_randomized() {
        info!("{}: {} repeats, {:?} seed mode, base seed {}", cfg.method.name(), cfg.repeats, cfg.seed_mode, cfg.seed);
    }
    let mut acc = vec![Accumulator::default(); queries.len()];
    let mut scratch = QueryScratch::new();
    for rep in 0..cfg.repeats {
        let seed = cfg.run_seed(rep);
        let started = Instant::now();
        let searcher = build_searcher(cfg, data, seed)?;
        info!(
            "{} run {rep} (seed {seed}): built in {:.2?}: {}",
            cfg.method.name(),
            started.elapsed(),
            searcher.describe()
        );
        let search = searcher.as_search();
        let clock = MonotonicClock::new();
        for ((q, near), a) in queries.points().iter().zip(truth).zip(acc.iter_mut()) {
            let res = search.query_r_nn(q, cfg.r, &mut scratch, &clock)?;
            let tp = overlap(&res.ids, near);
            let rep_ = &res.report;
            a.collisions += rep_.collisions as f64;
            a.candidates += rep_.candidates as f64;
            a.found += rep_.found as f64;
            a.precision += if rep_.candidates == 0 { 1.0 } else { tp as f64 / rep_.candidates as f64 };
            a.recall += if near.is_empty() { 1.0 } else { tp as f64 / near.len() as f64 };
            a.s1 += rep_.time_s1;
            a.s2 += rep_.time_s2;
            a.s3 += rep_.time_s3;
        }
    }
    let runs = cfg.repeats as f64;
    let micros = |d: Duration| d.as_secs_f64() * 1e6 / runs;
    Ok(acc
        .into_iter()
        .zip(truth)
        .enumerate()
        .map(|(qi, (a, near))| MetricsRow {
            query_id: qi as u32,
            method: cfg.method.name().into(),
            r: cfg.r as u32,
            collisions: a.collisions / runs,
            candidates: a.candidates / runs,
            found: a.found / runs,
            true_near: near.len() as u64,
            precision: a.precision / runs,
            recall: a.recall / runs,
            time_s1_us: micros(a.s1),
            time_s2_us: micros(a.s2),
            time_s3_us: micros(a.s3),
        })
        .collect())
}

/// Column means over `rows`.
pub fn mean_row(rows: &[MetricsRow]) -> Option<MetricsRow> {
    let first = rows.first()?;
    let n = rows.len() as f64;
    let avg = |f: fn(&MetricsRow) -> f64| rows.iter().map(f).sum::<f64>() / n;
    Some(MetricsRow {
        query_id: u32::MAX,
        method: first.method.clone(),
        r: first.r,
        collisions: avg(|r| r.collisions),
        candidates: avg(|r| r.candidates),
        found: avg(|r| r.found),
        true_near: rows.iter().map(|r| r.true_near).sum::<u64>() / rows.len() as u64,
        precision: avg(|r| r.precision),
        recall: avg(|r| r.recall),
        time_s1_us: avg(|r| r.time_s1_us),
        time_s2_us: avg(|r| r.time_s2_us),
        time_s3_us: avg(|r| r.time_s3_us),
    })
}
