//! L-table index over covering or bit-sampling families.
//!
//! A query runs in three steps, each timed separately:
//! - S1 hashes the (transformed) query into one key per table,
//! - S2 walks the matching buckets and deduplicates ids with an epoch-stamped
//!   mark array,
//! - S3 verifies each distinct candidate against the radius.

use alloc::vec::Vec;
use core::time::Duration;

use crate::bitvec::{BitVector, Dataset};
use crate::buckets::BucketTable;
use crate::classic::BitSampleFamily;
use crate::covering::{ConstructionKind, CoveringFamily, MappingRange};
use crate::error::{check_dims, Error, Result};
use crate::modular::Prime;
use crate::rng::{stream_rng, Stream};
use crate::transform::{PreprocessPlan, DEFAULT_TABLE_BUDGET};

/// Default cap on `n * tables`, about 3 GiB of postings.
pub const DEFAULT_POSTING_BUDGET: usize = 1 << 28;

/// Monotonic time source used to split query cost into S1/S2/S3.
pub trait Clock {
    fn now(&self) -> Duration;
}

/// A clock that never advances; all step timings read zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn now(&self) -> Duration {
        Duration::ZERO
    }
}

/// How covering hashes are evaluated. Both paths give identical values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HashPath {
    /// Joint evaluation through the Hadamard transform.
    Fast,
    /// One function at a time.
    Slow,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilySpec {
    Covering { path: HashPath, range: MappingRange },
    Classic { tables: usize, samples: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexConfig {
    pub family: FamilySpec,
    pub prime: Prime,
    pub seed: u64,
    pub table_budget: usize,
    pub posting_budget: usize,
}

impl IndexConfig {
    pub fn covering(path: HashPath, seed: u64) -> Self {
        IndexConfig {
            family: FamilySpec::Covering {
                path,
                range: MappingRange::default(),
            },
            prime: Prime::default(),
            seed,
            table_budget: DEFAULT_TABLE_BUDGET,
            posting_budget: DEFAULT_POSTING_BUDGET,
        }
    }

    pub fn classic(tables: usize, samples: usize, seed: u64) -> Self {
        IndexConfig {
            family: FamilySpec::Classic { tables, samples },
            prime: Prime::default(),
            seed,
            table_budget: DEFAULT_TABLE_BUDGET,
            posting_budget: DEFAULT_POSTING_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartHasher {
    Covering {
        family: CoveringFamily,
        path: HashPath,
    },
    Classic(BitSampleFamily),
}

impl PartHasher {
    pub fn table_count(&self) -> usize {
        match self {
            PartHasher::Covering { family, .. } => family.table_count(),
            PartHasher::Classic(f) => f.table_count(),
        }
    }

    fn hash_into(&self, q: &BitVector, out: &mut [u64], sketch: &mut Vec<u64>) -> Result<()> {
        match self {
            PartHasher::Covering {
                family,
                path: HashPath::Fast,
            } => family.hash_fast_into(q, out, sketch),
            PartHasher::Covering {
                family,
                path: HashPath::Slow,
            } => family.hash_slow_into(q, out),
            PartHasher::Classic(f) => f.hash_all_into(q, out),
        }
    }
}

/// A plan plus one hash family per partition; everything an index needs
/// except the data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scheme {
    plan: PreprocessPlan,
    parts: Vec<PartHasher>,
    offsets: Vec<usize>,
    prime: Prime,
}

impl Scheme {
    /// Part `p` draws its family from the `(seed, Family, p)` stream.
    pub fn build(plan: PreprocessPlan, config: &IndexConfig) -> Result<Self> {
        let mut parts = Vec::with_capacity(plan.parts());
        for p in 0..plan.parts() {
            let mut rng = stream_rng(config.seed, Stream::Family, p as u64);
            let dims = plan.part_dims(p);
            let hasher = match &config.family {
                FamilySpec::Covering { path, range } => {
                    let radius = plan.per_part_radius();
                    let kind = ConstructionKind::for_dims(dims, radius);
                    PartHasher::Covering {
                        family: CoveringFamily::build(dims, radius, kind, *range, config.prime, &mut rng)?,
                        path: *path,
                    }
                }
                FamilySpec::Classic { tables, samples } => PartHasher::Classic(
                    BitSampleFamily::build(dims, *tables, *samples, config.prime, &mut rng)?,
                ),
            };
            parts.push(hasher);
        }
        let mut offsets = Vec::with_capacity(parts.len() + 1);
        let mut total = 0usize;
        offsets.push(0);
        for h in &parts {
            total += h.table_count();
            offsets.push(total);
        }
        if total > config.table_budget {
            return Err(Error::budget(alloc::format!(
                "{total} hash tables exceed the budget of {}",
                config.table_budget
            )));
        }
        Ok(Scheme {
            plan,
            parts,
            offsets,
            prime: config.prime,
        })
    }

    pub fn plan(&self) -> &PreprocessPlan {
        &self.plan
    }

    pub fn parts(&self) -> &[PartHasher] {
        &self.parts
    }

    pub fn total_tables(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    /// Hashes `q` into `out`, partition after partition.
    pub fn hash_into(&self, q: &BitVector, out: &mut Vec<u64>, sketch: &mut Vec<u64>) -> Result<()> {
        let views = self.plan.apply(q)?;
        out.clear();
        out.resize(self.total_tables(), 0);
        for (p, (hasher, view)) in self.parts.iter().zip(&views).enumerate() {
            hasher.hash_into(view, &mut out[self.offsets[p]..self.offsets[p + 1]], sketch)?;
        }
        Ok(())
    }

    pub fn hash(&self, q: &BitVector) -> Result<Vec<u64>> {
        let mut out = Vec::new();
        self.hash_into(q, &mut out, &mut Vec::new())?;
        Ok(out)
    }

    /// Tables (over all partitions) in which `x` and `y` land in the same
    /// bucket.
    pub fn hash_collisions(&self, x: &BitVector, y: &BitVector) -> Result<usize> {
        let hx = self.hash(x)?;
        let hy = self.hash(y)?;
        Ok(hx.iter().zip(&hy).filter(|(a, b)| a == b).count())
    }

    /// Covering functions (over all partitions) whose masks agree on `x`
    /// and `y`. Fails for bit-sampling schemes.
    pub fn mask_collisions(&self, x: &BitVector, y: &BitVector) -> Result<usize> {
        let vx = self.plan.apply(x)?;
        let vy = self.plan.apply(y)?;
        let mut total = 0;
        for (hasher, (a, b)) in self.parts.iter().zip(vx.iter().zip(&vy)) {
            match hasher {
                PartHasher::Covering { family, .. } => total += family.collision_count(a, b)?,
                PartHasher::Classic(_) => {
                    return Err(Error::invalid("mask collisions need a covering family"))
                }
            }
        }
        Ok(total)
    }
}

/// Per-query working memory. Reuse one per thread to avoid reallocating.
#[derive(Debug, Clone, Default)]
pub struct QueryScratch {
    marks: Vec<u32>,
    epoch: u32,
    hashes: Vec<u64>,
    sketch: Vec<u64>,
    candidates: Vec<u32>,
}

impl QueryScratch {
    /// Distinct ids marked in the current round, in first-seen order.
    pub fn candidates(&self) -> &[u32] {
        &self.candidates
    }

    pub fn new() -> Self {
        Self::default()
    }

    /// Starts a fresh deduplication round over ids `0..n`.
    pub(crate) fn begin(&mut self, n: usize) {
        if self.marks.len() < n {
            self.marks.resize(n, 0);
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.marks.fill(0);
            self.epoch = 1;
        }
        self.candidates.clear();
    }

    /// Records `id`; true the first time it is seen this round.
    #[inline]
    pub(crate) fn mark(&mut self, id: u32) -> bool {
        let slot = &mut self.marks[id as usize];
        if *slot == self.epoch {
            false
        } else {
            *slot = self.epoch;
            self.candidates.push(id);
            true
        }
    }
}

/// Cost counters of one query.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueryReport {
    /// Posting entries touched, duplicates included.
    pub collisions: u64,
    /// Distinct ids after deduplication.
    pub candidates: u64,
    /// Candidates within the radius.
    pub found: u64,
    pub time_s1: Duration,
    pub time_s2: Duration,
    pub time_s3: Duration,
}

impl QueryReport {
    /// Equality of the counters, ignoring timings.
    pub fn same_counts(&self, other: &QueryReport) -> bool {
        (self.collisions, self.candidates, self.found)
            == (other.collisions, other.candidates, other.found)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryResult {
    /// Ids within the radius, ascending.
    pub ids: Vec<u32>,
    pub report: QueryReport,
}

/// Anything that answers r-near-neighbor queries over a dataset.
pub trait RangeSearch {
    fn dataset(&self) -> &Dataset;

    fn query_r_nn(
        &self,
        q: &BitVector,
        r: usize,
        scratch: &mut QueryScratch,
        clock: &dyn Clock,
    ) -> Result<QueryResult>;
}

/// Shared S3: keeps candidates within `r`, sorted by id.
pub(crate) fn verify(dataset: &Dataset, q: &BitVector, r: usize, candidates: &[u32]) -> Vec<u32> {
    let mut found: Vec<u32> = candidates
        .iter()
        .copied()
        .filter(|&id| dataset.point(id).distance_unchecked(q) <= r)
        .collect();
    found.sort_unstable();
    found
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexStats {
    pub partitions: usize,
    pub tables: usize,
    pub postings: usize,
    pub buckets: usize,
    pub heap_bytes: usize,
}

pub struct IndexSet<'a> {
    dataset: &'a Dataset,
    scheme: Scheme,
    tables: Vec<BucketTable>,
}

impl<'a> IndexSet<'a> {
    pub fn build(dataset: &'a Dataset, plan: PreprocessPlan, config: &IndexConfig) -> Result<Self> {
        if dataset.is_empty() {
            return Err(Error::invalid("cannot index an empty dataset"));
        }
        check_dims(plan.dims(), dataset.dims())?;
        let scheme = Scheme::build(plan, config)?;
        let n = dataset.len();
        let total = scheme.total_tables();
        if total.saturating_mul(n) > config.posting_budget {
            return Err(Error::budget(alloc::format!(
                "{n} points x {total} tables exceed the posting budget of {}",
                config.posting_budget
            )));
        }

        let mut keys: Vec<Vec<u64>> = (0..total).map(|_| alloc::vec![0u64; n]).collect();
        let mut hashes = Vec::with_capacity(total);
        let mut sketch = Vec::new();
        for (id, point) in dataset.points().iter().enumerate() {
            scheme.hash_into(point, &mut hashes, &mut sketch)?;
            for (table, &h) in keys.iter_mut().zip(&hashes) {
                table[id] = h;
            }
        }
        let key_limit = config.prime.get() - 1;
        let tables = keys
            .into_iter()
            .map(|k| BucketTable::from_keys(k, key_limit))
            .collect();
        Ok(IndexSet {
            dataset,
            scheme,
            tables,
        })
    }

    pub fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    pub fn plan(&self) -> &PreprocessPlan {
        self.scheme.plan()
    }

    pub fn table(&self, index: usize) -> &BucketTable {
        &self.tables[index]
    }

    pub fn total_tables(&self) -> usize {
        self.tables.len()
    }

    pub fn stats(&self) -> IndexStats {
        IndexStats {
            partitions: self.scheme.parts.len(),
            tables: self.tables.len(),
            postings: self.tables.iter().map(BucketTable::len).sum(),
            buckets: self.tables.iter().map(BucketTable::bucket_count).sum(),
            heap_bytes: self.tables.iter().map(BucketTable::heap_bytes).sum(),
        }
    }

    /// S1 and S2: distinct candidate ids in first-seen order and the number
    /// of postings touched.
    pub fn query_candidates(&self, q: &BitVector, scratch: &mut QueryScratch) -> Result<(Vec<u32>, u64)> {
        check_dims(self.dataset.dims(), q.dims())?;
        self.hash_step(q, scratch)?;
        let collisions = self.gather_step(scratch);
        Ok((scratch.candidates.clone(), collisions))
    }

    fn hash_step(&self, q: &BitVector, scratch: &mut QueryScratch) -> Result<()> {
        let QueryScratch { hashes, sketch, .. } = scratch;
        self.scheme.hash_into(q, hashes, sketch)
    }

    fn gather_step(&self, scratch: &mut QueryScratch) -> u64 {
        scratch.begin(self.dataset.len());
        let mut collisions = 0u64;
        for (table, i) in self.tables.iter().zip(0..) {
            let ids = table.lookup(scratch.hashes[i]);
            collisions += ids.len() as u64;
            for &id in ids {
                scratch.mark(id);
            }
        }
        collisions
    }

    /// Strategy 1: stop once `stop_after` postings (duplicates counted) have
    /// been retrieved, scanning tables in order, and return the closest
    /// retrieved point with its distance. Ties go to the lower id.
    pub fn query_c_r_nn(
        &self,
        q: &BitVector,
        stop_after: usize,
        scratch: &mut QueryScratch,
    ) -> Result<Option<(u32, usize)>> {
        check_dims(self.dataset.dims(), q.dims())?;
        self.hash_step(q, scratch)?;
        let mut best: Option<(usize, u32)> = None;
        let mut retrieved = 0usize;
        'tables: for (table, i) in self.tables.iter().zip(0..) {
            for &id in table.lookup(scratch.hashes[i]) {
                if retrieved >= stop_after {
                    break 'tables;
                }
                retrieved += 1;
                let d = self.dataset.point(id).distance_unchecked(q);
                if best.is_none_or(|b| (d, id) < b) {
                    best = Some((d, id));
                }
            }
        }
        Ok(best.map(|(d, id)| (id, d)))
    }

    /// The Strategy 1 retrieval limit, three postings per table.
    pub fn strategy1_limit(&self) -> usize {
        3 * self.tables.len()
    }
}

impl RangeSearch for IndexSet<'_> {
    fn dataset(&self) -> &Dataset {
        self.dataset
    }

    /// Strategy 2: report every distinct candidate within distance `r`.
    fn query_r_nn(
        &self,
        q: &BitVector,
        r: usize,
        scratch: &mut QueryScratch,
        clock: &dyn Clock,
    ) -> Result<QueryResult> {
        check_dims(self.dataset.dims(), q.dims())?;
        let t0 = clock.now();
        self.hash_step(q, scratch)?;
        let t1 = clock.now();
        let collisions = self.gather_step(scratch);
        let t2 = clock.now();
        let ids = verify(self.dataset, q, r, &scratch.candidates);
        let t3 = clock.now();
        Ok(QueryResult {
            report: QueryReport {
                collisions,
                candidates: scratch.candidates.len() as u64,
                found: ids.len() as u64,
                time_s1: t1 - t0,
                time_s2: t2 - t1,
                time_s3: t3 - t2,
            },
            ids,
        })
    }
}

/// Exhaustive scan; every point is a candidate.
pub struct LinearScan<'a> {
    dataset: &'a Dataset,
}

impl<'a> LinearScan<'a> {
    pub fn new(dataset: &'a Dataset) -> Self {
        LinearScan { dataset }
    }
}

impl RangeSearch for LinearScan<'_> {
    fn dataset(&self) -> &Dataset {
        self.dataset
    }

    fn query_r_nn(
        &self,
        q: &BitVector,
        r: usize,
        _scratch: &mut QueryScratch,
        clock: &dyn Clock,
    ) -> Result<QueryResult> {
        let t0 = clock.now();
        let ids = self.dataset.within(q, r)?;
        let t1 = clock.now();
        let n = self.dataset.len() as u64;
        Ok(QueryResult {
            report: QueryReport {
                collisions: n,
                candidates: n,
                found: ids.len() as u64,
                time_s1: Duration::ZERO,
                time_s2: Duration::ZERO,
                time_s3: t1 - t0,
            },
            ids,
        })
    }
}
