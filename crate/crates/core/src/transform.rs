//! Radius rescaling before indexing.
//!
//! Covering families prune best when `c * r` is close to `log2 n`. Below
//! that, every point is replicated `t` times so distances (and the radius)
//! scale by `t`. Above it, dimensions are permuted and split into `t` parts;
//! by pigeonhole, a pair within distance `r` is within `floor(r / t)` on at
//! least one part.

use alloc::vec::Vec;
use core::ops::Range;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::bitvec::BitVector;
use crate::error::{check_dims, Error, Result};

/// Default cap on the number of hash tables a plan may require.
pub const DEFAULT_TABLE_BUDGET: usize = 1 << 21;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanKind {
    Identity,
    Replicate,
    Partition,
}

/// Forces the transform and its factor instead of deriving them from
/// `c * r` versus `log2 n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanOverride {
    Replicate(usize),
    Partition(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreprocessPlan {
    kind: PlanKind,
    factor: usize,
    dims: usize,
    radius: u32,
    permutation: Vec<usize>,
    part_bounds: Vec<Range<usize>>,
}

/// Contiguous slices of `[0, dims)`; sizes differ by at most one and the
/// larger slices come last.
pub(crate) fn balanced_bounds(dims: usize, parts: usize) -> Vec<Range<usize>> {
    let base = dims / parts;
    let larger = dims % parts;
    let mut start = 0;
    (0..parts)
        .map(|p| {
            let len = base + usize::from(p >= parts - larger);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

fn covering_tables(radius: u32) -> usize {
    if radius >= usize::BITS - 1 {
        usize::MAX
    } else {
        (1usize << (radius + 1)) - 1
    }
}

impl PreprocessPlan {
    pub fn identity(dims: usize, radius: u32) -> Self {
        PreprocessPlan {
            kind: PlanKind::Identity,
            factor: 1,
            dims,
            radius,
            permutation: (0..dims).collect(),
            part_bounds: alloc::vec![0..dims],
        }
    }

    pub fn replicate(dims: usize, radius: u32, times: usize) -> Result<Self> {
        if times == 0 {
            return Err(Error::invalid("replication factor must be at least 1"));
        }
        if times == 1 {
            return Ok(Self::identity(dims, radius));
        }
        if (radius as usize)
            .checked_mul(times)
            .is_none_or(|s| s > u32::MAX as usize)
        {
            return Err(Error::budget("replicated radius overflows"));
        }
        Ok(PreprocessPlan {
            kind: PlanKind::Replicate,
            factor: times,
            dims,
            radius,
            permutation: (0..dims).collect(),
            part_bounds: alloc::vec![0..dims * times],
        })
    }

    /// Splits the permuted dimensions into `parts` slices. `permutation[j]`
    /// names the original dimension placed at position `j`.
    pub fn partition(
        dims: usize,
        radius: u32,
        parts: usize,
        permutation: Vec<usize>,
    ) -> Result<Self> {
        if parts == 0 {
            return Err(Error::invalid("partition count must be at least 1"));
        }
        if parts > dims {
            return Err(Error::invalid(alloc::format!(
                "cannot split {dims} dimensions into {parts} parts"
            )));
        }
        check_dims(dims, permutation.len())?;
        let mut seen = alloc::vec![false; dims];
        for &p in &permutation {
            if p >= dims || core::mem::replace(&mut seen[p], true) {
                return Err(Error::invalid("partition permutation is not a permutation"));
            }
        }
        if parts == 1 {
            return Ok(Self::identity(dims, radius));
        }
        Ok(PreprocessPlan {
            kind: PlanKind::Partition,
            factor: parts,
            dims,
            radius,
            permutation,
            part_bounds: balanced_bounds(dims, parts),
        })
    }

    pub fn kind(&self) -> PlanKind {
        self.kind
    }

    /// Replication factor or partition count (1 for identity).
    pub fn factor(&self) -> usize {
        self.factor
    }

    /// Dimensionality of input points.
    pub fn dims(&self) -> usize {
        self.dims
    }

    /// The query radius the plan was made for.
    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// Slices of the transformed coordinate space, one per index partition.
    pub fn part_bounds(&self) -> &[Range<usize>] {
        &self.part_bounds
    }

    /// Number of independent index partitions.
    pub fn parts(&self) -> usize {
        self.part_bounds.len()
    }

    pub fn part_dims(&self, part: usize) -> usize {
        self.part_bounds[part].len()
    }

    /// Radius each partition's family must cover.
    pub fn per_part_radius(&self) -> u32 {
        match self.kind {
            PlanKind::Identity => self.radius,
            PlanKind::Replicate => self.radius * self.factor as u32,
            PlanKind::Partition => self.radius / self.factor as u32,
        }
    }

    /// Total covering-family tables across partitions.
    pub fn covering_table_count(&self) -> usize {
        covering_tables(self.per_part_radius()).saturating_mul(self.parts())
    }

    /// Transformed views of `q`, one per partition.
    pub fn apply(&self, q: &BitVector) -> Result<Vec<BitVector>> {
        check_dims(self.dims, q.dims())?;
        Ok(match self.kind {
            PlanKind::Identity => alloc::vec![q.clone()],
            PlanKind::Replicate => alloc::vec![q.repeat(self.factor)],
            PlanKind::Partition => self
                .part_bounds
                .iter()
                .map(|b| q.select(&self.permutation[b.clone()]))
                .collect(),
        })
    }
}

/// Chooses the transform for `(d, r, c, n)` under the default table budget.
pub fn make_plan<R: Rng + ?Sized>(
    dims: usize,
    radius: u32,
    ratio: f64,
    n: usize,
    override_t: Option<PlanOverride>,
    rng: &mut R,
) -> Result<PreprocessPlan> {
    make_plan_with_budget(dims, radius, ratio, n, override_t, DEFAULT_TABLE_BUDGET, rng)
}

/// Replicates `floor(log2 n / cr)` times when `cr < log2 n`, partitions into
/// `ceil(cr / log2 n)` parts when `cr > log2 n`, otherwise leaves points
/// alone. Automatic replication is reduced until the covering tables fit
/// `table_budget`; an explicit override that does not fit is an error.
pub fn make_plan_with_budget<R: Rng + ?Sized>(
    dims: usize,
    radius: u32,
    ratio: f64,
    n: usize,
    override_t: Option<PlanOverride>,
    table_budget: usize,
    rng: &mut R,
) -> Result<PreprocessPlan> {
    if radius == 0 {
        return Err(Error::invalid("radius must be at least 1"));
    }
    if !(ratio >= 1.0 && ratio.is_finite()) {
        return Err(Error::invalid("approximation ratio must be a finite value >= 1"));
    }
    if n < 2 {
        return Err(Error::invalid("plans need at least two points"));
    }
    if dims == 0 {
        return Err(Error::invalid("plans need at least one dimension"));
    }

    let plan = match override_t {
        Some(PlanOverride::Replicate(0)) | Some(PlanOverride::Partition(0)) => {
            return Err(Error::invalid("override factor must be at least 1"));
        }
        Some(PlanOverride::Replicate(t)) => PreprocessPlan::replicate(dims, radius, t)?,
        Some(PlanOverride::Partition(t)) => partition_plan(dims, radius, t, rng)?,
        None => {
            let log_n = libm::log2(n as f64);
            let cr = ratio * radius as f64;
            if cr < log_n {
                let mut t = libm::floor(log_n / cr) as usize;
                while t > 1 && covering_tables(radius * t as u32) > table_budget {
                    t -= 1;
                }
                PreprocessPlan::replicate(dims, radius, t.max(1))?
            } else if cr > log_n {
                let t = (libm::ceil(cr / log_n) as usize).min(dims);
                partition_plan(dims, radius, t, rng)?
            } else {
                PreprocessPlan::identity(dims, radius)
            }
        }
    };
    if plan.covering_table_count() > table_budget {
        return Err(Error::budget(alloc::format!(
            "plan needs {} tables, budget is {table_budget}",
            plan.covering_table_count()
        )));
    }
    Ok(plan)
}

fn partition_plan<R: Rng + ?Sized>(
    dims: usize,
    radius: u32,
    parts: usize,
    rng: &mut R,
) -> Result<PreprocessPlan> {
    if parts <= 1 {
        return PreprocessPlan::partition(dims, radius, parts, (0..dims).collect());
    }
    let mut perm: Vec<usize> = (0..dims).collect();
    perm.shuffle(rng);
    PreprocessPlan::partition(dims, radius, parts, perm)
}

/// `q` replicated `t` times.
pub fn apply_replicate(q: &BitVector, t: usize) -> BitVector {
    q.repeat(t)
}

/// The partition views of `q` under a partition plan.
pub fn apply_partition(q: &BitVector, plan: &PreprocessPlan) -> Result<Vec<BitVector>> {
    if plan.kind() == PlanKind::Identity {
        check_dims(plan.dims(), q.dims())?;
        return Ok(alloc::vec![q.clone()]);
    }
    if plan.kind() != PlanKind::Partition {
        return Err(Error::invalid("plan does not partition"));
    }
    plan.apply(q)
}
