//! The r-covering LSH family built from Hadamard codes.
//!
//! Each point dimension `i` is assigned a code column `m(i)` in
//! `[0, 2^(r+1))`. Hash function `v` (for `v` in `1..2^(r+1)`) keeps the bits
//! of `x` whose column has odd parity against `v`, and folds them into an
//! integer with the universal hash `sum_i b_i x_i mod P`.
//!
//! Two evaluation paths produce identical values:
//! - [`CoveringFamily::hash_slow`] evaluates every function separately in
//!   `O(nnz(q) * L)`.
//! - [`CoveringFamily::hash_fast`] scatters `b_i` into a sketch indexed by
//!   column and runs one modular Hadamard transform, `O(nnz(q) + L log L)`.

use alloc::vec::Vec;
use core::ops::Deref;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::bitvec::BitVector;
use crate::error::{check_dims, Error, Result};
use crate::hadamard::{code_bit, fht_mod_unchecked, finish_kernel};
use crate::modular::Prime;

/// Largest radius a family may be built for: `2^(MAX_RADIUS + 1)` code
/// columns, matching the default table budget of 2^21.
pub const MAX_RADIUS: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstructionKind {
    /// Random mapping from `d > 2^(r+1)` dimensions onto code columns.
    General,
    /// Zero-pad to `2^(r+1)` and permute columns; requires `d <= 2^(r+1)`.
    Specific,
}

impl ConstructionKind {
    /// The construction that applies to `dims` at `radius`.
    pub fn for_dims(dims: usize, radius: u32) -> Self {
        if radius <= MAX_RADIUS && dims <= 1usize << (radius + 1) {
            ConstructionKind::Specific
        } else {
            ConstructionKind::General
        }
    }
}

/// Which code columns the general construction may draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MappingRange {
    /// Columns `1..2^(r+1)`; column 0 is identically zero and only adds
    /// collisions.
    #[default]
    NonZero,
    /// Columns `0..2^(r+1)`.
    Full,
}

/// `L` integer hash values; slot `v - 1` holds the value under function `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashBatch(Vec<u64>);

impl HashBatch {
    pub fn values(&self) -> &[u64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<u64> {
        self.0
    }
}

impl Deref for HashBatch {
    type Target = [u64];

    fn deref(&self) -> &[u64] {
        &self.0
    }
}

impl From<Vec<u64>> for HashBatch {
    fn from(v: Vec<u64>) -> Self {
        HashBatch(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoveringFamily {
    radius: u32,
    kind: ConstructionKind,
    mapping: Vec<u32>,
    seeds: Vec<u64>,
    prime: Prime,
}

fn check_radius(radius: u32) -> Result<()> {
    if radius > MAX_RADIUS {
        Err(Error::budget(alloc::format!(
            "radius {radius} needs 2^{} hash tables, above the 2^{} limit",
            radius + 1,
            MAX_RADIUS + 1
        )))
    } else {
        Ok(())
    }
}

fn check_kind(dims: usize, radius: u32, kind: ConstructionKind) -> Result<()> {
    let order = 1usize << (radius + 1);
    match kind {
        ConstructionKind::Specific if dims > order => Err(Error::invalid(alloc::format!(
            "specific construction needs d <= 2^(r+1), got d = {dims}, 2^(r+1) = {order}"
        ))),
        ConstructionKind::General if dims <= order => Err(Error::invalid(alloc::format!(
            "general construction needs d > 2^(r+1), got d = {dims}, 2^(r+1) = {order}"
        ))),
        _ => Ok(()),
    }
}

impl CoveringFamily {
    /// Draws a random family: the column mapping first, then the seed
    /// vector `b`, both from `rng`.
    pub fn build<R: Rng + ?Sized>(
        dims: usize,
        radius: u32,
        kind: ConstructionKind,
        range: MappingRange,
        prime: Prime,
        rng: &mut R,
    ) -> Result<Self> {
        check_radius(radius)?;
        check_kind(dims, radius, kind)?;
        if dims == 0 {
            return Err(Error::invalid("a family needs at least one dimension"));
        }
        let order = 1u32 << (radius + 1);
        let mapping = match kind {
            ConstructionKind::General => {
                let low = match range {
                    MappingRange::NonZero => 1,
                    MappingRange::Full => 0,
                };
                (0..dims).map(|_| rng.random_range(low..order)).collect()
            }
            ConstructionKind::Specific => {
                let mut perm: Vec<u32> = (0..order).collect();
                perm.shuffle(rng);
                perm.truncate(dims);
                perm
            }
        };
        let p = prime.get();
        let seeds = (0..dims).map(|_| rng.random_range(0..p)).collect();
        Ok(CoveringFamily {
            radius,
            kind,
            mapping,
            seeds,
            prime,
        })
    }

    /// Assembles a family from an explicit mapping and seed vector.
    pub fn from_parts(
        radius: u32,
        kind: ConstructionKind,
        mapping: Vec<u32>,
        seeds: Vec<u64>,
        prime: Prime,
    ) -> Result<Self> {
        check_radius(radius)?;
        check_kind(mapping.len(), radius, kind)?;
        check_dims(mapping.len(), seeds.len())?;
        let order = 1u32 << (radius + 1);
        if let Some(&m) = mapping.iter().find(|&&m| m >= order) {
            return Err(Error::invalid(alloc::format!(
                "column {m} is outside [0, {order})"
            )));
        }
        if kind == ConstructionKind::Specific {
            let mut seen = alloc::vec![false; order as usize];
            for &m in &mapping {
                if core::mem::replace(&mut seen[m as usize], true) {
                    return Err(Error::invalid(alloc::format!(
                        "specific construction maps two dimensions to column {m}"
                    )));
                }
            }
        }
        if let Some(&b) = seeds.iter().find(|&&b| b >= prime.get()) {
            return Err(Error::invalid(alloc::format!(
                "seed {b} is not reduced modulo {}",
                prime.get()
            )));
        }
        Ok(CoveringFamily {
            radius,
            kind,
            mapping,
            seeds,
            prime,
        })
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn kind(&self) -> ConstructionKind {
        self.kind
    }

    pub fn dims(&self) -> usize {
        self.mapping.len()
    }

    /// Number of code columns, `2^(r+1)`.
    pub fn code_order(&self) -> usize {
        1 << (self.radius + 1)
    }

    /// Number of hash functions, `2^(r+1) - 1`.
    pub fn table_count(&self) -> usize {
        self.code_order() - 1
    }

    pub fn mapping(&self) -> &[u32] {
        &self.mapping
    }

    pub fn seeds(&self) -> &[u64] {
        &self.seeds
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    /// The bit mask `g_v` of hash function `v` (`1 <= v <= L`).
    pub fn mask(&self, v: usize) -> BitVector {
        assert!(v >= 1 && v < self.code_order(), "hash function {v} out of range");
        let bits: Vec<bool> = self
            .mapping
            .iter()
            .map(|&m| code_bit(v, m as usize))
            .collect();
        BitVector::from_bits(&bits)
    }

    /// Evaluates each hash function on its own.
    pub fn hash_slow(&self, q: &BitVector) -> Result<HashBatch> {
        let mut out = alloc::vec![0; self.table_count()];
        self.hash_slow_into(q, &mut out)?;
        Ok(HashBatch(out))
    }

    pub fn hash_slow_into(&self, q: &BitVector, out: &mut [u64]) -> Result<()> {
        check_dims(self.dims(), q.dims())?;
        check_dims(self.table_count(), out.len())?;
        let terms: Vec<(u64, u128)> = q
            .ones_iter()
            .map(|i| (self.mapping[i] as u64, self.seeds[i] as u128))
            .collect();
        let p = self.prime.get() as u128;
        for (slot, v) in out.iter_mut().zip(1u64..) {
            // seeds are below 2^63, so 2^65 terms fit before overflow
            let acc: u128 = terms
                .iter()
                .map(|&(col, b)| b * ((v & col).count_ones() & 1) as u128)
                .sum();
            *slot = (acc % p) as u64;
        }
        Ok(())
    }

    /// Evaluates all hash functions jointly through the Hadamard transform.
    pub fn hash_fast(&self, q: &BitVector) -> Result<HashBatch> {
        let mut out = alloc::vec![0; self.table_count()];
        let mut sketch = Vec::new();
        self.hash_fast_into(q, &mut out, &mut sketch)?;
        Ok(HashBatch(out))
    }

    /// As [`hash_fast`](Self::hash_fast), reusing `sketch` as the
    /// `2^(r+1)`-entry work buffer.
    pub fn hash_fast_into(
        &self,
        q: &BitVector,
        out: &mut [u64],
        sketch: &mut Vec<u64>,
    ) -> Result<()> {
        check_dims(self.dims(), q.dims())?;
        check_dims(self.table_count(), out.len())?;
        sketch.clear();
        sketch.resize(self.code_order(), 0);
        let mut l1 = 0;
        for i in q.ones_iter() {
            let b = self.seeds[i];
            let col = self.mapping[i] as usize;
            sketch[col] = self.prime.add(sketch[col], b);
            l1 = self.prime.add(l1, b);
        }
        fht_mod_unchecked(sketch, self.prime);
        finish_kernel(sketch, l1, self.prime);
        out.copy_from_slice(&sketch[1..]);
        Ok(())
    }

    /// Number of functions under which `x` and `y` have equal masked bits,
    /// i.e. `g_v & x == g_v & y`. Compares the masks themselves, so modular
    /// hash coincidences are not counted.
    pub fn collision_count(&self, x: &BitVector, y: &BitVector) -> Result<usize> {
        check_dims(self.dims(), x.dims())?;
        let diff = x.xor(y)?;
        let mut columns: Vec<usize> = diff
            .ones_iter()
            .map(|i| self.mapping[i] as usize)
            .collect();
        columns.sort_unstable();
        columns.dedup();
        Ok((1..self.code_order())
            .filter(|&v| columns.iter().all(|&c| !code_bit(v, c)))
            .count())
    }
}
