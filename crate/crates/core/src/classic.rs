//! Classic bit-sampling LSH: each of `L` tables samples `k` coordinates
//! uniformly with replacement and hashes them with `sum_i b_i x_i mod P`.

use alloc::vec::Vec;

use rand::Rng;

use crate::bitvec::BitVector;
use crate::covering::HashBatch;
use crate::error::{check_dims, Error, Result};
use crate::modular::Prime;

/// Samples per table from the false-negative target `delta`:
/// `ceil(log(1 - delta^(1/L)) / log(1 - r/d))`, clamped to `[1, 4d]`.
///
/// The ratio of logarithms is base-independent. As `delta -> 0` the value
/// tends to 0 (clamped to 1); as `delta -> 1` it grows without bound
/// (clamped to `4d`).
pub fn choose_k(dims: usize, radius: usize, tables: usize, delta: f64) -> Result<usize> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("delta must lie strictly between 0 and 1"));
    }
    if radius >= dims {
        return Err(Error::invalid(alloc::format!(
            "radius {radius} must be below the dimensionality {dims}"
        )));
    }
    if tables == 0 {
        return Err(Error::invalid("at least one table is required"));
    }
    let max_k = 4 * dims;
    if radius == 0 {
        return Ok(max_k);
    }
    // log(1 - delta^(1/L)) computed as log(-expm1(log(delta) / L))
    let miss_per_table = -libm::expm1(libm::log(delta) / tables as f64);
    let numerator = libm::log(miss_per_table);
    let denominator = libm::log1p(-(radius as f64) / dims as f64);
    let k = libm::ceil(numerator / denominator);
    if k.is_nan() || k < 1.0 {
        Ok(1)
    } else if k >= max_k as f64 {
        Ok(max_k)
    } else {
        Ok(k as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitSampleFamily {
    dims: usize,
    tables: usize,
    samples: usize,
    // table-major, `tables * samples` entries each
    positions: Vec<u32>,
    seeds: Vec<u64>,
    prime: Prime,
}

impl BitSampleFamily {
    pub fn build<R: Rng + ?Sized>(
        dims: usize,
        tables: usize,
        samples: usize,
        prime: Prime,
        rng: &mut R,
    ) -> Result<Self> {
        if dims == 0 || tables == 0 || samples == 0 {
            return Err(Error::invalid(
                "dimensions, tables and samples must all be positive",
            ));
        }
        let total = tables
            .checked_mul(samples)
            .ok_or_else(|| Error::budget("tables * samples overflows"))?;
        let positions = (0..total)
            .map(|_| rng.random_range(0..dims as u32))
            .collect();
        let p = prime.get();
        let seeds = (0..total).map(|_| rng.random_range(0..p)).collect();
        Ok(BitSampleFamily {
            dims,
            tables,
            samples,
            positions,
            seeds,
            prime,
        })
    }

    /// Builds from explicit table-major positions and seeds.
    pub fn from_parts(
        dims: usize,
        tables: usize,
        positions: Vec<u32>,
        seeds: Vec<u64>,
        prime: Prime,
    ) -> Result<Self> {
        if tables == 0 || positions.is_empty() || !positions.len().is_multiple_of(tables) {
            return Err(Error::invalid("positions must split evenly into the tables"));
        }
        check_dims(positions.len(), seeds.len())?;
        if positions.iter().any(|&p| p as usize >= dims) {
            return Err(Error::invalid("sample position out of range"));
        }
        if seeds.iter().any(|&b| b >= prime.get()) {
            return Err(Error::invalid("seed not reduced modulo the prime"));
        }
        Ok(BitSampleFamily {
            dims,
            tables,
            samples: positions.len() / tables,
            positions,
            seeds,
            prime,
        })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn table_count(&self) -> usize {
        self.tables
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn positions(&self, table: usize) -> &[u32] {
        &self.positions[table * self.samples..(table + 1) * self.samples]
    }

    pub fn hash_all(&self, q: &BitVector) -> Result<HashBatch> {
        let mut out = alloc::vec![0; self.tables];
        self.hash_all_into(q, &mut out)?;
        Ok(out.into())
    }

    pub fn hash_all_into(&self, q: &BitVector, out: &mut [u64]) -> Result<()> {
        check_dims(self.dims, q.dims())?;
        check_dims(self.tables, out.len())?;
        let words = q.words();
        let table_chunks = self
            .positions
            .chunks_exact(self.samples)
            .zip(self.seeds.chunks_exact(self.samples));
        for (slot, (positions, seeds)) in out.iter_mut().zip(table_chunks) {
            let mut acc = 0;
            for (&p, &b) in positions.iter().zip(seeds) {
                let p = p as usize;
                if words[p / 64] >> (p % 64) & 1 == 1 {
                    acc = self.prime.add(acc, b);
                }
            }
            *slot = acc;
        }
        Ok(())
    }
}
