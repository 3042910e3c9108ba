//! Per-query hashing cost of the transform path against the direct path.

use std::time::Instant;

use fclsh_core::rng::{stream_rng, Stream};
use fclsh_core::transform::DEFAULT_TABLE_BUDGET;
use fclsh_core::{BitVector, ConstructionKind, CoveringFamily, MappingRange, Prime};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::synth::random_point;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub dims: usize,
    pub r: u32,
    pub tables: usize,
    pub queries: usize,
    pub fast_us: f64,
    pub slow_us: f64,
    pub speedup: f64,
    pub identical: bool,
}

/// Times both hash paths over `queries` random vectors for every `(d, r)`.
pub fn bench_hashing(dims: &[usize], radii: &[u32], queries: usize, seed: u64) -> Result<Vec<BenchRow>> {
    if queries == 0 {
        return Err(CliError::Usage("need at least one query".into()));
    }
    let mut rows = Vec::new();
    for (di, &d) in dims.iter().enumerate() {
        let mut qrng = stream_rng(seed, Stream::Queries, di as u64);
        let qs: Vec<BitVector> = (0..queries).map(|_| random_point(d, &mut qrng)).collect();
        for &r in radii {
            if r >= usize::BITS - 2 || (1usize << (r + 1)) - 1 > DEFAULT_TABLE_BUDGET {
                return Err(CliError::Resource(format!("radius {r} needs too many tables")));
            }
            let mut frng = stream_rng(seed, Stream::Family, ((di as u64) << 32) | r as u64);
            let fam = CoveringFamily::build(
                d,
                r,
                ConstructionKind::for_dims(d, r),
                MappingRange::NonZero,
                Prime::default(),
                &mut frng,
            )?;
            let l = fam.table_count();
            let mut fast = vec![0u64; l * queries];
            let mut slow = vec![0u64; l * queries];
            let mut sketch = Vec::new();

            let t0 = Instant::now();
            for (q, out) in qs.iter().zip(fast.chunks_exact_mut(l)) {
                fam.hash_fast_into(q, out, &mut sketch)?;
            }
            let fast_t = t0.elapsed();
            let t1 = Instant::now();
            for (q, out) in qs.iter().zip(slow.chunks_exact_mut(l)) {
                fam.hash_slow_into(q, out)?;
            }
            let slow_t = t1.elapsed();

            let fast_us = fast_t.as_secs_f64() * 1e6 / queries as f64;
            let slow_us = slow_t.as_secs_f64() * 1e6 / queries as f64;
            rows.push(BenchRow {
                dims: d,
                r,
                tables: l,
                queries,
                fast_us,
                slow_us,
                speedup: slow_us / fast_us.max(1e-9),
                identical: fast == slow,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paths_agree() {
        let rows = bench_hashing(&[16, 40], &[2, 4], 20, 1).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.identical));
        assert_eq!(rows[1].tables, 31);
        assert!(bench_hashing(&[8], &[1], 0, 0).is_err());
    }
}
