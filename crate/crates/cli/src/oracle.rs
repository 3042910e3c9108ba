//! Ground truth by exhaustive scan.

use fclsh_core::Dataset;

use crate::error::Result;
use crate::format::{GroundTruth, HistRow, TruthRow};

pub fn oracle_scan(data: &Dataset, queries: &Dataset, r: usize) -> Result<GroundTruth> {
    let mut rows = Vec::new();
    for (qi, q) in queries.points().iter().enumerate() {
        for (id, p) in data.points().iter().enumerate() {
            let d = p.hamming_distance(q)?;
            if d <= r {
                rows.push(TruthRow {
                    query_id: qi as u32,
                    point_id: id as u32,
                    distance: d as u32,
                });
            }
        }
    }
    GroundTruth::new(rows, queries.len())
}

/// Counts of query-to-point distances `0..=d` over all pairs.
pub fn distance_histogram(data: &Dataset, queries: &Dataset) -> Result<Vec<HistRow>> {
    let mut counts = vec![0u64; data.dims() + 1];
    for q in queries.points() {
        for p in data.points() {
            counts[p.hamming_distance(q)?] += 1;
        }
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(d, count)| HistRow {
            distance: d as u32,
            count,
        })
        .collect())
}
