//! Synthetic workloads: uniform background points plus neighbors planted
//! at exact distances around each query.

use std::str::FromStr;

use fclsh_core::rng::{stream_rng, Stream};
use fclsh_core::{BitVector, Dataset};
use rand::seq::index::sample;
use rand::Rng;

use crate::error::{CliError, Result};

/// `count` neighbors at distance `radius` from each query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Planting {
    pub radius: usize,
    pub count: usize,
}

impl FromStr for Planting {
    type Err = CliError;

    /// Parses `RADIUS:COUNT`.
    fn from_str(s: &str) -> Result<Self> {
        let (r, c) = s
            .split_once(':')
            .ok_or_else(|| CliError::Usage(format!("planting `{s}` is not RADIUS:COUNT")))?;
        let num = |x: &str| {
            x.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("planting `{s}` is not RADIUS:COUNT")))
        };
        Ok(Planting {
            radius: num(r)?,
            count: num(c)?,
        })
    }
}

/// Parses `R:C,R:C,...`; a radius may be a range `A-B` meaning every
/// radius from `A` to `B`.
pub fn parse_plantings(spec: &str) -> Result<Vec<Planting>> {
    let mut out = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.split_once(':').and_then(|(r, c)| r.split_once('-').map(|ab| (ab, c))) {
            Some(((a, b), c)) => {
                let lo = Planting::from_str(&format!("{a}:{c}"))?;
                let hi = Planting::from_str(&format!("{b}:{c}"))?;
                out.extend((lo.radius..=hi.radius).map(|radius| Planting {
                    radius,
                    count: lo.count,
                }));
            }
            None => out.push(item.parse()?),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthSpec {
    /// Total dataset size, planted points included.
    pub n: usize,
    pub dims: usize,
    pub queries: usize,
    pub planted: Vec<Planting>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Synthetic {
    pub data: Dataset,
    pub queries: Dataset,
}

pub fn random_point<R: Rng + ?Sized>(dims: usize, rng: &mut R) -> BitVector {
    let words = (0..dims.div_ceil(64))
        .map(|i| {
            let w: u64 = rng.random();
            let live = dims - 64 * i;
            if live >= 64 {
                w
            } else {
                w & ((1u64 << live) - 1)
            }
        })
        .collect();
    BitVector::from_words(dims, words).expect("padding is cleared")
}

/// `center` with exactly `dist` distinct bits flipped.
pub fn at_distance<R: Rng + ?Sized>(center: &BitVector, dist: usize, rng: &mut R) -> BitVector {
    let mut p = center.clone();
    for i in sample(rng, center.dims(), dist) {
        p.flip(i);
    }
    p
}

/// Background points take ids `0..n - planted`; each query's planted
/// neighbors follow in query order, then in the order of `planted`.
pub fn gen_synthetic(spec: &SynthSpec) -> Result<Synthetic> {
    if spec.dims == 0 || spec.dims > fclsh_core::bitvec::MAX_DIMS {
        return Err(CliError::Usage(format!("dimension {} is out of range", spec.dims)));
    }
    if let Some(p) = spec.planted.iter().find(|p| p.radius > spec.dims) {
        return Err(CliError::Usage(format!(
            "planted radius {} exceeds the dimension {}",
            p.radius, spec.dims
        )));
    }
    let per_query: usize = spec.planted.iter().map(|p| p.count).sum();
    let planted_total = per_query
        .checked_mul(spec.queries)
        .filter(|&t| t <= spec.n)
        .ok_or_else(|| {
            CliError::Usage(format!(
                "{} queries x {per_query} planted points exceed n = {}",
                spec.queries, spec.n
            ))
        })?;
    if spec.n > u32::MAX as usize {
        return Err(CliError::Usage(format!("n = {} exceeds the id range", spec.n)));
    }

    let mut data_rng = stream_rng(spec.seed, Stream::Data, 0);
    let mut points: Vec<BitVector> = (0..spec.n - planted_total)
        .map(|_| random_point(spec.dims, &mut data_rng))
        .collect();
    let mut query_rng = stream_rng(spec.seed, Stream::Queries, 0);
    let queries: Vec<BitVector> = (0..spec.queries)
        .map(|_| random_point(spec.dims, &mut query_rng))
        .collect();
    let mut plant_rng = stream_rng(spec.seed, Stream::Data, 1);
    for q in &queries {
        for p in &spec.planted {
            for _ in 0..p.count {
                points.push(at_distance(q, p.radius, &mut plant_rng));
            }
        }
    }
    Ok(Synthetic {
        data: Dataset::new(spec.dims, points)?,
        queries: Dataset::new(spec.dims, queries)?,
    })
}

/// Moves `count` randomly chosen points out of `data` to serve as queries.
pub fn hold_out(data: Dataset, count: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    if count > data.len() {
        return Err(CliError::Usage(format!(
            "cannot hold out {count} of {} points",
            data.len()
        )));
    }
    let dims = data.dims();
    let mut rng = stream_rng(seed, Stream::Sample, 0);
    let mut chosen = sample(&mut rng, data.len(), count).into_vec();
    chosen.sort_unstable();
    let mut take = vec![false; data.len()];
    for &i in &chosen {
        take[i] = true;
    }
    let (mut kept, mut held) = (Vec::new(), Vec::new());
    for (p, t) in data.into_points().into_iter().zip(take) {
        if t {
            held.push(p);
        } else {
            kept.push(p);
        }
    }
    Ok((Dataset::new(dims, kept)?, Dataset::new(dims, held)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planting_syntax() {
        assert_eq!(
            parse_plantings("5:1, 1-3:2").unwrap(),
            [
                Planting { radius: 5, count: 1 },
                Planting { radius: 1, count: 2 },
                Planting { radius: 2, count: 2 },
                Planting { radius: 3, count: 2 },
            ]
        );
        assert!(parse_plantings("5").is_err());
        assert!(parse_plantings("a:1").is_err());
    }

    #[test]
    fn planted_points_sit_at_exact_distances() {
        let spec = SynthSpec {
            n: 100,
            dims: 70,
            queries: 3,
            planted: parse_plantings("5:1,0-2:2").unwrap(),
            seed: 4,
        };
        let s = gen_synthetic(&spec).unwrap();
        assert_eq!(s.data.len(), 100);
        let first = 100 - 3 * 7;
        for (qi, q) in s.queries.points().iter().enumerate() {
            let base = first + 7 * qi;
            let dists: Vec<usize> = (base..base + 7)
                .map(|id| s.data.point(id as u32).hamming_distance(q).unwrap())
                .collect();
            assert_eq!(dists, [5, 0, 0, 1, 1, 2, 2]);
        }
        assert_eq!(gen_synthetic(&spec).unwrap(), s);
    }

    #[test]
    fn inconsistent_counts() {
        let spec = SynthSpec {
            n: 10,
            dims: 8,
            queries: 3,
            planted: vec![Planting { radius: 1, count: 4 }],
            seed: 0,
        };
        assert_eq!(gen_synthetic(&spec).unwrap_err().exit_code(), 2);
        let far = SynthSpec {
            planted: vec![Planting { radius: 9, count: 1 }],
            ..spec
        };
        assert_eq!(gen_synthetic(&far).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn hold_out_splits_points() {
        let spec = SynthSpec { n: 50, dims: 16, queries: 0, planted: vec![], seed: 1 };
        let data = gen_synthetic(&spec).unwrap().data;
        let (kept, held) = hold_out(data.clone(), 5, 2).unwrap();
        assert_eq!((kept.len(), held.len()), (45, 5));
        for p in held.points() {
            assert!(data.points().contains(p));
        }
        assert!(hold_out(data, 51, 0).is_err());
    }
}
