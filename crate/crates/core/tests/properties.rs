use std::collections::BTreeSet;

use fclsh_core::hadamard::{batch_hash_kernel, fht_in_place, fht_mod, CodeMatrix};
use fclsh_core::index::Scheme;
use fclsh_core::rng::{stream_rng, Stream};
use fclsh_core::transform::{apply_replicate, make_plan};
use fclsh_core::{
    BitVector, ConstructionKind, CoveringFamily, Dataset, HashPath, IndexConfig, IndexSet,
    LinearScan, MappingRange, MihIndex, NoClock, PlanOverride, PreprocessPlan, Prime, QueryScratch,
    RangeSearch,
};
use proptest::prelude::*;
use rand::seq::index::sample;
use rand::Rng;

fn bits(dims: usize) -> impl Strategy<Value = BitVector> {
    proptest::collection::vec(any::<bool>(), dims).prop_map(|b| BitVector::from_bits(&b))
}

fn flip_random<R: Rng>(x: &BitVector, count: usize, rng: &mut R) -> BitVector {
    let mut y = x.clone();
    for i in sample(rng, x.dims(), count) {
        y.flip(i);
    }
    y
}

fn random_vec<R: Rng>(dims: usize, rng: &mut R) -> BitVector {
    BitVector::from_bits(&(0..dims).map(|_| rng.random()).collect::<Vec<bool>>())
}

/// A dataset with background points plus neighbors of `q` at every distance
/// up to `max_planted`.
fn planted(dims: usize, background: usize, max_planted: usize, seed: u64) -> (Dataset, BitVector) {
    let mut rng = stream_rng(seed, Stream::Data, 0);
    let q = random_vec(dims, &mut rng);
    let mut pts: Vec<BitVector> = (0..background).map(|_| random_vec(dims, &mut rng)).collect();
    for dist in 0..=max_planted.min(dims) {
        pts.push(flip_random(&q, dist, &mut rng));
    }
    (Dataset::new(dims, pts).unwrap(), q)
}

fn sylvester(m: u32) -> Vec<Vec<i64>> {
    let n = 1usize << m;
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if (i & j).count_ones() % 2 == 0 { 1 } else { -1 })
                .collect()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn triangle_inequality(
        (a, b, c) in (1usize..300).prop_flat_map(|d| (bits(d), bits(d), bits(d)))
    ) {
        let ac = a.hamming_distance(&c).unwrap();
        let ab = a.hamming_distance(&b).unwrap();
        let bc = b.hamming_distance(&c).unwrap();
        prop_assert!(ac <= ab + bc);
    }

    #[test]
    fn distance_is_popcount_of_xor((a, b) in (1usize..300).prop_flat_map(|d| (bits(d), bits(d)))) {
        let naive = a.to_bits().iter().zip(b.to_bits()).filter(|(x, y)| **x != *y).count();
        prop_assert_eq!(a.hamming_distance(&b).unwrap(), naive);
        prop_assert_eq!(a.xor(&b).unwrap().popcount(), naive);
    }

    #[test]
    fn fht_is_an_involution_up_to_scale(
        v in (0u32..=10).prop_flat_map(|m| proptest::collection::vec(-1000i64..1000, 1usize << m))
    ) {
        let mut w = v.clone();
        fht_in_place(&mut w).unwrap();
        fht_in_place(&mut w).unwrap();
        let n = v.len() as i64;
        prop_assert!(w.iter().zip(&v).all(|(a, b)| *a == n * b));
    }

    #[test]
    fn fht_matches_matrix_product(
        v in (0u32..=6).prop_flat_map(|m| proptest::collection::vec(-1000i64..1000, 1usize << m))
    ) {
        let m = v.len().trailing_zeros();
        let h = sylvester(m);
        let want: Vec<i64> = h.iter().map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum()).collect();
        let mut got = v.clone();
        fht_in_place(&mut got).unwrap();
        prop_assert_eq!(&got, &want);
        // the modular transform agrees with exact arithmetic reduced mod P
        let p = Prime::new(1_000_003).unwrap();
        let mut modv: Vec<u64> = v.iter().map(|&x| x.rem_euclid(1_000_003) as u64).collect();
        fht_mod(&mut modv, p).unwrap();
        let reduced: Vec<u64> = want.iter().map(|&x| x.rem_euclid(1_000_003) as u64).collect();
        prop_assert_eq!(modv, reduced);
    }

    #[test]
    fn kernel_matches_direct_universal_hash(
        m in 1u32..=6,
        prime in prop::sample::select(vec![3u64, 5, 101, 1_000_003, (1u64 << 61) - 1]),
        seed in any::<u64>(),
    ) {
        let p = Prime::new(prime).unwrap();
        let n = 1usize << m;
        let mut rng = stream_rng(seed, Stream::Run, 0);
        let q: Vec<bool> = (0..n).map(|_| rng.random()).collect();
        let b: Vec<u64> = (0..n).map(|_| rng.random_range(0..prime)).collect();
        let code = CodeMatrix::generate(m).unwrap();
        let mut t: Vec<u64> = (0..n).map(|i| if q[i] { b[i] } else { 0 }).collect();
        let l1 = t.iter().fold(0, |acc, &x| p.add(acc, x));
        batch_hash_kernel(&mut t, l1, p).unwrap();
        for (v, &got) in t.iter().enumerate() {
            let want = (0..n)
                .filter(|&i| q[i] && code.row(v).get(i))
                .fold(0, |acc, i| p.add(acc, b[i]));
            prop_assert_eq!(got, want);
        }
    }

    #[test]
    fn fast_and_slow_hashes_agree(
        dims in 1usize..200,
        radius in 0u32..=6,
        full_range in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let mut rng = stream_rng(seed, Stream::Family, 0);
        let kind = ConstructionKind::for_dims(dims, radius);
        let range = if full_range { MappingRange::Full } else { MappingRange::NonZero };
        let fam = CoveringFamily::build(dims, radius, kind, range, Prime::default(), &mut rng).unwrap();
        for _ in 0..4 {
            let q = random_vec(dims, &mut rng);
            prop_assert_eq!(fam.hash_fast(&q).unwrap(), fam.hash_slow(&q).unwrap());
        }
    }

    #[test]
    fn replication_preserves_answer_sets(
        dims in 1usize..40,
        times in 1usize..5,
        r in 0usize..10,
        seed in any::<u64>(),
    ) {
        let (ds, q) = planted(dims, 30, r + 3, seed);
        let rep = Dataset::new(dims * times, ds.points().iter().map(|p| apply_replicate(p, times)).collect()).unwrap();
        prop_assert_eq!(ds.within(&q, r).unwrap(), rep.within(&apply_replicate(&q, times), times * r).unwrap());
    }

    #[test]
    fn plans_are_deterministic(
        dims in 8usize..256,
        r in 1u32..20,
        n in 2usize..1_000_000,
        seed in any::<u64>(),
    ) {
        let a = make_plan(dims, r, 1.0, n, None, &mut stream_rng(seed, Stream::Permutation, 0));
        let b = make_plan(dims, r, 1.0, n, None, &mut stream_rng(seed, Stream::Permutation, 0));
        prop_assert_eq!(a.ok(), b.ok());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn packing_round_trips(seed in any::<u64>()) {
        let mut rng = stream_rng(seed, Stream::Data, 1);
        for dims in 1..=512 {
            let raw: Vec<bool> = (0..dims).map(|_| rng.random()).collect();
            let v = BitVector::from_bits(&raw);
            prop_assert_eq!(&v.to_bits(), &raw);
            prop_assert_eq!(&BitVector::from_row_bytes(dims, &v.to_row_bytes()).unwrap(), &v);
            prop_assert_eq!(&BitVector::from_words(dims, v.words().to_vec()).unwrap(), &v);
            prop_assert_eq!(&v.to_string().parse::<BitVector>().unwrap(), &v);
        }
    }

    #[test]
    fn code_rows_are_parities(m in 1u32..=6) {
        let code = CodeMatrix::generate(m).unwrap();
        let n = 1usize << m;
        for v in 0..n {
            for i in 0..n {
                let dot: usize = (0..m).map(|k| ((v >> k) & 1) * ((i >> k) & 1)).sum();
                prop_assert_eq!(code.row(v).get(i), dot % 2 == 1);
            }
        }
    }

    #[test]
    fn covering_index_matches_linear_scan(
        dims in 8usize..80,
        r in 1u32..=5,
        plan_choice in 0usize..3,
        factor in 2usize..=3,
        slow in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let (ds, q) = planted(dims, 200, r as usize + 4, seed);
        let plan = match plan_choice {
            0 => PreprocessPlan::identity(dims, r),
            1 => PreprocessPlan::replicate(dims, r, factor).unwrap(),
            _ => {
                let mut rng = stream_rng(seed, Stream::Permutation, 0);
                make_plan(dims, r, 1.0, ds.len(), Some(PlanOverride::Partition(factor)), &mut rng).unwrap()
            }
        };
        let path = if slow { HashPath::Slow } else { HashPath::Fast };
        let idx = IndexSet::build(&ds, plan, &IndexConfig::covering(path, seed)).unwrap();
        let lin = LinearScan::new(&ds);
        let mut scratch = QueryScratch::new();
        let mut rng = stream_rng(seed, Stream::Queries, 0);
        let queries = [q.clone(), flip_random(&q, 1, &mut rng), random_vec(dims, &mut rng)];
        for query in &queries {
            let got = idx.query_r_nn(query, r as usize, &mut scratch, &NoClock).unwrap();
            let want = lin.query_r_nn(query, r as usize, &mut scratch, &NoClock).unwrap();
            prop_assert_eq!(got.ids, want.ids);
        }
    }

    #[test]
    fn mih_matches_linear_scan(
        dims in 8usize..130,
        parts in 1usize..6,
        r in 0usize..8,
        seed in any::<u64>(),
    ) {
        let parts = parts.max(dims.div_ceil(64));
        let (ds, q) = planted(dims, 200, r + 3, seed);
        let mih = MihIndex::build(&ds, parts).unwrap();
        let lin = LinearScan::new(&ds);
        let mut scratch = QueryScratch::new();
        let got = mih.query_r_nn(&q, r, &mut scratch, &NoClock).unwrap();
        let want = lin.query_r_nn(&q, r, &mut scratch, &NoClock).unwrap();
        prop_assert_eq!(got.ids, want.ids);
    }

    #[test]
    fn candidates_are_the_union_of_buckets(dims in 8usize..64, r in 1u32..=4, seed in any::<u64>()) {
        let (ds, q) = planted(dims, 300, 6, seed);
        let idx = IndexSet::build(&ds, PreprocessPlan::identity(dims, r), &IndexConfig::covering(HashPath::Fast, seed)).unwrap();
        let hashes = idx.scheme().hash(&q).unwrap();
        let mut union = BTreeSet::new();
        let mut postings = 0u64;
        for (t, h) in hashes.iter().enumerate() {
            let ids = idx.table(t).lookup(*h);
            postings += ids.len() as u64;
            union.extend(ids.iter().copied());
        }
        let mut scratch = QueryScratch::new();
        let res = idx.query_r_nn(&q, r as usize, &mut scratch, &NoClock).unwrap();
        prop_assert_eq!(res.report.candidates, union.len() as u64);
        prop_assert_eq!(res.report.collisions, postings);
    }

    #[test]
    fn identical_seeds_give_identical_reports(dims in 8usize..64, seed in any::<u64>()) {
        let (ds, q) = planted(dims, 300, 6, seed);
        let run = || {
            let mut rng = stream_rng(seed, Stream::Permutation, 0);
            let plan = make_plan(dims, 3, 1.0, ds.len(), None, &mut rng).unwrap();
            let idx = IndexSet::build(&ds, plan, &IndexConfig::covering(HashPath::Fast, seed)).unwrap();
            idx.query_r_nn(&q, 3, &mut QueryScratch::new(), &NoClock).unwrap()
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn pigeonhole_holds_beyond_exhaustive_range(
        dims in 17usize..256,
        t in 2usize..=4,
        seed in any::<u64>(),
    ) {
        let mut rng = stream_rng(seed, Stream::Run, 0);
        let r = rng.random_range(t..=(3 * t).min(dims));
        let plan = make_plan(dims, r as u32, 1.0, 1 << 10, Some(PlanOverride::Partition(t)), &mut rng).unwrap();
        let scheme = Scheme::build(plan.clone(), &IndexConfig::covering(HashPath::Fast, seed)).unwrap();
        for _ in 0..20 {
            let x = random_vec(dims, &mut rng);
            let y = flip_random(&x, rng.random_range(0..=r), &mut rng);
            let parts_x = plan.apply(&x).unwrap();
            let parts_y = plan.apply(&y).unwrap();
            let close = parts_x.iter().zip(&parts_y).any(|(a, b)| a.hamming_distance(b).unwrap() <= r / t);
            prop_assert!(close);
            prop_assert!(scheme.mask_collisions(&x, &y).unwrap() >= 1);
            prop_assert!(scheme.hash_collisions(&x, &y).unwrap() >= 1);
        }
    }
}
