use fclsh_core::hadamard::{batch_hash_kernel, fht_in_place, fht_mod, CodeMatrix};
use fclsh_core::mih::default_parts;
use fclsh_core::rng::{stream_rng, Stream};
use fclsh_core::transform::apply_replicate;
use fclsh_core::{
    choose_k, BitVector, ConstructionKind, CoveringFamily, MappingRange, PreprocessPlan, Prime,
};

fn bv(s: &str) -> BitVector {
    s.parse().unwrap()
}

/// Reads a 0/1 string as an integer, first character most significant.
fn msb_first(s: &str) -> u32 {
    s.chars().fold(0, |acc, c| acc * 2 + u32::from(c == '1'))
}

/// Reads a 0/1 string as an integer, first character least significant.
fn lsb_first(s: &str) -> u32 {
    s.chars().rev().fold(0, |acc, c| acc * 2 + u32::from(c == '1'))
}

const TEXTBOOK_MAPPING: [&str; 4] = ["011", "100", "101", "001"];
const TEXTBOOK_MASKS: [&str; 7] = [
    "1011", "1000", "0011", "0110", "1101", "1110", "0101",
];

fn textbook_family(read: fn(&str) -> u32) -> CoveringFamily {
    let mapping = TEXTBOOK_MAPPING.iter().map(|s| read(s)).collect();
    let seeds = vec![1, 2, 4, 8];
    CoveringFamily::from_parts(2, ConstructionKind::Specific, mapping, seeds, Prime::default())
        .unwrap()
}

fn masks(fam: &CoveringFamily) -> Vec<String> {
    (1..=7).map(|v| fam.mask(v).to_string()).collect()
}

#[test]
fn four_dimensional_family_pins_msb_first_mapping() {
    let msb = textbook_family(msb_first);
    let lsb = textbook_family(lsb_first);
    assert_eq!(msb.mapping(), [3, 4, 5, 1]);
    assert_eq!(masks(&msb), TEXTBOOK_MASKS);
    assert_ne!(masks(&lsb), TEXTBOOK_MASKS);
}

#[test]
fn four_dimensional_pair_collides_once_at_g4() {
    let fam = textbook_family(msb_first);
    let (x, q) = (bv("0011"), bv("1010"));
    assert_eq!(x.hamming_distance(&q).unwrap(), 2);
    let agreeing: Vec<usize> = (1..=7)
        .filter(|&v| {
            let g = fam.mask(v);
            g.and_mask(&x).unwrap() == g.and_mask(&q).unwrap()
        })
        .collect();
    assert_eq!(agreeing, [4]);
    assert_eq!(fam.mask(4).and_mask(&x).unwrap(), bv("0010"));
    assert_eq!(fam.collision_count(&x, &q).unwrap(), 1);
    let hx = fam.hash_slow(&x).unwrap();
    let hq = fam.hash_slow(&q).unwrap();
    let equal: Vec<usize> = (1..=7).filter(|&v| hx[v - 1] == hq[v - 1]).collect();
    assert_eq!(equal, [4]);
    assert_eq!(fam.hash_fast(&x).unwrap(), hx);
}

#[test]
fn eight_dimensional_code_family() {
    let fam = CoveringFamily::from_parts(
        2,
        ConstructionKind::Specific,
        (0..8).collect(),
        (0..8).map(|i| 1u64 << i).collect(),
        Prime::default(),
    )
    .unwrap();
    let code = CodeMatrix::generate(3).unwrap();
    for v in 1..8 {
        assert_eq!(&fam.mask(v), code.row(v));
    }
    assert_eq!(code.row(3), &bv("01100110"));
    assert_eq!(code.row(4), &bv("00001111"));
    let (x, y, q) = (bv("00110011"), bv("00110001"), bv("00111010"));
    assert_eq!(x.hamming_distance(&q).unwrap(), 2);
    assert_eq!(y.hamming_distance(&q).unwrap(), 3);
    let hq = fam.hash_fast(&q).unwrap();
    let hx = fam.hash_fast(&x).unwrap();
    let hy = fam.hash_fast(&y).unwrap();
    let x_hits: Vec<usize> = (1..=7).filter(|&v| hx[v - 1] == hq[v - 1]).collect();
    assert_eq!(x_hits, [3]);
    assert!((1..=7).all(|v| hy[v - 1] != hq[v - 1]));
    assert_eq!(fam.mask(3).and_mask(&q).unwrap(), bv("00100010"));
}

#[test]
fn preprocessing_walkthrough() {
    let q = bv("0011");
    assert_eq!(apply_replicate(&q, 2), bv("00110011"));
    let plan = PreprocessPlan::partition(4, 2, 2, vec![0, 2, 3, 1]).unwrap();
    let parts = plan.apply(&q).unwrap();
    assert_eq!(parts, [bv("01"), bv("10")]);
}

#[test]
fn transform_examples() {
    let mut v = [1i64, 2, 3, 4];
    fht_in_place(&mut v).unwrap();
    assert_eq!(v, [10, -2, -4, 0]);
    let p5 = Prime::new(5).unwrap();
    let mut w = [1u64, 2, 3, 4];
    fht_mod(&mut w, p5).unwrap();
    assert_eq!(w, [0, 3, 1, 0]);
    // q = 0011 with unit seeds
    let p = Prime::new(101).unwrap();
    let mut t = [0u64, 0, 1, 1];
    batch_hash_kernel(&mut t, 2, p).unwrap();
    assert_eq!(t, [0, 1, 2, 1]);
}

#[test]
fn large_scale_setting_sizes() {
    // r = 6 needs 127 functions drawn from 128 code columns
    let mut rng = stream_rng(0, Stream::Family, 0);
    let fam = CoveringFamily::build(
        128,
        6,
        ConstructionKind::for_dims(128, 6),
        MappingRange::NonZero,
        Prime::default(),
        &mut rng,
    )
    .unwrap();
    assert_eq!(fam.kind(), ConstructionKind::Specific);
    assert_eq!(fam.table_count(), 127);
    assert_eq!(fam.code_order(), 128);
}

#[test]
fn baseline_parameter_formulas() {
    assert_eq!(choose_k(64, 5, 127, 0.1).unwrap(), 50);
    assert_eq!(default_parts(64, 1 << 16), 4);
}
