//! Bit-packed binary vectors and the in-memory point store.
//!
//! Bit `i` lives in word `i / 64` at offset `i % 64`. Bits at positions
//! `>= dims` are always zero, so word-level operations never need masking on
//! the way out.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{check_dims, Error, Result};

pub const WORD_BITS: usize = 64;

/// Largest supported dimensionality.
pub const MAX_DIMS: usize = 1 << 20;

#[inline]
fn words_for(dims: usize) -> usize {
    dims.div_ceil(WORD_BITS)
}

#[inline]
fn tail_mask(dims: usize) -> u64 {
    match dims % WORD_BITS {
        0 => u64::MAX,
        rem => (1u64 << rem) - 1,
    }
}

/// A point of `{0,1}^dims`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    dims: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(dims: usize) -> Self {
        BitVector {
            dims,
            words: alloc::vec![0; words_for(dims)],
        }
    }

    pub fn ones(dims: usize) -> Self {
        let mut v = BitVector {
            dims,
            words: alloc::vec![u64::MAX; words_for(dims)],
        };
        v.clear_padding();
        v
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = BitVector::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.words[i / WORD_BITS] |= 1 << (i % WORD_BITS);
            }
        }
        v
    }

    /// Wraps packed words. Fails if the word count is wrong or any padding
    /// bit is set.
    pub fn from_words(dims: usize, words: Vec<u64>) -> Result<Self> {
        if words.len() != words_for(dims) {
            return Err(Error::invalid(alloc::format!(
                "{} words cannot hold exactly {} bits",
                words.len(),
                dims
            )));
        }
        if let Some(&last) = words.last() {
            if last & !tail_mask(dims) != 0 {
                return Err(Error::invalid("padding bits must be zero"));
            }
        }
        Ok(BitVector { dims, words })
    }

    /// Decodes a row of `ceil(dims / 8)` bytes where bit `j` is at byte
    /// `j / 8`, offset `j % 8`.
    pub fn from_row_bytes(dims: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != dims.div_ceil(8) {
            return Err(Error::invalid(alloc::format!(
                "row of {} bytes does not match {} dims",
                bytes.len(),
                dims
            )));
        }
        let mut words = alloc::vec![0u64; words_for(dims)];
        for (chunk, word) in bytes.chunks(8).zip(words.iter_mut()) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            *word = u64::from_le_bytes(buf);
        }
        BitVector::from_words(dims, words)
    }

    pub fn to_row_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.dims.div_ceil(8));
        for w in &self.words {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out.truncate(self.dims.div_ceil(8));
        out
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.dims, "bit {i} out of range for {} dims", self.dims);
        self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.dims, "bit {i} out of range for {} dims", self.dims);
        let bit = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= bit;
        } else {
            self.words[i / WORD_BITS] &= !bit;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.dims, "bit {i} out of range for {} dims", self.dims);
        self.words[i / WORD_BITS] ^= 1 << (i % WORD_BITS);
    }

    pub fn popcount(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn hamming_distance(&self, other: &BitVector) -> Result<usize> {
        check_dims(self.dims, other.dims)?;
        Ok(self.distance_unchecked(other))
    }

    /// Distance without the dimension check; callers guarantee equal dims.
    #[inline]
    pub(crate) fn distance_unchecked(&self, other: &BitVector) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    pub fn and_mask(&self, mask: &BitVector) -> Result<BitVector> {
        check_dims(self.dims, mask.dims)?;
        Ok(self.zip_words(mask, |a, b| a & b))
    }

    pub fn xor(&self, other: &BitVector) -> Result<BitVector> {
        check_dims(self.dims, other.dims)?;
        Ok(self.zip_words(other, |a, b| a ^ b))
    }

    fn zip_words(&self, other: &BitVector, op: impl Fn(u64, u64) -> u64) -> BitVector {
        BitVector {
            dims: self.dims,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        }
    }

    /// Positions of the set bits, ascending.
    pub fn ones_iter(&self) -> Ones<'_> {
        Ones {
            words: &self.words,
            index: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn to_bits(&self) -> Vec<bool> {
        (0..self.dims).map(|i| self.get(i)).collect()
    }

    /// `times` copies of `self` laid end to end.
    pub fn repeat(&self, times: usize) -> BitVector {
        let mut out = BitVector::zeros(self.dims * times);
        for copy in 0..times {
            out.write_bits(copy * self.dims, self);
        }
        out
    }

    /// Gathers the bits at `positions` into a new vector of `positions.len()`
    /// dims.
    pub fn select(&self, positions: &[usize]) -> BitVector {
        let mut out = BitVector::zeros(positions.len());
        for (j, &p) in positions.iter().enumerate() {
            if self.get(p) {
                out.words[j / WORD_BITS] |= 1 << (j % WORD_BITS);
            }
        }
        out
    }

    /// Reads up to 64 bits starting at `start` as an integer, bit `start`
    /// landing in the least significant position.
    pub fn extract_u64(&self, start: usize, len: usize) -> u64 {
        assert!(len <= WORD_BITS && start + len <= self.dims);
        if len == 0 {
            return 0;
        }
        let word = start / WORD_BITS;
        let offset = start % WORD_BITS;
        let mut value = self.words[word] >> offset;
        if offset != 0 && offset + len > WORD_BITS {
            value |= self.words[word + 1] << (WORD_BITS - offset);
        }
        if len < WORD_BITS {
            value &= (1u64 << len) - 1;
        }
        value
    }

    fn write_bits(&mut self, at: usize, src: &BitVector) {
        for i in src.ones_iter() {
            let j = at + i;
            self.words[j / WORD_BITS] |= 1 << (j % WORD_BITS);
        }
    }

    fn clear_padding(&mut self) {
        let mask = tail_mask(self.dims);
        if let Some(last) = self.words.last_mut() {
            *last &= mask;
        }
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dims {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

/// Parses a string of `'0'`/`'1'` characters; character `j` becomes bit `j`.
impl FromStr for BitVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut v = BitVector::zeros(s.len());
        for (i, c) in s.bytes().enumerate() {
            match c {
                b'0' => {}
                b'1' => v.words[i / WORD_BITS] |= 1 << (i % WORD_BITS),
                other => {
                    return Err(Error::invalid(alloc::format!(
                        "unexpected character {:?} at position {i}",
                        other as char
                    )))
                }
            }
        }
        Ok(v)
    }
}

pub struct Ones<'a> {
    words: &'a [u64],
    index: usize,
    current: u64,
}

impl Iterator for Ones<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        while self.current == 0 {
            self.index += 1;
            self.current = *self.words.get(self.index)?;
        }
        let tz = self.current.trailing_zeros() as usize;
        self.current &= self.current - 1;
        Some(self.index * WORD_BITS + tz)
    }
}

/// Ordered points of equal dimensionality; ids are positions `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    dims: usize,
    points: Vec<BitVector>,
}

impl Dataset {
    pub fn new(dims: usize, points: Vec<BitVector>) -> Result<Self> {
        if dims > MAX_DIMS {
            return Err(Error::invalid(alloc::format!(
                "{dims} dims exceeds the supported maximum of {MAX_DIMS}"
            )));
        }
        for p in &points {
            check_dims(dims, p.dims())?;
        }
        if points.len() > u32::MAX as usize {
            return Err(Error::invalid("at most 2^32 - 1 points are supported"));
        }
        Ok(Dataset { dims, points })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, id: u32) -> &BitVector {
        &self.points[id as usize]
    }

    pub fn points(&self) -> &[BitVector] {
        &self.points
    }

    pub fn into_points(self) -> Vec<BitVector> {
        self.points
    }

    pub fn push(&mut self, point: BitVector) -> Result<u32> {
        check_dims(self.dims, point.dims())?;
        let id = self.points.len() as u32;
        self.points.push(point);
        Ok(id)
    }

    /// Ids of every point within distance `r` of `q`, ascending.
    pub fn within(&self, q: &BitVector, r: usize) -> Result<Vec<u32>> {
        check_dims(self.dims, q.dims())?;
        Ok(self
            .points
            .iter()
            .enumerate()
            .filter(|(_, p)| p.distance_unchecked(q) <= r)
            .map(|(id, _)| id as u32)
            .collect())
    }
}
