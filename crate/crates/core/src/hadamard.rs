//! Sylvester-ordered Hadamard codes and the fast Hadamard transform.
//!
//! Row `v`, column `i` of the code matrix is `parity(popcount(v & i))`. The
//! Sylvester Hadamard matrix `H` has `H[v][i] = (-1)^parity(v & i)`, so the
//! code matrix is `C = (1 - H) / 2` entry-wise.

use alloc::vec::Vec;

use crate::bitvec::BitVector;
use crate::error::{Error, Result};
use crate::modular::Prime;

/// Largest `order_log` accepted by [`CodeMatrix::generate`]; the matrix
/// holds `4^order_log` bits.
pub const MAX_CODE_MATRIX_LOG: u32 = 14;

/// Hadamard code bit for row `v`, column `i`.
#[inline]
pub fn code_bit(v: usize, i: usize) -> bool {
    (v & i).count_ones() & 1 == 1
}

/// All `2^order_log` Hadamard codewords of length `2^order_log`, row 0
/// included. Covering families use rows `1..`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeMatrix {
    order_log: u32,
    rows: Vec<BitVector>,
}

impl CodeMatrix {
    pub fn generate(order_log: u32) -> Result<Self> {
        if order_log == 0 {
            return Err(Error::invalid("code matrix order must be at least 1"));
        }
        if order_log > MAX_CODE_MATRIX_LOG {
            return Err(Error::budget(alloc::format!(
                "a code matrix of order 2^{order_log} exceeds the 2^{MAX_CODE_MATRIX_LOG} limit"
            )));
        }
        let size = 1usize << order_log;
        let rows = (0..size)
            .map(|v| {
                let mut row = BitVector::zeros(size);
                for i in 0..size {
                    if code_bit(v, i) {
                        row.set(i, true);
                    }
                }
                row
            })
            .collect();
        Ok(CodeMatrix { order_log, rows })
    }

    pub fn order_log(&self) -> u32 {
        self.order_log
    }

    pub fn size(&self) -> usize {
        1 << self.order_log
    }

    pub fn row(&self, v: usize) -> &BitVector {
        &self.rows[v]
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }
}

fn check_len(len: usize) -> Result<()> {
    if len.is_power_of_two() {
        Ok(())
    } else {
        Err(Error::invalid(alloc::format!(
            "transform length {len} is not a power of two"
        )))
    }
}

/// In-place `v <- H v` over the integers.
pub fn fht_in_place(v: &mut [i64]) -> Result<()> {
    check_len(v.len())?;
    let n = v.len();
    let mut half = 1;
    while half < n {
        for block in v.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        half *= 2;
    }
    Ok(())
}

/// In-place `v <- H v mod P`. Entries must already be reduced.
pub fn fht_mod(v: &mut [u64], prime: Prime) -> Result<()> {
    check_len(v.len())?;
    if let Some(&bad) = v.iter().find(|&&x| x >= prime.get()) {
        return Err(Error::invalid(alloc::format!(
            "entry {bad} is not reduced modulo {}",
            prime.get()
        )));
    }
    fht_mod_unchecked(v, prime);
    Ok(())
}

pub(crate) fn fht_mod_unchecked(v: &mut [u64], prime: Prime) {
    let n = v.len();
    let mut half = 1;
    while half < n {
        for block in v.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = prime.add(x, y);
                *b = prime.sub(x, y);
            }
        }
        half *= 2;
    }
}

/// Turns a reduced sketch `t` into `h[v] = (l1_norm - (H t)[v]) / 2 mod P`
/// in place, which equals `sum_j t_j * C[v][j] mod P`.
///
/// `l1_norm` is the sum of the sketch's pre-reduction entries, reduced mod
/// `P`. Slot 0 corresponds to the all-zero code row.
pub fn batch_hash_kernel(t: &mut [u64], l1_norm: u64, prime: Prime) -> Result<()> {
    fht_mod(t, prime)?;
    finish_kernel(t, prime.reduce(l1_norm), prime);
    Ok(())
}

#[inline]
pub(crate) fn finish_kernel(t: &mut [u64], l1_norm: u64, prime: Prime) {
    for x in t.iter_mut() {
        *x = prime.half(prime.sub(l1_norm, *x));
    }
}
