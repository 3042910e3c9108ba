//! Arithmetic modulo an odd prime below 2^63.

use crate::error::{Error, Result};

/// The Mersenne prime 2^61 - 1.
pub const MERSENNE_61: u64 = (1 << 61) - 1;

/// An odd prime `P < 2^63`, so that the sum of two residues fits in a `u64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self> {
        if p <= 2 || p.is_multiple_of(2) {
            return Err(Error::invalid(alloc::format!("modulus {p} must be an odd prime")));
        }
        if p >= 1 << 63 {
            return Err(Error::invalid(alloc::format!("modulus {p} must be below 2^63")));
        }
        if !is_prime(p) {
            return Err(Error::invalid(alloc::format!("modulus {p} is not prime")));
        }
        Ok(Prime(p))
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn reduce(self, x: u64) -> u64 {
        x % self.0
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.0 {
            s - self.0
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.0 - b
        }
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.0 as u128) as u64
    }

    /// `a * 2^-1 mod P`.
    #[inline]
    pub fn half(self, a: u64) -> u64 {
        if a & 1 == 0 {
            a >> 1
        } else {
            // a + P is even and below 2^64
            (a + self.0) >> 1
        }
    }

    /// Multiplicative inverse of 2.
    pub fn inv2(self) -> u64 {
        self.0.div_ceil(2)
    }
}

impl Default for Prime {
    fn default() -> Self {
        Prime(MERSENNE_61)
    }
}

fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    let m = m as u128;
    let mut acc = 1u128;
    let mut b = base as u128 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = ((x as u128 * x as u128) % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality() {
        let small: alloc::vec::Vec<u64> = (0..60).filter(|&n| is_prime(n)).collect();
        assert_eq!(
            small,
            [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]
        );
        assert!(is_prime(MERSENNE_61));
        assert!(!is_prime(MERSENNE_61 - 2));
        // strong pseudoprime to bases 2 and 3
        assert!(!is_prime(1_373_653));
    }

    #[test]
    fn rejects_bad_moduli() {
        assert!(Prime::new(2).is_err());
        assert!(Prime::new(8).is_err());
        assert!(Prime::new(9).is_err());
        assert!(Prime::new((1 << 63) + 29).is_err());
        assert_eq!(Prime::new(101).unwrap().get(), 101);
    }

    #[test]
    fn half_matches_inverse() {
        let p = Prime::new(101).unwrap();
        for a in 0..101 {
            assert_eq!(p.half(a), p.mul(a, p.inv2()));
        }
        let m = Prime::default();
        assert_eq!(m.half(m.get() - 1), m.mul(m.get() - 1, m.inv2()));
    }

    #[test]
    fn add_sub_wrap() {
        let p = Prime::new(7).unwrap();
        assert_eq!(p.add(5, 4), 2);
        assert_eq!(p.sub(2, 5), 4);
    }
}
