//! Arithmetic over a prime field F_p.
//!
//! Every computation in this crate is exact: scalars are residues in
//! `0..p` for a configurable odd prime `p` (default [`DEFAULT_PRIME`]),
//! and all eliminations happen over that field. A small quadratic
//! extension is provided for point sampling in base-point checks.

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Default working prime. Large enough that seeded "generic" data behaves
/// generically, small enough that products fit comfortably in machine words.
pub const DEFAULT_PRIME: u64 = 32003;

/// Largest modulus accepted: primes must fit in 31 bits so that a product
/// of two residues fits in a `u64` with room for lazy accumulation.
pub const MAX_PRIME: u64 = (1 << 31) - 1;

/// Primes used by the multi-prime audit when none are given explicitly.
pub fn default_audit_primes(count: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(count);
    let mut candidate = DEFAULT_PRIME;
    while primes.len() < count {
        if is_prime(candidate) {
            primes.push(candidate);
        }
        candidate += 1;
    }
    primes
}

/// The prime field F_p. Cheap to copy; carried alongside raw `u64`
/// residues rather than wrapping every scalar in a struct.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, Error> {
        if !(3..=MAX_PRIME).contains(&p) || !is_prime(p) {
            return Err(Error::InvalidPrime(p));
        }
        Ok(PrimeField { p })
    }

    pub fn default_field() -> Self {
        PrimeField { p: DEFAULT_PRIME }
    }

    #[inline]
    pub fn prime(&self) -> u64 {
        self.p
    }

    /// True when products of residues are small enough that a `u64`
    /// accumulator can absorb thousands of multiply-adds before a
    /// reduction. Holds for the default prime.
    #[inline]
    pub fn lazy_ok(&self) -> bool {
        // (p-1)^2 < 2^31 leaves 33 bits of headroom in a u64 accumulator.
        self.p <= 46337
    }

    #[inline]
    pub fn reduce_i64(&self, value: i64) -> u64 {
        value.rem_euclid(self.p as i64) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        // a, b < p <= 2^31 - 1, so the product fits in u64.
        (a * b) % self.p
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1u64;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse by Fermat; panics on zero.
    pub fn inv(&self, a: u64) -> u64 {
        assert!(!a.is_multiple_of(self.p), "inverse of zero in F_{}", self.p);
        self.pow(a, self.p - 2)
    }

    /// Smallest quadratic non-residue, used to build F_{p^2}.
    pub fn non_residue(&self) -> u64 {
        let half = (self.p - 1) / 2;
        (2..self.p)
            .find(|&a| self.pow(a, half) == self.p - 1)
            .expect("odd prime has a non-residue")
    }
}

/// Deterministic primality test for the accepted modulus range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Elements of the quadratic extension `F_{p^2} = F_p[s]/(s^2 - ns)`,
/// with `ns` a fixed non-residue. Only what point sampling needs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fp2 {
    pub re: u64,
    pub im: u64,
}

impl Fp2 {
    pub const ZERO: Fp2 = Fp2 { re: 0, im: 0 };
    pub const ONE: Fp2 = Fp2 { re: 1, im: 0 };

    pub fn from_base(a: u64) -> Self {
        Fp2 { re: a, im: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.re == 0 && self.im == 0
    }

    pub fn add(self, other: Fp2, field: &PrimeField) -> Fp2 {
        Fp2 {
            re: field.add(self.re, other.re),
            im: field.add(self.im, other.im),
        }
    }

    pub fn mul(self, other: Fp2, field: &PrimeField, non_residue: u64) -> Fp2 {
        let cross = field.add(field.mul(self.re, other.im), field.mul(self.im, other.re));
        let re = field.add(
            field.mul(self.re, other.re),
            field.mul(field.mul(self.im, other.im), non_residue),
        );
        Fp2 { re, im: cross }
    }

    pub fn scale(self, c: u64, field: &PrimeField) -> Fp2 {
        Fp2 {
            re: field.mul(self.re, c),
            im: field.mul(self.im, c),
        }
    }

    pub fn pow(self, mut exp: u64, field: &PrimeField, non_residue: u64) -> Fp2 {
        let mut acc = Fp2::ONE;
        let mut base = self;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(base, field, non_residue);
            }
            base = base.mul(base, field, non_residue);
            exp >>= 1;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_primes() {
        assert!(PrimeField::new(1).is_err());
        assert!(PrimeField::new(2).is_err());
        assert!(PrimeField::new(32004).is_err());
        assert!(PrimeField::new(u64::MAX).is_err());
        assert!(PrimeField::new(32003).is_ok());
    }

    #[test]
    fn default_audit_primes_are_distinct_primes() {
        let primes = default_audit_primes(3);
        assert_eq!(primes.len(), 3);
        assert_eq!(primes[0], DEFAULT_PRIME);
        for (i, &p) in primes.iter().enumerate() {
            assert!(is_prime(p));
            for &q in &primes[..i] {
                assert_ne!(p, q);
            }
        }
    }

    #[test]
    fn field_ops() {
        let f = PrimeField::new(32003).unwrap();
        assert_eq!(f.add(32002, 5), 4);
        assert_eq!(f.sub(3, 10), 32003 - 7);
        assert_eq!(f.mul(12345, 6789), (12345u64 * 6789) % 32003);
        assert_eq!(f.reduce_i64(-1), 32002);
        for a in [1u64, 2, 17, 32000] {
            assert_eq!(f.mul(a, f.inv(a)), 1);
        }
    }

    #[test]
    fn non_residue_is_not_a_square() {
        let f = PrimeField::new(32003).unwrap();
        let ns = f.non_residue();
        assert_eq!(f.pow(ns, (f.prime() - 1) / 2), f.prime() - 1);
    }

    #[test]
    fn fp2_multiplication_order() {
        // The multiplicative group of F_{p^2} has order p^2 - 1.
        let f = PrimeField::new(101).unwrap();
        let ns = f.non_residue();
        let x = Fp2 { re: 3, im: 5 };
        assert_eq!(x.pow(101 * 101 - 1, &f, ns), Fp2::ONE);
    }
}
