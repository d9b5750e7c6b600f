//! Prime-field arithmetic F_q for a runtime modulus q, plus the
//! multiplicative structure (fixed generator, discrete logs) needed to
//! recover diagonal witnesses from Plücker coordinate ratios.

use std::collections::HashMap;

use thiserror::Error;

/// Largest admitted modulus. Keeping q below 2^31 lets every product of two
/// canonical residues fit in a u64 without overflow.
pub const MAX_MODULUS: u64 = 1 << 31;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("modulus {0} is not prime")]
    CompositeModulus(u64),
    #[error("modulus {0} out of range (need 2 <= q < 2^31)")]
    ModulusOutOfRange(u64),
    #[error("division by zero in F_{0}")]
    DivisionByZero(u64),
}

/// A prime field F_q with a fixed multiplicative generator.
///
/// Elements are canonical residues in `[0, q)` carried as plain `u64`;
/// every operation renormalizes. The generator is the smallest primitive
/// root, so two fields with the same modulus are interchangeable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    q: u64,
    g: u64,
}

impl PrimeField {
    /// Builds the field, verifying primality of `q` and computing the
    /// smallest generator of F_q^×.
    pub fn new(q: u64) -> Result<Self, FieldError> {
        if q < 2 || q >= MAX_MODULUS {
            return Err(FieldError::ModulusOutOfRange(q));
        }
        if !is_prime(q) {
            return Err(FieldError::CompositeModulus(q));
        }
        let g = smallest_generator(q);
        Ok(PrimeField { q, g })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// The fixed generator of F_q^× (order exactly q − 1).
    pub fn generator(&self) -> u64 {
        self.g
    }

    /// Canonical residue of an unsigned value.
    pub fn reduce(&self, x: u64) -> u64 {
        x % self.q
    }

    /// Canonical residue of a signed value.
    pub fn reduce_signed(&self, x: i64) -> u64 {
        let m = self.q as i64;
        (((x % m) + m) % m) as u64
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a % self.q + b % self.q;
        if s >= self.q { s - self.q } else { s }
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        let (a, b) = (a % self.q, b % self.q);
        if a >= b { a - b } else { self.q - (b - a) }
    }

    pub fn neg(&self, a: u64) -> u64 {
        let a = a % self.q;
        if a == 0 { 0 } else { self.q - a }
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        (a % self.q) * (b % self.q) % self.q
    }

    pub fn pow(&self, a: u64, mut e: u64) -> u64 {
        let mut base = a % self.q;
        let mut acc = 1 % self.q;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % self.q;
            }
            base = base * base % self.q;
            e >>= 1;
        }
        acc
    }

    /// `a^e` for a signed exponent; negative exponents invert first.
    pub fn pow_signed(&self, a: u64, e: i64) -> Result<u64, FieldError> {
        if e >= 0 {
            Ok(self.pow(a, e as u64))
        } else {
            let inv = self.inv(a)?;
            Ok(self.pow(inv, e.unsigned_abs()))
        }
    }

    /// Multiplicative inverse by Fermat's little theorem.
    pub fn inv(&self, a: u64) -> Result<u64, FieldError> {
        let a = a % self.q;
        if a == 0 {
            return Err(FieldError::DivisionByZero(self.q));
        }
        Ok(self.pow(a, self.q - 2))
    }

    pub fn div(&self, a: u64, b: u64) -> Result<u64, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Discrete log base the field generator: returns e in `[0, q−1)` with
    /// g^e = a. Baby-step/giant-step, O(√q) time and space.
    pub fn dlog(&self, a: u64) -> Result<u64, FieldError> {
        let a = a % self.q;
        if a == 0 {
            return Err(FieldError::DivisionByZero(self.q));
        }
        let order = self.q - 1;
        if order == 1 {
            return Ok(0);
        }
        let m = (order as f64).sqrt().ceil() as u64;
        let mut baby = HashMap::with_capacity(m as usize);
        let mut cur = 1u64;
        for j in 0..m {
            baby.entry(cur).or_insert(j);
            cur = self.mul(cur, self.g);
        }
        // giant stride g^{-m}
        let stride = self.inv(self.pow(self.g, m))?;
        let mut gamma = a;
        for i in 0..=m {
            if let Some(&j) = baby.get(&gamma) {
                return Ok((i * m + j) % order);
            }
            gamma = self.mul(gamma, stride);
        }
        unreachable!("BSGS covers the full group for a generator base");
    }

    /// Uniformly random residue.
    pub fn sample(&self, rng: &mut impl rand::Rng) -> u64 {
        rng.gen_range(0..self.q)
    }

    /// Uniformly random nonzero residue.
    pub fn sample_nonzero(&self, rng: &mut impl rand::Rng) -> u64 {
        if self.q == 2 {
            return 1;
        }
        rng.gen_range(1..self.q)
    }
}

/// Deterministic Miller–Rabin; the witness set {2, 3, 5, 7} is exact for
/// every n < 3,215,031,751, which covers the full modulus range.
fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    acc
}

/// Smallest primitive root mod a prime q. g is a generator iff
/// g^((q−1)/p) ≠ 1 for every prime p dividing q − 1.
fn smallest_generator(q: u64) -> u64 {
    if q == 2 {
        return 1;
    }
    let order = q - 1;
    let factors = prime_factors(order);
    'candidate: for g in 2..q {
        for &p in &factors {
            if pow_mod(g, order / p, q) == 1 {
                continue 'candidate;
            }
        }
        return g;
    }
    unreachable!("every prime field has a generator");
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn make_field_small_primes() {
        let f5 = PrimeField::new(5).unwrap();
        assert_eq!(f5.modulus(), 5);
        assert_eq!(f5.generator(), 2);

        let f2 = PrimeField::new(2).unwrap();
        assert_eq!(f2.generator(), 1);
    }

    #[test]
    fn make_field_rejects_composites() {
        assert_eq!(PrimeField::new(6), Err(FieldError::CompositeModulus(6)));
        assert_eq!(PrimeField::new(1), Err(FieldError::ModulusOutOfRange(1)));
        assert!(PrimeField::new(2147483647).is_ok()); // 2^31 - 1 is prime
        assert_eq!(
            PrimeField::new(1 << 31),
            Err(FieldError::ModulusOutOfRange(1 << 31))
        );
    }

    #[test]
    fn generator_has_full_order() {
        for q in [2u64, 3, 5, 7, 11, 101, 10007] {
            let f = PrimeField::new(q).unwrap();
            let g = f.generator();
            assert_eq!(f.pow(g, q - 1), 1 % q);
            for &p in &prime_factors(q - 1) {
                assert_ne!(f.pow(g, (q - 1) / p), 1, "order of g divides (q-1)/{p}");
            }
        }
    }

    #[test]
    fn inv_examples() {
        let f5 = PrimeField::new(5).unwrap();
        assert_eq!(f5.inv(3).unwrap(), 2);
        assert_eq!(f5.inv(1).unwrap(), 1);
        assert_eq!(f5.inv(0), Err(FieldError::DivisionByZero(5)));

        let f101 = PrimeField::new(101).unwrap();
        assert_eq!(f101.inv(1).unwrap(), 1);
    }

    #[test]
    fn dlog_examples() {
        let f5 = PrimeField::new(5).unwrap();
        assert_eq!(f5.dlog(4).unwrap(), 2); // 2^2 = 4
        assert_eq!(f5.dlog(1).unwrap(), 0);
        assert_eq!(f5.dlog(3).unwrap(), 3); // 2^3 = 8 = 3
        assert_eq!(f5.dlog(0), Err(FieldError::DivisionByZero(5)));
    }

    #[test]
    fn dlog_round_trip_every_element() {
        // full round-trip g^dlog(a) = a for all nonzero a, q <= 10^4
        for q in [2u64, 3, 5, 101, 257, 10007] {
            let f = PrimeField::new(q).unwrap();
            for a in 1..q {
                let e = f.dlog(a).unwrap();
                assert!(e < q - 1 || q == 2);
                assert_eq!(f.pow(f.generator(), e), a, "q={q} a={a}");
            }
        }
    }

    #[test]
    fn field_axioms_randomized() {
        for q in [2u64, 5, 101, 10007] {
            let f = PrimeField::new(q).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(0xF1E1D);
            for _ in 0..1000 {
                let a = rng.gen_range(0..q);
                let b = rng.gen_range(0..q);
                let c = rng.gen_range(0..q);
                assert_eq!(f.add(a, b), f.add(b, a));
                assert_eq!(f.mul(a, b), f.mul(b, a));
                assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                assert_eq!(f.sub(a, b), f.add(a, f.neg(b)));
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                }
            }
        }
    }

    #[test]
    fn signed_reduction_and_pow() {
        let f5 = PrimeField::new(5).unwrap();
        assert_eq!(f5.reduce_signed(-1), 4);
        assert_eq!(f5.reduce_signed(-15), 0);
        assert_eq!(f5.pow_signed(3, -1).unwrap(), 2);
        assert_eq!(f5.pow_signed(2, -2).unwrap(), f5.inv(4).unwrap());
        assert!(f5.pow_signed(0, -1).is_err());
        assert_eq!(f5.pow_signed(0, 3).unwrap(), 0);
    }
}
