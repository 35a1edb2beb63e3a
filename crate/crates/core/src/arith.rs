//! Exact integer primitives: modular arithmetic, deterministic primality,
//! square-free factorization, and the Jacobi and quartic residue symbols.
//!
//! Everything works on `u64` values below 2^62.

use std::fmt;
use std::ops::Mul;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported integer input (exclusive).
pub const MAX_INPUT: u64 = 1 << 62;

const TRIAL_DIVISION_LIMIT: u64 = 1_000_000;

/// A value in {+1, -1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_bit(minus: bool) -> Self {
        if minus {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    /// GF(2) image: 1 for -1, 0 for +1.
    pub fn is_minus(self) -> bool {
        self == Sign::Minus
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn negate(self) -> Self {
        Sign::from_bit(!self.is_minus())
    }
}

impl Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        Sign::from_bit(self.is_minus() != rhs.is_minus())
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.as_i8())
    }
}

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i8(self.as_i8())
    }
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    if m <= 1 << 32 {
        (a % m) * (b % m) % m
    } else {
        ((a as u128 * b as u128) % m as u128) as u64
    }
}

/// `base^exponent mod modulus` by binary exponentiation.
pub fn mod_pow(base: u64, mut exponent: u64, modulus: u64) -> u64 {
    assert!(modulus >= 2, "modulus must be at least 2");
    let mut result = 1;
    let mut b = base % modulus;
    while exponent > 0 {
        if exponent & 1 == 1 {
            result = mul_mod(result, b, modulus);
        }
        b = mul_mod(b, b, modulus);
        exponent >>= 1;
    }
    result
}

/// Deterministic Miller-Rabin. The first twelve prime bases are exact for
/// every n < 3.3 * 10^24, which covers all of `u64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = mod_pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Brent's variant of Pollard rho. `n` must be an odd composite.
fn pollard_rho(n: u64) -> u64 {
    let mut c = 1;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut g) = (2u64, 2u64, 1u64);
        let mut q = 1u64;
        let mut r = 1u64;
        let mut ys = 2u64;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..(r - k).min(128) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd(q, n);
                k += 128;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

/// Prime factors with multiplicity, unsorted.
fn prime_factors(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let f = pollard_rho(n);
    prime_factors(f, out);
    prime_factors(n / f, out);
}

/// An odd square-free integer >= 3 together with its prime divisors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SquareFreeOdd {
    value: u64,
    primes: Vec<u64>,
}

impl SquareFreeOdd {
    pub fn value(&self) -> u64 {
        self.value
    }

    /// Distinct prime divisors, strictly increasing.
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn is_prime(&self) -> bool {
        self.primes.len() == 1
    }
}

impl fmt::Display for SquareFreeOdd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Serialize for SquareFreeOdd {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u64(self.value)
    }
}

/// Factors `d` and checks that it is odd and square-free.
///
/// Trial division handles everything up to 10^6; a remaining cofactor is
/// split with Pollard rho. Primes are accepted.
pub fn factor_square_free(d: u64) -> Result<SquareFreeOdd> {
    if d < 3 {
        return Err(Error::OutOfRange {
            value: d,
            reason: "d must be at least 3",
        });
    }
    if d >= MAX_INPUT {
        return Err(Error::OutOfRange {
            value: d,
            reason: "d must be below 2^62",
        });
    }
    if d.is_multiple_of(2) {
        return Err(Error::NotOdd(d));
    }
    let mut primes = Vec::new();
    let mut m = d;
    let mut p = 3;
    while p <= TRIAL_DIVISION_LIMIT && p * p <= m {
        if m.is_multiple_of(p) {
            m /= p;
            if m.is_multiple_of(p) {
                return Err(Error::NotSquareFree { value: d, prime: p });
            }
            primes.push(p);
        }
        p += 2;
    }
    if m > 1 {
        let mut rest = Vec::new();
        prime_factors(m, &mut rest);
        rest.sort_unstable();
        if let Some(w) = rest.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::NotSquareFree {
                value: d,
                prime: w[0],
            });
        }
        primes.extend(rest);
    }
    Ok(SquareFreeOdd { value: d, primes })
}

/// Jacobi symbol (a/n) for odd n >= 3.
pub fn jacobi(a: i64, n: u64) -> i8 {
    assert!(n % 2 == 1 && n >= 3, "jacobi needs an odd modulus >= 3");
    let mut a = a.rem_euclid(n as i64) as u64;
    let mut n = n;
    let mut result = 1i8;
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz % 2 == 1 && (n % 8 == 3 || n % 8 == 5) {
            result = -result;
        }
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        (a, n) = (n % a, a);
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// The quartic symbol (2/p)_4 for a prime p ≡ 1 (mod 8).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QuarticSymbol {
    pub prime: u64,
    pub value: Sign,
}

pub fn quartic_symbol_of_two(p: u64) -> Result<QuarticSymbol> {
    if p % 8 != 1 {
        return Err(Error::WrongResidueClass {
            prime: p,
            residue: p % 8,
            modulus: 8,
            expected: "1",
        });
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let r = mod_pow(2, (p - 1) / 4, p);
    let value = if r == 1 {
        Sign::Plus
    } else if r == p - 1 {
        Sign::Minus
    } else {
        unreachable!("2 is a square mod {p}, so 2^((p-1)/4) is ±1")
    };
    Ok(QuarticSymbol { prime: p, value })
}

/// Odd primes in `[lo, hi)`, ascending.
pub fn odd_primes_in(lo: u64, hi: u64) -> Vec<u64> {
    if hi <= 3 {
        return Vec::new();
    }
    let n = hi as usize;
    let mut composite = vec![false; n];
    let mut i = 2;
    while i * i < n {
        if !composite[i] {
            let mut j = i * i;
            while j < n {
                composite[j] = true;
                j += i;
            }
        }
        i += 1;
    }
    (lo.max(3)..hi)
        .filter(|&k| k % 2 == 1 && !composite[k as usize])
        .collect()
}
