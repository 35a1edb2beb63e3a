//! Decomposition of odd primes in K_n = Q(ζ_{2^n}).
//!
//! An odd prime p is unramified in K_n; its residue degree is the order of
//! p in (Z/2^n)^× and the number of primes above it is 2^(n-1) / f.

use serde::Serialize;

use crate::arith::{is_prime, quartic_symbol_of_two, QuarticSymbol, SquareFreeOdd};
use crate::error::{Error, Result};

pub const MIN_LAYER: u32 = 3;
pub const MAX_LAYER: u32 = 30;

/// Residue classes of an odd prime, with (2/p)_4 attached when p ≡ 1 (mod 8).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PrimeClass {
    pub p: u64,
    pub class8: u64,
    pub class16: u64,
    pub quartic: Option<QuarticSymbol>,
}

impl PrimeClass {
    /// p ≡ ±3 (mod 8) or p ≡ 9 (mod 16).
    pub fn in_main_classes(&self) -> bool {
        matches!(self.class8, 3 | 5) || self.class16 == 9
    }

    /// p ≡ 3, 5 (mod 8) or p ≡ 7, 9 (mod 16).
    pub fn in_appendix_classes(&self) -> bool {
        self.in_main_classes() || self.class16 == 7
    }

    pub fn unsupported(&self) -> Error {
        Error::UnsupportedClass {
            prime: self.p,
            class16: self.class16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SplittingData {
    pub p: u64,
    pub n: u32,
    pub f: u64,
    pub g: u64,
}

fn check_odd(p: u64) -> Result<()> {
    if p.is_multiple_of(2) {
        Err(Error::NotOdd(p))
    } else {
        Ok(())
    }
}

pub(crate) fn check_layer(n: u32, max: u32) -> Result<()> {
    if (MIN_LAYER..=max).contains(&n) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            value: n as u64,
            reason: "layer n outside the supported range",
        })
    }
}

/// Multiplicative order of p modulo 2^n.
///
/// The group (Z/2^n)^× is a 2-group, so the order is the least 2^j with
/// p^(2^j) ≡ 1; found by repeated squaring.
pub fn order_mod_2n(p: u64, n: u32) -> Result<u64> {
    check_odd(p)?;
    check_layer(n, MAX_LAYER)?;
    let mask = (1u64 << n) - 1;
    let mut x = p & mask;
    let mut order = 1;
    while x != 1 {
        x = x.wrapping_mul(x) & mask;
        order *= 2;
    }
    Ok(order)
}

pub fn num_primes_above(p: u64, n: u32) -> Result<SplittingData> {
    let f = order_mod_2n(p, n)?;
    Ok(SplittingData {
        p,
        n,
        f,
        g: (1u64 << (n - 1)) / f,
    })
}

pub fn classify_prime(p: u64) -> Result<PrimeClass> {
    check_odd(p)?;
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let quartic = if p % 8 == 1 {
        Some(quartic_symbol_of_two(p)?)
    } else {
        None
    };
    Ok(PrimeClass {
        p,
        class8: p % 8,
        class16: p % 16,
        quartic,
    })
}

/// Number of primes of K_n ramified in K_n(√d): all primes above divisors of d.
pub fn ramified_count(d: &SquareFreeOdd, n: u32) -> Result<u64> {
    d.primes()
        .iter()
        .map(|&p| num_primes_above(p, n).map(|s| s.g))
        .sum()
}
