//! Dense univariate polynomials over F_p.

use std::cmp::Ordering;
use std::fmt;

use crate::arith::{mod_pow, mul_mod};

/// A polynomial over F_p, coefficients lowest degree first with trailing
/// zeros stripped. The zero polynomial has no coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FpPoly {
    p: u64,
    coeffs: Vec<u64>,
}

impl FpPoly {
    pub fn new(p: u64, mut coeffs: Vec<u64>) -> Self {
        for c in coeffs.iter_mut() {
            *c %= p;
        }
        let mut poly = FpPoly { p, coeffs };
        poly.normalize();
        poly
    }

    /// Reduces signed integer coefficients mod p.
    pub fn from_ints(p: u64, coeffs: &[i64]) -> Self {
        let coeffs = coeffs
            .iter()
            .map(|&c| c.rem_euclid(p as i64) as u64)
            .collect();
        FpPoly::new(p, coeffs)
    }

    pub fn zero(p: u64) -> Self {
        FpPoly { p, coeffs: Vec::new() }
    }

    pub fn constant(p: u64, c: u64) -> Self {
        FpPoly::new(p, vec![c])
    }

    pub fn one(p: u64) -> Self {
        FpPoly::constant(p, 1)
    }

    /// x^k
    pub fn monomial(p: u64, k: usize) -> Self {
        let mut coeffs = vec![0; k + 1];
        coeffs[k] = 1;
        FpPoly { p, coeffs }
    }

    fn normalize(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == [1]
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> u64 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == 1
    }

    fn inv_scalar(&self, c: u64) -> u64 {
        debug_assert!(!c.is_multiple_of(self.p));
        mod_pow(c, self.p - 2, self.p)
    }

    pub fn scale(&self, c: u64) -> Self {
        let p = self.p;
        FpPoly::new(p, self.coeffs.iter().map(|&a| mul_mod(a, c, p)).collect())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(self.inv_scalar(self.leading()))
    }

    pub fn add(&self, other: &Self) -> Self {
        let p = self.p;
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).copied().unwrap_or(0);
                let b = other.coeffs.get(i).copied().unwrap_or(0);
                (a + b) % p
            })
            .collect();
        FpPoly::new(p, coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let p = self.p;
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).copied().unwrap_or(0);
                let b = other.coeffs.get(i).copied().unwrap_or(0);
                (a + p - b) % p
            })
            .collect();
        FpPoly::new(p, coeffs)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return FpPoly::zero(self.p);
        }
        let p = self.p;
        let mut out = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = (out[i + j] + mul_mod(a, b, p)) % p;
            }
        }
        FpPoly::new(p, out)
    }

    /// Quotient and remainder. Panics on division by zero.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let p = self.p;
        let dd = divisor.degree().expect("division by the zero polynomial");
        let inv = self.inv_scalar(divisor.leading());
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (FpPoly::zero(p), self.clone());
        }
        let mut quot = vec![0u64; rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let c = mul_mod(rem[i], inv, p);
            if c == 0 {
                continue;
            }
            quot[i - dd] = c;
            for (j, &b) in divisor.coeffs.iter().enumerate() {
                let k = i - dd + j;
                rem[k] = (rem[k] + p - mul_mod(c, b, p)) % p;
            }
        }
        rem.truncate(dd);
        (FpPoly::new(p, quot), FpPoly::new(p, rem))
    }

    pub fn rem(&self, divisor: &Self) -> Self {
        self.div_rem(divisor).1
    }

    /// Monic gcd.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn mul_mod(&self, other: &Self, modulus: &Self) -> Self {
        self.mul(other).rem(modulus)
    }

    pub fn pow_mod(&self, mut e: u64, modulus: &Self) -> Self {
        let mut result = FpPoly::one(self.p).rem(modulus);
        let mut base = self.rem(modulus);
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_mod(&base, modulus);
            }
            base = base.mul_mod(&base, modulus);
            e >>= 1;
        }
        result
    }

    /// `self^((p^f - 1) / 2) mod modulus`.
    ///
    /// The exponent factors as ((p - 1) / 2) * (1 + p + ... + p^(f-1)), so the
    /// power is the product of the Frobenius images raised to (p - 1) / 2.
    /// This avoids the p^f overflow for large residue degrees.
    pub fn pow_half_order(&self, f: usize, modulus: &Self) -> Self {
        let base = self.rem(modulus);
        let mut frob = base.clone();
        let mut norm = base;
        for _ in 1..f {
            frob = frob.pow_mod(self.p, modulus);
            norm = norm.mul_mod(&frob, modulus);
        }
        norm.pow_mod((self.p - 1) / 2, modulus)
    }

    /// Inverse modulo `modulus` via extended Euclid, if it exists.
    pub fn inverse_mod(&self, modulus: &Self) -> Option<Self> {
        let p = self.p;
        let (mut r0, mut r1) = (modulus.clone(), self.rem(modulus));
        let (mut s0, mut s1) = (FpPoly::zero(p), FpPoly::one(p));
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1);
            let s = s0.sub(&q.mul(&s1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
        }
        if r0.degree() != Some(0) {
            return None;
        }
        let c = self.inv_scalar(r0.leading());
        Some(s0.scale(c).rem(modulus))
    }

    /// `self(x^2)`.
    pub fn compose_square(&self) -> Self {
        let mut coeffs = vec![0; self.coeffs.len() * 2];
        for (i, &c) in self.coeffs.iter().enumerate() {
            coeffs[2 * i] = c;
        }
        FpPoly::new(self.p, coeffs)
    }

    /// Constant term, if the polynomial is a constant (zero counts as 0).
    pub fn as_constant(&self) -> Option<u64> {
        match self.coeffs.len() {
            0 => Some(0),
            1 => Some(self.coeffs[0]),
            _ => None,
        }
    }
}

impl PartialOrd for FpPoly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic on the coefficient vector, lowest degree first.
impl Ord for FpPoly {
    fn cmp(&self, other: &Self) -> Ordering {
        self.p
            .cmp(&other.p)
            .then_with(|| self.coeffs.cmp(&other.coeffs))
    }
}

impl fmt::Display for FpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (i, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "x")?,
                (1, c) => write!(f, "{c}x")?,
                (i, 1) => write!(f, "x^{i}")?,
                (i, c) => write!(f, "{c}x^{i}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly(p: u64, c: &[u64]) -> FpPoly {
        FpPoly::new(p, c.to_vec())
    }

    #[test]
    fn normalization_and_display() {
        let f = poly(3, &[2, 1, 1, 0, 3]);
        assert_eq!(f.coeffs(), &[2, 1, 1]);
        assert_eq!(f.to_string(), "x^2 + x + 2");
        assert_eq!(poly(5, &[0, 0]).degree(), None);
        assert_eq!(FpPoly::from_ints(7, &[-1, 0, 1]).to_string(), "x^2 + 6");
    }

    #[test]
    fn inverse_in_f9() {
        let h = poly(3, &[2, 1, 1]);
        let x = FpPoly::monomial(3, 1);
        assert_eq!(x.inverse_mod(&h).unwrap(), poly(3, &[1, 1]));
        assert!(FpPoly::zero(3).inverse_mod(&h).is_none());
    }

    #[test]
    fn gcd_of_shared_factor() {
        let a = poly(7, &[1, 1]).mul(&poly(7, &[2, 0, 1]));
        let b = poly(7, &[1, 1]).mul(&poly(7, &[3, 1]));
        assert_eq!(a.gcd(&b), poly(7, &[1, 1]));
    }

    #[test]
    fn half_order_power_matches_direct_exponent() {
        // F_9 = F_3[x]/(x^2 + x + 2); (9 - 1) / 2 = 4.
        let h = poly(3, &[2, 1, 1]);
        for c0 in 0..3 {
            for c1 in 0..3 {
                let a = poly(3, &[c0, c1]);
                assert_eq!(a.pow_half_order(2, &h), a.pow_mod(4, &h));
            }
        }
        // The exponent identity holds in any quotient ring, irreducible or not.
        let h = poly(7, &[3, 0, 0, 0, 1]);
        let a = poly(7, &[1, 2, 3, 4]);
        assert_eq!(a.pow_half_order(4, &h), a.pow_mod((7u64.pow(4) - 1) / 2, &h));
    }

    proptest! {
        #[test]
        fn division_identity(a in proptest::collection::vec(0u64..101, 0..12),
                             b in proptest::collection::vec(0u64..101, 1..8)) {
            let a = poly(101, &a);
            let b = poly(101, &b);
            prop_assume!(!b.is_zero());
            let (q, r) = a.div_rem(&b);
            prop_assert_eq!(q.mul(&b).add(&r), a);
            prop_assert!(r.degree().is_none_or(|d| d < b.degree().unwrap()));
        }

        #[test]
        fn inverse_is_inverse(a in proptest::collection::vec(0u64..13, 1..4)) {
            let h = poly(13, &[2, 0, 0, 0, 1]);
            let a = poly(13, &a);
            prop_assume!(!a.is_zero());
            if let Some(inv) = a.inverse_mod(&h) {
                prop_assert!(a.mul_mod(&inv, &h).is_one());
            } else {
                prop_assert!(a.gcd(&h).degree().unwrap() > 0);
            }
        }
    }
}
