//! Finite-field realization of the primes of K_n above an odd prime p.
//!
//! A prime 𝔭 | p of K_n corresponds to a monic irreducible factor h of
//! Φ_{2^n}(x) = x^(2^(n-1)) + 1 modulo p, with residue field F_p[x]/(h) and
//! ζ_{2^n} ↦ x. For a unit u and odd 𝔭 ramified in K_n(√d), the norm residue
//! symbol (u, d / 𝔭) is the quadratic character of u in that residue field.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::Sign;
use crate::error::{Error, Result};
use crate::poly::FpPoly;
use crate::splitting::{check_layer, order_mod_2n};
use crate::symbols::UnitGenerator;

/// Largest layer for which Φ_{2^n} is factored.
pub const MAX_FACTOR_LAYER: u32 = 12;
/// Largest layer for full symbol tables.
pub const MAX_SYMBOL_LAYER: u32 = 6;

/// Environment variable overriding the factorization seed.
pub const SEED_ENV: &str = "ZETA2RANK_SEED";
const DEFAULT_SEED: u64 = 0x5EED_2E7A_2A4C;

fn base_seed() -> u64 {
    static SEED: OnceLock<u64> = OnceLock::new();
    *SEED.get_or_init(|| {
        std::env::var(SEED_ENV)
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or(DEFAULT_SEED)
    })
}

/// Integer coefficients of Φ_{2^n} = x^(2^(n-1)) + 1, lowest degree first.
pub fn cyclotomic_poly(n: u32) -> Result<Vec<i64>> {
    check_layer(n, MAX_FACTOR_LAYER)?;
    let deg = 1usize << (n - 1);
    let mut coeffs = vec![0; deg + 1];
    coeffs[0] = 1;
    coeffs[deg] = 1;
    Ok(coeffs)
}

/// A prime of K_n above p, as an irreducible factor of Φ_{2^n} mod p.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrimeIdealRep {
    pub p: u64,
    pub n: u32,
    pub h: FpPoly,
}

impl PrimeIdealRep {
    pub fn residue_degree(&self) -> usize {
        self.h.degree().unwrap_or(0)
    }

    /// ζ_{2^n} as an element of the residue field.
    pub fn zeta(&self) -> ResidueFieldElement<'_> {
        self.element(FpPoly::monomial(self.p, 1))
    }

    pub fn element(&self, value: FpPoly) -> ResidueFieldElement<'_> {
        ResidueFieldElement {
            ideal: self,
            value: value.rem(&self.h),
        }
    }

    /// Whether this prime of K_n lies over `lower`, a prime of K_(n-1).
    ///
    /// ζ_{2^n}^2 = ζ_{2^(n-1)}, so the containment holds iff h_lower(x^2)
    /// vanishes in F_p[x]/(h).
    pub fn lies_over(&self, lower: &PrimeIdealRep) -> bool {
        self.p == lower.p
            && self.n == lower.n + 1
            && lower.h.compose_square().rem(&self.h).is_zero()
    }
}

/// Index of the prime in `lowers` that `upper` lies over.
pub fn ideal_below(upper: &PrimeIdealRep, lowers: &[PrimeIdealRep]) -> Option<usize> {
    lowers.iter().position(|l| upper.lies_over(l))
}

/// Splits a product of distinct monic irreducibles, all of degree `degree`
/// (Cantor-Zassenhaus equal-degree splitting, p odd).
fn equal_degree_split(f: FpPoly, degree: usize, rng: &mut ChaCha8Rng, out: &mut Vec<FpPoly>) {
    let n = f.degree().expect("nonzero factor");
    if n == degree {
        out.push(f);
        return;
    }
    let p = f.modulus();
    let one = FpPoly::one(p);
    loop {
        let r = FpPoly::new(p, (0..n).map(|_| rng.gen_range(0..p)).collect());
        if r.degree().is_none_or(|d| d == 0) {
            continue;
        }
        let g = r.pow_half_order(degree, &f).sub(&one).gcd(&f);
        let gd = g.degree().unwrap_or(0);
        if gd > 0 && gd < n {
            let (q, _) = f.div_rem(&g);
            equal_degree_split(g, degree, rng, out);
            equal_degree_split(q.monic(), degree, rng, out);
            return;
        }
    }
}

/// The primes of K_n above an odd prime p, sorted by coefficient vector.
pub fn factor_cyclotomic_mod_p(p: u64, n: u32) -> Result<Vec<PrimeIdealRep>> {
    let f = order_mod_2n(p, n)? as usize;
    check_layer(n, MAX_FACTOR_LAYER)?;
    let phi = FpPoly::from_ints(p, &cyclotomic_poly(n)?);
    let seed = base_seed() ^ p.rotate_left(17) ^ ((n as u64) << 56);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut factors = Vec::new();
    equal_degree_split(phi, f, &mut rng, &mut factors);
    factors.sort();
    Ok(factors
        .into_iter()
        .map(|h| PrimeIdealRep { p, n, h })
        .collect())
}

/// An element of the residue field F_p[x]/(h) of a prime ideal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueFieldElement<'a> {
    pub ideal: &'a PrimeIdealRep,
    pub value: FpPoly,
}

impl<'a> ResidueFieldElement<'a> {
    pub fn mul(&self, other: &Self) -> Self {
        self.ideal.element(self.value.mul(&other.value))
    }

    pub fn pow(&self, e: u64) -> Self {
        self.ideal.element(self.value.pow_mod(e, &self.ideal.h))
    }

    pub fn inverse(&self) -> Option<Self> {
        self.value
            .inverse_mod(&self.ideal.h)
            .map(|v| self.ideal.element(v))
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }
}

/// Evaluates a unit generator in the residue field of `ideal`.
pub fn unit_element(
    generator: UnitGenerator,
    ideal: &PrimeIdealRep,
) -> Result<ResidueFieldElement<'_>> {
    let n = ideal.n;
    let generator = generator.validate(n)?;
    let p = ideal.p;
    let zeta = ideal.zeta();
    let elem = match generator {
        UnitGenerator::Zeta => zeta,
        UnitGenerator::Xi(k) => {
            // ζ has order 2^n; (1 - k) / 2 reduced into [0, 2^n).
            let order = 1u64 << n;
            let exponent = (order - ((k - 1) / 2) % order) % order;
            let one = FpPoly::one(p);
            let num = ideal.element(one.sub(&FpPoly::monomial(p, k as usize)));
            let den = ideal.element(one.sub(&FpPoly::monomial(p, 1)));
            let den_inv = den.inverse().ok_or(Error::NonUnitResidue(p))?;
            zeta.pow(exponent).mul(&num).mul(&den_inv)
        }
    };
    if elem.is_zero() {
        return Err(Error::NonUnitResidue(p));
    }
    Ok(elem)
}

/// Quadratic character of a nonzero residue field element:
/// elem^((p^f - 1) / 2) ∈ {1, -1}.
pub fn quadratic_symbol(elem: &ResidueFieldElement<'_>) -> Result<Sign> {
    if elem.is_zero() {
        return Err(Error::ZeroElement);
    }
    let ideal = elem.ideal;
    let power = elem
        .value
        .pow_half_order(ideal.residue_degree(), &ideal.h);
    match power.as_constant() {
        Some(1) => Ok(Sign::Plus),
        Some(c) if c == ideal.p - 1 => Ok(Sign::Minus),
        _ => panic!(
            "residue of {} modulo ({}, {}) is not ±1; h is not irreducible",
            elem.value, ideal.p, ideal.h
        ),
    }
}

/// Symbols of every unit generator at every prime above p.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolTable {
    pub p: u64,
    pub n: u32,
    pub ideals: Vec<PrimeIdealRep>,
    pub generators: Vec<UnitGenerator>,
    /// `values[i][j]`: symbol of `generators[j]` at `ideals[i]`.
    pub values: Vec<Vec<Sign>>,
}

impl SymbolTable {
    pub fn get(&self, ideal: usize, generator: UnitGenerator) -> Option<Sign> {
        let j = self.generators.iter().position(|&g| g == generator)?;
        self.values.get(ideal).map(|row| row[j])
    }

    /// Symbols of one generator across all ideals.
    pub fn column(&self, generator: UnitGenerator) -> Option<Vec<Sign>> {
        let j = self.generators.iter().position(|&g| g == generator)?;
        Some(self.values.iter().map(|row| row[j]).collect())
    }

    /// Whether each generator takes the same value at every ideal.
    pub fn is_constant_per_generator(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }
}

pub fn symbol_vector(p: u64, n: u32) -> Result<SymbolTable> {
    check_layer(n, MAX_SYMBOL_LAYER)?;
    let ideals = factor_cyclotomic_mod_p(p, n)?;
    let generators = UnitGenerator::all(n);
    let values = ideals
        .iter()
        .map(|ideal| {
            generators
                .iter()
                .map(|&g| quadratic_symbol(&unit_element(g, ideal)?))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SymbolTable {
        p,
        n,
        ideals,
        generators,
        values,
    })
}

/// Memo of symbol tables keyed by (p, n). Filling is idempotent, so a cached
/// lookup returns exactly what [`symbol_vector`] would.
#[derive(Debug, Default)]
pub struct SymbolCache {
    tables: Mutex<HashMap<(u64, u32), Arc<SymbolTable>>>,
}

impl SymbolCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, p: u64, n: u32) -> Result<Arc<SymbolTable>> {
        if let Some(t) = self.tables.lock().unwrap().get(&(p, n)) {
            return Ok(Arc::clone(t));
        }
        let table = Arc::new(symbol_vector(p, n)?);
        let mut tables = self.tables.lock().unwrap();
        Ok(Arc::clone(tables.entry((p, n)).or_insert(table)))
    }

    pub fn len(&self) -> usize {
        self.tables.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Calls `f` with every cached table.
    pub fn for_each(&self, mut f: impl FnMut(&SymbolTable)) {
        for t in self.tables.lock().unwrap().values() {
            f(t);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::odd_primes_in;
    use crate::splitting::num_primes_above;
    use num_bigint::BigUint;

    fn poly(p: u64, c: &[u64]) -> FpPoly {
        FpPoly::new(p, c.to_vec())
    }

    fn product(factors: &[PrimeIdealRep], p: u64) -> FpPoly {
        factors
            .iter()
            .fold(FpPoly::one(p), |acc, f| acc.mul(&f.h))
    }

    /// Irreducibility by brute force: no monic factor of degree ≤ deg/2.
    fn brute_irreducible(h: &FpPoly) -> bool {
        let p = h.modulus();
        let d = h.degree().unwrap();
        for k in 1..=d / 2 {
            let count = p.pow(k as u32);
            for idx in 0..count {
                let mut c = Vec::with_capacity(k + 1);
                let mut x = idx;
                for _ in 0..k {
                    c.push(x % p);
                    x /= p;
                }
                c.push(1);
                if h.rem(&FpPoly::new(p, c)).is_zero() {
                    return false;
                }
            }
        }
        true
    }

    /// elem^((p^f - 1) / 2) with the exponent as a big integer, square-and-multiply.
    fn direct_symbol(elem: &ResidueFieldElement<'_>) -> i8 {
        let ideal = elem.ideal;
        let q = BigUint::from(ideal.p).pow(ideal.residue_degree() as u32);
        let e: BigUint = (q - 1u32) / 2u32;
        let mut acc = FpPoly::one(ideal.p);
        for i in (0..e.bits()).rev() {
            acc = acc.mul_mod(&acc, &ideal.h);
            if e.bit(i) {
                acc = acc.mul_mod(&elem.value, &ideal.h);
            }
        }
        match acc.as_constant() {
            Some(1) => 1,
            Some(c) if c == ideal.p - 1 => -1,
            _ => panic!("not a sign"),
        }
    }

    #[test]
    fn cyclotomic_examples() {
        assert_eq!(cyclotomic_poly(3).unwrap(), vec![1, 0, 0, 0, 1]);
        let c4 = cyclotomic_poly(4).unwrap();
        assert_eq!((c4.len(), c4[0], c4[8]), (9, 1, 1));
        assert_eq!(cyclotomic_poly(5).unwrap().len(), 17);
        assert!(cyclotomic_poly(13).is_err());
    }

    #[test]
    fn factor_examples() {
        let f = factor_cyclotomic_mod_p(3, 3).unwrap();
        let hs: Vec<FpPoly> = f.iter().map(|i| i.h.clone()).collect();
        assert_eq!(hs, vec![poly(3, &[2, 1, 1]), poly(3, &[2, 2, 1])]);

        let f = factor_cyclotomic_mod_p(41, 3).unwrap();
        assert_eq!(f.len(), 4);
        assert!(f.iter().all(|i| i.residue_degree() == 1));

        let f = factor_cyclotomic_mod_p(7, 3).unwrap();
        assert_eq!(f.len(), 2);
        assert!(f.iter().all(|i| i.residue_degree() == 2));
    }

    #[test]
    fn factors_multiply_back_and_are_irreducible() {
        for p in odd_primes_in(3, 60) {
            for n in 3..=5 {
                let factors = factor_cyclotomic_mod_p(p, n).unwrap();
                let split = num_primes_above(p, n).unwrap();
                assert_eq!(factors.len() as u64, split.g);
                let phi = FpPoly::from_ints(p, &cyclotomic_poly(n).unwrap());
                assert_eq!(product(&factors, p), phi);
                for f in &factors {
                    assert!(f.h.is_monic());
                    assert_eq!(f.residue_degree() as u64, split.f);
                    if p.pow(f.residue_degree() as u32 / 2) < 5000 {
                        assert!(brute_irreducible(&f.h), "{} mod {p}", f.h);
                    }
                }
                assert!(factors.windows(2).all(|w| w[0].h < w[1].h));
            }
        }
    }

    #[test]
    fn factorization_is_deterministic() {
        for p in [3, 7, 41, 97, 7919] {
            assert_eq!(
                factor_cyclotomic_mod_p(p, 5).unwrap(),
                factor_cyclotomic_mod_p(p, 5).unwrap()
            );
        }
    }

    #[test]
    fn unit_element_examples() {
        let ideals = factor_cyclotomic_mod_p(3, 3).unwrap();
        let h = &ideals[0];
        assert_eq!(h.h, poly(3, &[2, 1, 1]));
        assert_eq!(unit_element(UnitGenerator::Zeta, h).unwrap().value, poly(3, &[0, 1]));
        assert_eq!(unit_element(UnitGenerator::Xi(3), h).unwrap().value, poly(3, &[2, 2]));
        assert_eq!(
            unit_element(UnitGenerator::Xi(9), h),
            Err(Error::InvalidGenerator { k: 9, n: 3 })
        );
    }

    #[test]
    fn xi_matches_geometric_sum_form() {
        // (1 - ζ^k) / (1 - ζ) = 1 + ζ + ... + ζ^(k-1), no inversion needed.
        for p in [3, 5, 7, 17, 31, 41, 97] {
            for n in 3..=5 {
                for ideal in factor_cyclotomic_mod_p(p, n).unwrap() {
                    for k in (3..1u64 << (n - 1)).step_by(2) {
                        let geometric = FpPoly::new(p, vec![1; k as usize]);
                        let shift = (1u64 << n) - (k - 1) / 2;
                        let expected = ideal.zeta().pow(shift).mul(&ideal.element(geometric));
                        let got = unit_element(UnitGenerator::Xi(k), &ideal).unwrap();
                        assert_eq!(got.value, expected.value);
                    }
                }
            }
        }
    }

    #[test]
    fn quadratic_symbol_examples() {
        let ideals = factor_cyclotomic_mod_p(3, 3).unwrap();
        let h = &ideals[0];
        let zeta = unit_element(UnitGenerator::Zeta, h).unwrap();
        assert_eq!(quadratic_symbol(&zeta).unwrap(), Sign::Minus);
        let xi = unit_element(UnitGenerator::Xi(3), h).unwrap();
        assert_eq!(quadratic_symbol(&xi).unwrap(), Sign::Minus);
        let one = h.element(FpPoly::one(3));
        assert_eq!(quadratic_symbol(&one).unwrap(), Sign::Plus);
        let zero = h.element(FpPoly::zero(3));
        assert_eq!(quadratic_symbol(&zero), Err(Error::ZeroElement));
    }

    #[test]
    fn quadratic_symbol_matches_big_exponent() {
        for p in [3, 5, 7, 11, 13, 23, 41, 73, 101] {
            for n in 3..=5 {
                for ideal in factor_cyclotomic_mod_p(p, n).unwrap() {
                    for g in UnitGenerator::all(n) {
                        let e = unit_element(g, &ideal).unwrap();
                        assert_eq!(quadratic_symbol(&e).unwrap().as_i8(), direct_symbol(&e));
                    }
                }
            }
        }
    }

    #[test]
    fn symbol_vector_examples() {
        let t = symbol_vector(5, 3).unwrap();
        assert_eq!(t.ideals.len(), 2);
        assert_eq!(t.column(UnitGenerator::Zeta).unwrap(), vec![Sign::Minus; 2]);
        assert_eq!(t.column(UnitGenerator::Xi(3)).unwrap(), vec![Sign::Plus; 2]);

        let t = symbol_vector(73, 3).unwrap();
        assert_eq!(t.column(UnitGenerator::Zeta).unwrap(), vec![Sign::Minus; 4]);
        assert_eq!(t.column(UnitGenerator::Xi(3)).unwrap(), vec![Sign::Minus; 4]);

        let t = symbol_vector(3, 4).unwrap();
        assert_eq!(t.column(UnitGenerator::Zeta).unwrap(), vec![Sign::Minus; 2]);
        assert_eq!(t.column(UnitGenerator::Xi(3)).unwrap(), vec![Sign::Minus; 2]);
        assert_eq!(t.column(UnitGenerator::Xi(5)).unwrap(), vec![Sign::Minus; 2]);
        assert_eq!(t.column(UnitGenerator::Xi(7)).unwrap(), vec![Sign::Plus; 2]);
        assert!(symbol_vector(3, 7).is_err());
    }

    #[test]
    fn tower_containment_and_zeta_compatibility() {
        for p in odd_primes_in(3, 400) {
            for n in 4..=5 {
                let lower = symbol_vector(p, n - 1).unwrap();
                let upper = symbol_vector(p, n).unwrap();
                let mut hits = vec![0usize; lower.ideals.len()];
                for (i, ideal) in upper.ideals.iter().enumerate() {
                    let below: Vec<usize> = (0..lower.ideals.len())
                        .filter(|&j| ideal.lies_over(&lower.ideals[j]))
                        .collect();
                    assert_eq!(below.len(), 1, "p = {p}, n = {n}");
                    hits[below[0]] += 1;
                    if upper.ideals.len() != lower.ideals.len() {
                        // Split step: ζ_{2^(n-1)} = ζ_{2^n}^2 is a square there.
                        assert_eq!(lower.get(below[0], UnitGenerator::Zeta), Some(Sign::Plus));
                        continue;
                    }
                    // Inert step: the local norm of ζ_{2^n} is -ζ_{2^(n-1)}.
                    assert_eq!(
                        upper.get(i, UnitGenerator::Zeta),
                        lower.get(below[0], UnitGenerator::Zeta),
                        "p = {p}, n = {n}"
                    );
                }
                let per = upper.ideals.len() / lower.ideals.len();
                assert!(hits.iter().all(|&h| h == per));
            }
        }
    }

    #[test]
    fn cache_matches_direct_computation() {
        let cache = SymbolCache::new();
        assert!(cache.is_empty());
        for p in [3, 7, 41] {
            let a = cache.get(p, 4).unwrap();
            let b = cache.get(p, 4).unwrap();
            assert_eq!(*a, symbol_vector(p, 4).unwrap());
            assert!(Arc::ptr_eq(&a, &b));
        }
        assert_eq!(cache.len(), 3);
    }
}
