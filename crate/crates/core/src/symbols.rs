//! Closed-form values of the norm residue symbols (u, p / 𝔭) for the unit
//! generators of K_n, keyed by the residue class of p.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::arith::Sign;
use crate::error::{Error, Result};
use crate::splitting::PrimeClass;

/// A generator of the unit group of K_n modulo torsion-free rank: the root
/// of unity ζ_{2^n} or a cyclotomic unit ξ_{k,n} = ζ^((1-k)/2)(1-ζ^k)/(1-ζ).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnitGenerator {
    Zeta,
    Xi(u64),
}

impl UnitGenerator {
    /// Checks 1 < k < 2^(n-1), k odd, for `Xi`.
    pub fn validate(self, n: u32) -> Result<Self> {
        match self {
            UnitGenerator::Zeta => Ok(self),
            UnitGenerator::Xi(k) => {
                if k % 2 == 1 && k > 1 && k < 1u64 << (n - 1) {
                    Ok(self)
                } else {
                    Err(Error::InvalidGenerator { k, n })
                }
            }
        }
    }

    /// ζ_{2^n} followed by ξ_{3,n}, ξ_{5,n}, ..., ξ_{2^(n-1)-1,n}.
    pub fn all(n: u32) -> Vec<UnitGenerator> {
        std::iter::once(UnitGenerator::Zeta)
            .chain((3..1u64 << (n - 1)).step_by(2).map(UnitGenerator::Xi))
            .collect()
    }
}

impl fmt::Display for UnitGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnitGenerator::Zeta => write!(f, "zeta"),
            UnitGenerator::Xi(k) => write!(f, "xi{k}"),
        }
    }
}

impl Serialize for UnitGenerator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymbolValue {
    Known(Sign),
    /// Known only up to an unmeasured sign; see [`xi_symbol_mod16`].
    Undetermined,
}

impl SymbolValue {
    pub const PLUS: SymbolValue = SymbolValue::Known(Sign::Plus);
    pub const MINUS: SymbolValue = SymbolValue::Known(Sign::Minus);

    pub fn sign(self) -> Option<Sign> {
        match self {
            SymbolValue::Known(s) => Some(s),
            SymbolValue::Undetermined => None,
        }
    }
}

fn require_main_class(pc: &PrimeClass) -> Result<()> {
    if pc.in_main_classes() {
        Ok(())
    } else {
        Err(pc.unsupported())
    }
}

fn check_odd_k(k: u64) -> Result<()> {
    if k % 2 == 1 {
        Ok(())
    } else {
        Err(Error::InvalidGenerator { k, n: 0 })
    }
}

/// Symbol of ζ_{2^n} at any prime above p; -1 for p ≡ ±3 (mod 8) and 9 (mod 16).
pub fn zeta_symbol(pc: &PrimeClass) -> Result<SymbolValue> {
    require_main_class(pc)?;
    Ok(SymbolValue::MINUS)
}

/// Symbol of ξ_{k,n} at any prime above p, for p ≡ ±3 (mod 8) or 9 (mod 16).
///
/// Only k mod 8 matters: k ≡ ±1 always gives +1, k ≡ ±3 gives +1 for
/// p ≡ 5 (mod 8), -1 for p ≡ 3 (mod 8) and -(2/p)_4 for p ≡ 9 (mod 16).
pub fn xi_symbol(k: u64, pc: &PrimeClass) -> Result<SymbolValue> {
    require_main_class(pc)?;
    check_odd_k(k)?;
    if !matches!(k % 8, 3 | 5) {
        return Ok(SymbolValue::PLUS);
    }
    let value = match pc.class8 {
        5 => Sign::Plus,
        3 => Sign::Minus,
        _ => {
            let quartic = pc.quartic.expect("p ≡ 9 (mod 16) carries (2/p)_4");
            quartic.value.negate()
        }
    };
    Ok(SymbolValue::Known(value))
}

/// Symbol of ξ_{k,n} (n ≥ 4) at a prime above p ≡ 7 (mod 16), relative to the
/// measured K_4 symbols of ξ_{3,4}, ξ_{5,4}, ξ_{7,4} at the prime below.
///
/// For k ≡ 11, 13, 15 (mod 16) the value is the K_4 reference times an
/// unknown sign, reported as `Undetermined`.
pub fn xi_symbol_mod16(k: u64, pc: &PrimeClass, k4_symbols: [Sign; 3]) -> Result<SymbolValue> {
    if pc.class16 != 7 {
        return Err(pc.unsupported());
    }
    check_odd_k(k)?;
    Ok(match k % 16 {
        1 | 9 => SymbolValue::PLUS,
        3 => SymbolValue::Known(k4_symbols[0]),
        5 => SymbolValue::Known(k4_symbols[1]),
        7 => SymbolValue::Known(k4_symbols[2]),
        _ => SymbolValue::Undetermined,
    })
}

/// Closed-form value for any generator, where one exists.
pub fn generator_symbol(generator: UnitGenerator, pc: &PrimeClass) -> Result<SymbolValue> {
    match generator {
        UnitGenerator::Zeta => zeta_symbol(pc),
        UnitGenerator::Xi(k) => xi_symbol(k, pc),
    }
}
