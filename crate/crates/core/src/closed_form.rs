//! Closed-form 2-ranks from the residue classes of the divisors of d.

use serde::Serialize;

use crate::arith::{SquareFreeOdd, Sign};
use crate::engine::{numeric_rank_cached, CaseLabel, Method, RankReport};
use crate::error::{Error, Result};
use crate::ff::SymbolCache;
use crate::splitting::{classify_prime, PrimeClass};

/// Case of the four-case formula with the divisor counts it depends on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TheoremCase {
    pub label: CaseLabel,
    /// Divisors ≡ 9 (mod 16).
    pub q: u64,
    /// Divisors ≡ 3, 5 (mod 8).
    pub r: u64,
    pub t: u64,
}

fn classes(d: &SquareFreeOdd) -> Result<Vec<PrimeClass>> {
    d.primes().iter().map(|&p| classify_prime(p)).collect()
}

fn quartic(pc: &PrimeClass) -> Sign {
    pc.quartic.expect("p ≡ 9 (mod 16) carries (2/p)_4").value
}

/// Case assignment and the rank offset it implies (rank = t - offset).
fn classify_case(classes: &[PrimeClass]) -> (TheoremCase, u64) {
    let q = classes.iter().filter(|c| c.class16 == 9).count() as u64;
    let r = classes.len() as u64 - q;
    let t = 4 * q + 2 * r;
    let has3 = classes.iter().any(|c| c.class8 == 3);
    let has5 = classes.iter().any(|c| c.class8 == 5);
    let has_quartic = |s: Sign| classes.iter().any(|c| c.class16 == 9 && quartic(c) == s);
    let (label, offset) = match (has3, has5) {
        (true, true) => (CaseLabel::Case1, 3),
        (true, false) => (CaseLabel::Case2, if has_quartic(Sign::Minus) { 3 } else { 2 }),
        (false, true) => (CaseLabel::Case3, if has_quartic(Sign::Plus) { 3 } else { 2 }),
        (false, false) => {
            let both = has_quartic(Sign::Plus) && has_quartic(Sign::Minus);
            (CaseLabel::Case4, if both { 3 } else { 2 })
        }
    };
    (TheoremCase { label, q, r, t }, offset)
}

/// Case data for d, checking the class hypothesis but not compositeness.
pub fn theorem_case(d: &SquareFreeOdd) -> Result<TheoremCase> {
    let classes = classes(d)?;
    if let Some(bad) = classes.iter().find(|c| !c.in_main_classes()) {
        return Err(bad.unsupported());
    }
    Ok(classify_case(&classes).0)
}

/// Four-case formula for composite d with every divisor ≡ ±3 (mod 8) or
/// 9 (mod 16). The rank is the same at every layer n ≥ 3.
pub fn rank_theorem1(d: &SquareFreeOdd) -> Result<RankReport> {
    let classes = classes(d)?;
    if let Some(bad) = classes.iter().find(|c| !c.in_main_classes()) {
        return Err(bad.unsupported());
    }
    if d.is_prime() {
        return Err(Error::NotComposite(d.value()));
    }
    let (case, offset) = classify_case(&classes);
    Ok(RankReport {
        d: d.clone(),
        n: None,
        t: case.t,
        e: offset - 1,
        rank: case.t - offset,
        method: Method::ClosedForm,
        case: Some(case.label),
        stable_from: Some(3),
    })
}

/// Single prime p ≡ 9 (mod 16): rank 2 at every layer.
pub fn rank_theorem3(p: u64) -> Result<RankReport> {
    if p % 16 != 9 {
        return Err(Error::WrongResidueClass {
            prime: p,
            residue: p % 16,
            modulus: 16,
            expected: "9",
        });
    }
    let pc = classify_prime(p)?;
    let d = crate::arith::factor_square_free(pc.p)?;
    Ok(RankReport {
        d,
        n: None,
        t: 4,
        e: 1,
        rank: 2,
        method: Method::ClosedForm,
        case: Some(CaseLabel::Theorem3),
        stable_from: Some(3),
    })
}

/// Closed form for any d it covers: the four-case formula for composite d,
/// the single-prime formula for p ≡ 9 (mod 16). `None` if neither applies.
pub fn closed_form_rank(d: &SquareFreeOdd) -> Option<RankReport> {
    if d.is_prime() {
        rank_theorem3(d.value()).ok()
    } else {
        rank_theorem1(d).ok()
    }
}

/// The layer relation rank(n) = rank(4) for all n ≥ 4, optionally with the
/// layer-4 rank from the numeric engine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StabilizationClaim {
    pub d: u64,
    pub from_layer: u32,
    pub layer4: Option<RankReport>,
}

pub fn stabilization_theorem(d: &SquareFreeOdd, compute_rank: bool) -> Result<StabilizationClaim> {
    stabilization_theorem_cached(d, compute_rank, &SymbolCache::new())
}

pub fn stabilization_theorem_cached(
    d: &SquareFreeOdd,
    compute_rank: bool,
    cache: &SymbolCache,
) -> Result<StabilizationClaim> {
    let classes = classes(d)?;
    if let Some(bad) = classes.iter().find(|c| !c.in_appendix_classes()) {
        return Err(bad.unsupported());
    }
    let layer4 = if compute_rank {
        let mut r = numeric_rank_cached(d, 4, cache)?;
        r.case = Some(CaseLabel::Appendix);
        r.stable_from = Some(4);
        Some(r)
    } else {
        None
    };
    Ok(StabilizationClaim {
        d: d.value(),
        from_layer: 4,
        layer4,
    })
}
