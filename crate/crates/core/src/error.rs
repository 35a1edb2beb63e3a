use thiserror::Error;

/// Domain errors raised by the arithmetic, symbol and rank routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is even")]
    NotOdd(u64),
    #[error("{value} is not square-free (divisible by {prime}^2)")]
    NotSquareFree { value: u64, prime: u64 },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{value} is out of range: {reason}")]
    OutOfRange { value: u64, reason: &'static str },
    #[error("prime {prime} is in residue class {residue} mod {modulus}, expected {expected}")]
    WrongResidueClass {
        prime: u64,
        residue: u64,
        modulus: u64,
        expected: &'static str,
    },
    #[error("divisor {prime} (≡ {class16} mod 16) is outside the supported residue classes")]
    UnsupportedClass { prime: u64, class16: u64 },
    #[error("{0} is prime; the four-case formula needs a composite d")]
    NotComposite(u64),
    #[error("layer n = {0} is outside the certified range 3..=5")]
    LayerOutOfRange(u32),
    #[error("invalid unit generator xi_{k} at layer {n}: k must be odd with 1 < k < 2^(n-1)")]
    InvalidGenerator { k: u64, n: u32 },
    #[error("cyclotomic unit reduced to zero modulo a prime above {0}")]
    NonUnitResidue(u64),
    #[error("quadratic character of the zero element")]
    ZeroElement,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
