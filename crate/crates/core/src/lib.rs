//! 2-rank of the class group of L(n, d) = Q(ζ_{2^n}, √d) for odd square-free d.
//!
//! Three independent routes compute the rank:
//!
//! * [`closed_form`]: formulas in the residue classes of the divisors of d
//!   (mod 8 and mod 16) and the quartic symbol (2/p)_4;
//! * [`engine`] with [`symbols`]: the GF(2) matrix of closed-form unit
//!   symbols, rank = t - 1 - e;
//! * [`engine`] with [`ff`]: the same matrix built from quadratic characters
//!   in the residue fields F_p[x]/(h), h | x^(2^(n-1)) + 1.
//!
//! [`sweep`] runs the cross-checks over ranges of primes and of d.

pub mod arith;
pub mod closed_form;
pub mod engine;
pub mod error;
pub mod ff;
pub mod poly;
pub mod splitting;
pub mod sweep;
pub mod symbols;

pub use arith::{factor_square_free, Sign, SquareFreeOdd};
pub use engine::{RankReport, TowerReport};
pub use error::{Error, Result};
pub use ff::SymbolCache;
