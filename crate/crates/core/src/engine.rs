//! 2-rank via the ambiguous class number formula rank = t - 1 - e.
//!
//! t counts the primes of K_n ramified in L = K_n(√d), i.e. the primes above
//! divisors of d. 2^e is the index of the norm units in E_{K_n}; a unit is a
//! norm iff its symbol is trivial at every ramified prime, so e is the GF(2)
//! rank of the matrix of unit symbols (rows: generators, columns: primes).

use std::fmt;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::arith::{SquareFreeOdd, Sign};
use crate::error::{Error, Result};
use crate::ff::{PrimeIdealRep, SymbolCache};
use crate::splitting::{classify_prime, ramified_count};
use crate::symbols::{generator_symbol, SymbolValue, UnitGenerator};

/// Layers where the base field has odd class number and the unit group is
/// generated by ζ and the cyclotomic units.
pub const CERTIFIED_LAYERS: [u32; 3] = [3, 4, 5];

/// A dense matrix over GF(2), one bitset per row.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Gf2Matrix {
    cols: usize,
    rows: Vec<Vec<u64>>,
}

impl Gf2Matrix {
    pub fn new(cols: usize) -> Self {
        Gf2Matrix {
            cols,
            rows: Vec::new(),
        }
    }

    pub fn from_rows(cols: usize, rows: &[Vec<bool>]) -> Self {
        let mut m = Gf2Matrix::new(cols);
        for r in rows {
            m.push_row(r);
        }
        m
    }

    pub fn push_row(&mut self, bits: &[bool]) {
        assert_eq!(bits.len(), self.cols, "row length mismatch");
        let mut words = vec![0u64; self.cols.div_ceil(64)];
        for (i, &b) in bits.iter().enumerate() {
            if b {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        self.rows.push(words);
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.rows[row][col / 64] >> (col % 64) & 1 == 1
    }

    pub fn row_bits(&self, row: usize) -> Vec<bool> {
        (0..self.cols).map(|c| self.get(row, c)).collect()
    }

    /// Rank by Gaussian elimination.
    pub fn rank(&self) -> usize {
        let mut rows = self.rows.clone();
        let mut rank = 0;
        for col in 0..self.cols {
            let (w, bit) = (col / 64, 1u64 << (col % 64));
            let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][w] & bit != 0) else {
                continue;
            };
            rows.swap(rank, pivot);
            let pivot_row = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row[w] & bit != 0 {
                    for (a, b) in row.iter_mut().zip(&pivot_row) {
                        *a ^= b;
                    }
                }
            }
            rank += 1;
        }
        rank
    }
}

/// Column label of a symbol matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnLabel {
    /// One column per rational prime (closed-form entries).
    Prime(u64),
    /// One column per prime of K_n; `index` is its position in the
    /// canonical ordering of the primes above `ideal.p`.
    Ideal { index: usize, ideal: PrimeIdealRep },
}

impl ColumnLabel {
    pub fn prime(&self) -> u64 {
        match self {
            ColumnLabel::Prime(p) => *p,
            ColumnLabel::Ideal { ideal, .. } => ideal.p,
        }
    }
}

impl fmt::Display for ColumnLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnLabel::Prime(p) => write!(f, "{p}"),
            ColumnLabel::Ideal { index, ideal } => write!(f, "{}[{index}]", ideal.p),
        }
    }
}

/// Symbols of the unit generators at the ramified primes, as GF(2) bits
/// (1 iff the symbol is -1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gf2SymbolMatrix {
    pub rows: Vec<UnitGenerator>,
    pub columns: Vec<ColumnLabel>,
    pub bits: Gf2Matrix,
}

impl Gf2SymbolMatrix {
    pub fn row(&self, generator: UnitGenerator) -> Option<Vec<bool>> {
        let i = self.rows.iter().position(|&g| g == generator)?;
        Some(self.bits.row_bits(i))
    }

    /// Column bit-vector (one bit per generator).
    pub fn column_bits(&self, col: usize) -> Vec<bool> {
        (0..self.rows.len()).map(|r| self.bits.get(r, col)).collect()
    }
}

pub fn gf2_rank(m: &Gf2SymbolMatrix) -> usize {
    m.bits.rank()
}

/// Closed-form symbol matrix: rows ζ and ξ_3 (the class of every ξ_k with
/// k ≡ ±3 mod 8; the ξ_k with k ≡ ±1 mod 8 are norms), one column per prime.
pub fn build_matrix_symbolic(d: &SquareFreeOdd) -> Result<Gf2SymbolMatrix> {
    let rows = vec![UnitGenerator::Zeta, UnitGenerator::Xi(3)];
    let classes = d
        .primes()
        .iter()
        .map(|&p| classify_prime(p))
        .collect::<Result<Vec<_>>>()?;
    let mut bits = Gf2Matrix::new(classes.len());
    for &g in &rows {
        let row = classes
            .iter()
            .map(|pc| match generator_symbol(g, pc)? {
                SymbolValue::Known(s) => Ok(s.is_minus()),
                SymbolValue::Undetermined => Err(pc.unsupported()),
            })
            .collect::<Result<Vec<_>>>()?;
        bits.push_row(&row);
    }
    Ok(Gf2SymbolMatrix {
        rows,
        columns: d.primes().iter().map(|&p| ColumnLabel::Prime(p)).collect(),
        bits,
    })
}

/// Finite-field symbol matrix over every generator and every prime of K_n
/// above d.
pub fn build_matrix_numeric(d: &SquareFreeOdd, n: u32) -> Result<Gf2SymbolMatrix> {
    build_matrix_numeric_cached(d, n, &SymbolCache::new())
}

pub fn build_matrix_numeric_cached(
    d: &SquareFreeOdd,
    n: u32,
    cache: &SymbolCache,
) -> Result<Gf2SymbolMatrix> {
    check_certified(n)?;
    let rows = UnitGenerator::all(n);
    let tables = d
        .primes()
        .iter()
        .map(|&p| cache.get(p, n))
        .collect::<Result<Vec<_>>>()?;
    let columns: Vec<ColumnLabel> = tables
        .iter()
        .flat_map(|t| {
            t.ideals.iter().enumerate().map(|(index, ideal)| ColumnLabel::Ideal {
                index,
                ideal: ideal.clone(),
            })
        })
        .collect();
    let mut bits = Gf2Matrix::new(columns.len());
    for j in 0..rows.len() {
        let row: Vec<bool> = tables
            .iter()
            .flat_map(|t| t.values.iter().map(move |v| v[j].is_minus()))
            .collect();
        bits.push_row(&row);
    }
    Ok(Gf2SymbolMatrix {
        rows,
        columns,
        bits,
    })
}

fn check_certified(n: u32) -> Result<()> {
    if CERTIFIED_LAYERS.contains(&n) {
        Ok(())
    } else {
        Err(Error::LayerOutOfRange(n))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    SymbolicMatrix,
    NumericMatrix,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::SymbolicMatrix => "symbolic_matrix",
            Method::NumericMatrix => "numeric_matrix",
        }
    }
}

/// Which item of the four-case theorem (or related statement) applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CaseLabel {
    Case1,
    Case2,
    Case3,
    Case4,
    Theorem3,
    Appendix,
}

impl CaseLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseLabel::Case1 => "Case1",
            CaseLabel::Case2 => "Case2",
            CaseLabel::Case3 => "Case3",
            CaseLabel::Case4 => "Case4",
            CaseLabel::Theorem3 => "Theorem3",
            CaseLabel::Appendix => "Appendix",
        }
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Result of one rank computation. Serializes with the fixed field order
/// `d, n, t, e, rank, method, case, stable_from`; `n = null` means the value
/// holds for every layer n ≥ 3.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankReport {
    #[serde(serialize_with = "serialize_d")]
    pub d: SquareFreeOdd,
    pub n: Option<u32>,
    pub t: u64,
    pub e: u64,
    pub rank: u64,
    pub method: Method,
    pub case: Option<CaseLabel>,
    pub stable_from: Option<u32>,
}

fn serialize_d<S: Serializer>(d: &SquareFreeOdd, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_u64(d.value())
}

/// rank = t - 1 - e with e the GF(2) rank of `m`.
pub fn rank_from_matrix(
    d: &SquareFreeOdd,
    n: u32,
    m: &Gf2SymbolMatrix,
    t: u64,
    method: Method,
) -> Result<RankReport> {
    check_certified(n)?;
    let e = gf2_rank(m) as u64;
    assert!(
        e < t,
        "e = {e} must be below t = {t}: the symbols of a unit multiply to 1"
    );
    Ok(RankReport {
        d: d.clone(),
        n: Some(n),
        t,
        e,
        rank: t - 1 - e,
        method,
        case: None,
        stable_from: None,
    })
}

/// Symbolic-matrix rank at layer n. The closed-form symbols are the same at
/// every layer; only t is layer-dependent.
pub fn symbolic_rank(d: &SquareFreeOdd, n: u32) -> Result<RankReport> {
    let m = build_matrix_symbolic(d)?;
    let t = ramified_count(d, n)?;
    rank_from_matrix(d, n, &m, t, Method::SymbolicMatrix)
}

pub fn numeric_rank(d: &SquareFreeOdd, n: u32) -> Result<RankReport> {
    numeric_rank_cached(d, n, &SymbolCache::new())
}

pub fn numeric_rank_cached(d: &SquareFreeOdd, n: u32, cache: &SymbolCache) -> Result<RankReport> {
    let m = build_matrix_numeric_cached(d, n, cache)?;
    let t = ramified_count(d, n)?;
    rank_from_matrix(d, n, &m, t, Method::NumericMatrix)
}

/// Per-layer numeric ranks at n = 3, 4, 5 with the tower verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TowerReport {
    #[serde(serialize_with = "serialize_d")]
    pub d: SquareFreeOdd,
    pub layers: Vec<RankReport>,
    /// First layer n with rank(n) = rank(n + 1); the rank is then constant
    /// for all m ≥ n. `None` means undetermined beyond layer 5.
    pub stable_from: Option<u32>,
}

impl TowerReport {
    pub fn rank_at(&self, n: u32) -> Option<u64> {
        self.layers.iter().find(|r| r.n == Some(n)).map(|r| r.rank)
    }

    /// The stable rank, if the tower has stabilized.
    pub fn stable_rank(&self) -> Option<u64> {
        self.stable_from.and_then(|n| self.rank_at(n))
    }

    pub fn verdict(&self) -> String {
        match self.stable_from {
            Some(n) => format!("stable from n = {n}"),
            None => "undetermined beyond layer 5".to_string(),
        }
    }
}

pub fn tower_rank(d: &SquareFreeOdd) -> Result<TowerReport> {
    tower_rank_cached(d, &SymbolCache::new())
}

pub fn tower_rank_cached(d: &SquareFreeOdd, cache: &SymbolCache) -> Result<TowerReport> {
    let layers = CERTIFIED_LAYERS
        .par_iter()
        .map(|&n| numeric_rank_cached(d, n, cache))
        .collect::<Result<Vec<_>>>()?;
    let stable_from = layers
        .windows(2)
        .find(|w| w[0].rank == w[1].rank)
        .and_then(|w| w[0].n);
    let layers = layers
        .into_iter()
        .map(|mut r| {
            r.stable_from = stable_from.filter(|&s| Some(s) <= r.n);
            r
        })
        .collect();
    Ok(TowerReport {
        d: d.clone(),
        layers,
        stable_from,
    })
}

/// Symbol of `generator` at every prime above p from the numeric oracle,
/// flattened over the ideals in canonical order.
pub fn numeric_symbols(p: u64, n: u32, generator: UnitGenerator, cache: &SymbolCache) -> Result<Vec<Sign>> {
    let t = cache.get(p, n)?;
    let generator = generator.validate(n)?;
    Ok(t.column(generator).expect("generator list covers all valid generators"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::factor_square_free;
    use proptest::prelude::*;

    fn sf(d: u64) -> SquareFreeOdd {
        factor_square_free(d).unwrap()
    }

    /// Size of the row span, by enumerating all 2^rows combinations.
    fn span_size(rows: &[Vec<bool>]) -> usize {
        let mut seen = std::collections::HashSet::new();
        for mask in 0u32..1 << rows.len() {
            let mut v = vec![false; rows.first().map_or(0, |r| r.len())];
            for (i, r) in rows.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    for (a, b) in v.iter_mut().zip(r) {
                        *a ^= b;
                    }
                }
            }
            seen.insert(v);
        }
        seen.len()
    }

    #[test]
    fn rank_examples() {
        let m = Gf2Matrix::from_rows(2, &[vec![true, true], vec![false, true]]);
        assert_eq!(m.rank(), 2);
        let m = Gf2Matrix::from_rows(3, &[vec![false; 3], vec![false; 3]]);
        assert_eq!(m.rank(), 0);
        assert_eq!(Gf2Matrix::from_rows(1, &[vec![true]]).rank(), 1);
        assert_eq!(Gf2Matrix::new(0).rank(), 0);
    }

    #[test]
    fn rank_wide_matrices() {
        // Columns past the first word.
        let mut rows = vec![vec![false; 130]; 3];
        rows[0][129] = true;
        rows[1][64] = true;
        rows[2][64] = true;
        rows[2][129] = true;
        assert_eq!(Gf2Matrix::from_rows(130, &rows).rank(), 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]
        #[test]
        fn rank_matches_span_enumeration(
            rows in 0usize..=4,
            cols in 0usize..=6,
            seed in proptest::collection::vec(any::<bool>(), 24),
        ) {
            let m: Vec<Vec<bool>> = (0..rows).map(|r| seed[r * 6..r * 6 + cols].to_vec()).collect();
            let rank = Gf2Matrix::from_rows(cols, &m).rank();
            prop_assert_eq!(1usize << rank, span_size(&m));
        }
    }

    #[test]
    fn symbolic_matrix_examples() {
        let m = build_matrix_symbolic(&sf(15)).unwrap();
        assert_eq!(m.row(UnitGenerator::Zeta).unwrap(), vec![true, true]);
        assert_eq!(m.row(UnitGenerator::Xi(3)).unwrap(), vec![true, false]);

        let m = build_matrix_symbolic(&sf(41 * 73)).unwrap();
        assert_eq!(m.row(UnitGenerator::Zeta).unwrap(), vec![true, true]);
        assert_eq!(m.row(UnitGenerator::Xi(3)).unwrap(), vec![false, true]);

        let m = build_matrix_symbolic(&sf(3)).unwrap();
        assert_eq!(m.row(UnitGenerator::Xi(3)).unwrap(), vec![true]);

        assert!(matches!(
            build_matrix_symbolic(&sf(3 * 7)),
            Err(Error::UnsupportedClass { prime: 7, .. })
        ));
    }

    #[test]
    fn numeric_matrix_examples() {
        let m = build_matrix_numeric(&sf(15), 3).unwrap();
        assert_eq!(m.columns.len(), 4);
        let sym = build_matrix_symbolic(&sf(15)).unwrap();
        for (c, label) in m.columns.iter().enumerate() {
            let pc = sym.columns.iter().position(|l| l.prime() == label.prime()).unwrap();
            assert_eq!(m.bits.get(0, c), sym.bits.get(0, pc));
            assert_eq!(m.bits.get(1, c), sym.bits.get(1, pc));
        }

        let m = build_matrix_numeric(&sf(41), 3).unwrap();
        assert_eq!(m.columns.len(), 4);
        assert_eq!(m.row(UnitGenerator::Zeta).unwrap(), vec![true; 4]);

        let m = build_matrix_numeric(&sf(7 * 23), 4).unwrap();
        assert_eq!(m.columns.len(), 8);
        assert_eq!(m.rows.len(), 4);
        assert!(build_matrix_numeric(&sf(15), 6).is_err());
    }

    #[test]
    fn rank_from_matrix_examples() {
        let d = sf(15);
        let r = numeric_rank(&d, 5).unwrap();
        assert_eq!((r.t, r.e, r.rank), (4, 2, 1));
        let r = numeric_rank(&sf(41), 4).unwrap();
        assert_eq!((r.t, r.e, r.rank), (4, 1, 2));
        let r = numeric_rank(&sf(41 * 73), 4).unwrap();
        assert_eq!((r.t, r.e, r.rank), (8, 2, 5));
        let m = build_matrix_symbolic(&d).unwrap();
        assert_eq!(
            rank_from_matrix(&d, 6, &m, 4, Method::SymbolicMatrix),
            Err(Error::LayerOutOfRange(6))
        );
    }

    #[test]
    fn tower_examples() {
        let t = tower_rank(&sf(15)).unwrap();
        assert_eq!(t.layers.iter().map(|r| r.rank).collect::<Vec<_>>(), vec![1, 1, 1]);
        assert_eq!(t.stable_from, Some(3));

        let t = tower_rank(&sf(41)).unwrap();
        assert_eq!(t.layers.iter().map(|r| r.rank).collect::<Vec<_>>(), vec![2, 2, 2]);
        assert_eq!(t.stable_from, Some(3));

        let t = tower_rank(&sf(7 * 23)).unwrap();
        assert_eq!(t.rank_at(4), t.rank_at(5));
        assert!(t.stable_from.is_some_and(|n| n <= 4));
    }

    #[test]
    fn report_json_field_order() {
        let r = numeric_rank(&sf(15), 3).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(
            json,
            r#"{"d":15,"n":3,"t":4,"e":2,"rank":1,"method":"numeric_matrix","case":null,"stable_from":null}"#
        );
    }
}
