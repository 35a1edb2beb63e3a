use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use serde::Serialize;
use serde_json::Value;

use zeta2rank::arith::{is_prime, Sign};
use zeta2rank::closed_form::{closed_form_rank, rank_theorem1, rank_theorem3};
use zeta2rank::engine::{numeric_rank_cached, symbolic_rank, tower_rank_cached, RankReport, CERTIFIED_LAYERS};
use zeta2rank::ff::{ideal_below, SymbolCache, SymbolTable, MAX_SYMBOL_LAYER};
use zeta2rank::splitting::{classify_prime, num_primes_above, MAX_LAYER, MIN_LAYER};
use zeta2rank::sweep::{survey, verify, ClassFilter, LemmaId, SurveyRow};
use zeta2rank::symbols::{generator_symbol, xi_symbol_mod16, SymbolValue, UnitGenerator};
use zeta2rank::{factor_square_free, Error, SquareFreeOdd};

use crate::{Command, Format, MethodArg, OutFormat};

pub fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Rank { d, n, method, format } => rank(d, n, method, format),
        Command::Split { p, n } => split(p, n),
        Command::Symbol { p, n, k, zeta } => {
            let generator = if zeta { UnitGenerator::Zeta } else { UnitGenerator::Xi(k.expect("clap requires k")) };
            symbol(p, n, generator)
        }
        Command::Survey {
            max,
            classes,
            out,
            file,
            jobs,
        } => {
            set_jobs(jobs)?;
            run_survey(max, &classes, out, file.as_deref())
        }
        Command::Verify {
            lemma,
            bound,
            jobs,
            format,
        } => {
            set_jobs(jobs)?;
            run_verify(&lemma, bound, format)
        }
        Command::Tower { d, format } => tower(d, format),
    }
}

fn set_jobs(jobs: Option<usize>) -> Result<()> {
    if let Some(j) = jobs {
        if j == 0 {
            return Err(anyhow!("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .context("configuring the worker pool")?;
    }
    Ok(())
}

fn parse_d(d: u64) -> Result<SquareFreeOdd> {
    factor_square_free(d).with_context(|| format!("invalid d = {d}"))
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string(value)?);
    Ok(())
}

/// The closed form for d, or the error explaining why it does not apply.
fn closed(d: &SquareFreeOdd) -> Result<RankReport, Error> {
    match closed_form_rank(d) {
        Some(r) => Ok(r),
        None if d.is_prime() => rank_theorem3(d.value()),
        None => rank_theorem1(d),
    }
}

fn path_not_applicable(e: &Error) -> bool {
    matches!(
        e,
        Error::UnsupportedClass { .. } | Error::NotComposite(_) | Error::WrongResidueClass { .. } | Error::LayerOutOfRange(_)
    )
}

#[derive(Serialize)]
struct Consistency {
    consistent: bool,
    paths: usize,
}

fn rank(d: u64, n: Option<u32>, method: MethodArg, format: Format) -> Result<ExitCode> {
    let sf = parse_d(d)?;
    if let Some(n) = n {
        if !(MIN_LAYER..=MAX_LAYER).contains(&n) {
            return Err(Error::LayerOutOfRange(n).into());
        }
    }
    let layers: Vec<u32> = n.map_or(CERTIFIED_LAYERS.to_vec(), |n| vec![n]);
    let cache = SymbolCache::new();
    let layered = |f: &dyn Fn(u32) -> Result<RankReport, Error>| -> Result<Vec<RankReport>, Error> {
        layers.iter().map(|&n| f(n)).collect()
    };
    let symbolic = |n| symbolic_rank(&sf, n);
    let numeric = |n| numeric_rank_cached(&sf, n, &cache);

    let mut reports = Vec::new();
    match method {
        MethodArg::Closed => reports.push(closed(&sf)?),
        MethodArg::Symbolic => reports.extend(layered(&symbolic)?),
        MethodArg::Numeric => reports.extend(layered(&numeric)?),
        MethodArg::All => {
            let mut first_error = None;
            for result in [closed(&sf).map(|r| vec![r]), layered(&symbolic), layered(&numeric)] {
                match result {
                    Ok(r) => reports.extend(r),
                    Err(e) if path_not_applicable(&e) => {
                        first_error.get_or_insert(e);
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            if reports.is_empty() {
                return Err(first_error.map_or_else(|| anyhow!("no method applies to d = {d}"), Into::into));
            }
        }
    }

    let consistent = reports.iter().all(|a| {
        reports
            .iter()
            .all(|b| a.rank == b.rank || (a.n.is_some() && b.n.is_some() && a.n != b.n))
    });
    match format {
        Format::Json => {
            for r in &reports {
                print_json(r)?;
            }
            if method == MethodArg::All {
                print_json(&Consistency {
                    consistent,
                    paths: reports.len(),
                })?;
            }
        }
        Format::Table => {
            println!("{:<16} {:>3} {:>4} {:>3} {:>5}  case", "method", "n", "t", "e", "rank");
            for r in &reports {
                let n = r.n.map_or("*".to_string(), |n| n.to_string());
                let case = r.case.map_or("-", |c| c.as_str());
                println!("{:<16} {:>3} {:>4} {:>3} {:>5}  {case}", r.method.as_str(), n, r.t, r.e, r.rank);
            }
            if method == MethodArg::All {
                println!("consistent: {consistent}");
            }
        }
    }
    Ok(if consistent { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn checked_prime(p: u64) -> Result<()> {
    if p.is_multiple_of(2) {
        return Err(Error::NotOdd(p).into());
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p).into());
    }
    Ok(())
}

fn split(p: u64, n: u32) -> Result<ExitCode> {
    checked_prime(p)?;
    print_json(&num_primes_above(p, n)?)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct IdealSymbol {
    factor: String,
    symbol: Sign,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference: Option<Sign>,
}

#[derive(Serialize)]
struct SymbolOutput {
    p: u64,
    n: u32,
    generator: UnitGenerator,
    f: u64,
    g: u64,
    ideals: Vec<IdealSymbol>,
    constant: bool,
    expected: Value,
    #[serde(rename = "match")]
    matches: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ratio_constant: Option<bool>,
}

fn subscript(k: u64) -> String {
    k.to_string()
        .chars()
        .map(|c| char::from_u32(0x2080 + c.to_digit(10).unwrap()).unwrap())
        .collect()
}

/// Index of the K_4 ideal below each ideal of `table`, following the tower down.
fn ideals_at_layer4(p: u64, table: &SymbolTable, cache: &SymbolCache) -> Result<Vec<usize>> {
    let mut indices: Vec<usize> = (0..table.ideals.len()).collect();
    let mut upper = cache.get(p, table.n)?;
    for m in (4..table.n).rev() {
        let lower = cache.get(p, m)?;
        for idx in indices.iter_mut() {
            *idx = ideal_below(&upper.ideals[*idx], &lower.ideals)
                .ok_or_else(|| anyhow!("no prime of K_{m} below ideal {idx} at p = {p}"))?;
        }
        upper = lower;
    }
    Ok(indices)
}

fn symbol(p: u64, n: u32, generator: UnitGenerator) -> Result<ExitCode> {
    checked_prime(p)?;
    if !(MIN_LAYER..=MAX_SYMBOL_LAYER).contains(&n) {
        return Err(anyhow!("layer n = {n} is outside the supported range 3..={MAX_SYMBOL_LAYER}"));
    }
    let generator = generator.validate(n)?;
    let pc = classify_prime(p)?;
    let split = num_primes_above(p, n)?;
    let cache = SymbolCache::new();
    let table = cache.get(p, n)?;
    let measured = table.column(generator).expect("validated generator");

    let mut references: Option<Vec<Sign>> = None;
    let mut ratio_constant = None;
    let (expected, matches) = if pc.in_main_classes() {
        match generator_symbol(generator, &pc)? {
            SymbolValue::Known(s) => (Value::from(s.as_i8()), Some(measured.iter().all(|&m| m == s))),
            SymbolValue::Undetermined => (Value::Null, None),
        }
    } else if pc.class16 == 7 && n >= 4 {
        let below = ideals_at_layer4(p, &table, &cache)?;
        let k4 = cache.get(p, 4)?;
        let at4 = |g: UnitGenerator| -> Vec<Sign> { below.iter().map(|&i| k4.get(i, g).unwrap()).collect() };
        match generator {
            UnitGenerator::Zeta => {
                let refs = at4(UnitGenerator::Zeta);
                let ok = refs == measured;
                references = Some(refs);
                (Value::from("ζ₁₆@K₄"), Some(ok))
            }
            UnitGenerator::Xi(k) => {
                let k16 = k % 16;
                let reference_k = match k16 {
                    3 | 5 | 7 => Some(k16),
                    11 | 13 | 15 => Some(k16 - 8),
                    _ => None,
                };
                let refs = reference_k.map(|r| at4(UnitGenerator::Xi(r)));
                let stated = |i: usize| {
                    let k4 = refs.as_ref().map_or([Sign::Plus; 3], |r| [r[i], r[i], r[i]]);
                    xi_symbol_mod16(k, &pc, k4)
                };
                let result = match (k16, &refs) {
                    (1 | 9, _) => {
                        let ok = (0..measured.len()).all(|i| stated(i) == Ok(SymbolValue::Known(measured[i])));
                        (Value::from(1), Some(ok))
                    }
                    (11 | 13 | 15, Some(r)) => {
                        let ratios: Vec<Sign> = measured.iter().zip(r).map(|(&a, &b)| a * b).collect();
                        ratio_constant = Some(ratios.windows(2).all(|w| w[0] == w[1]));
                        let eps = (k16 - 9) / 2;
                        (Value::from(format!("ε{}·ξ{}@K₄", subscript(eps), subscript(k16 - 8))), None)
                    }
                    (_, Some(_)) => {
                        let ok = (0..measured.len()).all(|i| stated(i) == Ok(SymbolValue::Known(measured[i])));
                        (Value::from(format!("ξ{}@K₄", subscript(k16))), Some(ok))
                    }
                    (_, None) => unreachable!("every odd k mod 16 is covered"),
                };
                references = refs;
                result
            }
        }
    } else {
        (Value::Null, None)
    };

    let ideals = table
        .ideals
        .iter()
        .enumerate()
        .map(|(i, ideal)| IdealSymbol {
            factor: ideal.h.to_string(),
            symbol: measured[i],
            reference: references.as_ref().map(|r| r[i]),
        })
        .collect();
    let out = SymbolOutput {
        p,
        n,
        generator,
        f: split.f,
        g: split.g,
        ideals,
        constant: measured.windows(2).all(|w| w[0] == w[1]),
        expected,
        matches,
        ratio_constant,
    };
    print_json(&out)?;
    Ok(if out.matches == Some(false) || out.ratio_constant == Some(false) {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn join(values: &[u64]) -> String {
    values.iter().map(u64::to_string).collect::<Vec<_>>().join(";")
}

fn write_rows(rows: &[SurveyRow], out: OutFormat, sink: Box<dyn Write>) -> Result<()> {
    match out {
        OutFormat::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(sink);
            w.write_record(["d", "divisors", "classes", "q", "r", "t", "case", "rank", "agree"])?;
            for row in rows {
                w.write_record([
                    row.d.to_string(),
                    join(&row.divisors),
                    join(&row.classes),
                    row.q.to_string(),
                    row.r.to_string(),
                    row.t.to_string(),
                    row.case.map_or(String::new(), |c| c.as_str().to_string()),
                    row.rank.to_string(),
                    row.agree.to_string(),
                ])?;
            }
            w.flush()?;
        }
        OutFormat::Json => {
            let mut w = sink;
            for row in rows {
                serde_json::to_writer(&mut w, row)?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn run_survey(max: u64, classes: &str, out: OutFormat, file: Option<&Path>) -> Result<ExitCode> {
    let filter: ClassFilter = classes.parse().map_err(|e: String| anyhow!(e))?;
    let cache = SymbolCache::new();
    let rows = survey(max, filter, &cache)?;
    let sink: Box<dyn Write> = match file {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    write_rows(&rows, out, sink)?;

    let disagreements: Vec<&SurveyRow> = rows.iter().filter(|r| !r.agree.all_agree()).collect();
    match disagreements.first() {
        None => {
            eprintln!("survey: {} values of d <= {max} ({classes}), all paths agree", rows.len());
            Ok(ExitCode::SUCCESS)
        }
        Some(first) => {
            eprintln!(
                "survey: {} values of d <= {max} ({classes}), {} disagreements; first: d = {} agree = {} rank = {}",
                rows.len(),
                disagreements.len(),
                first.d,
                first.agree,
                first.rank
            );
            Ok(ExitCode::from(1))
        }
    }
}

fn run_verify(lemma: &str, bound: u64, format: Format) -> Result<ExitCode> {
    let lemma: LemmaId = lemma.parse().map_err(|e: String| anyhow!(e))?;
    let cache = SymbolCache::new();
    let report = verify(lemma, bound, &cache)?;
    match format {
        Format::Json => print_json(&report)?,
        Format::Table => {
            let status = if report.passed() { "PASS" } else { "FAIL" };
            println!(
                "{lemma}: bound {bound}, {} primes, {} checks, {} counterexamples: {status}",
                report.primes,
                report.checks,
                report.counterexamples.len()
            );
            for c in report.counterexamples.iter().take(20) {
                println!("  counterexample: {c}");
            }
            if report.counterexamples.len() > 20 {
                println!("  ... {} more", report.counterexamples.len() - 20);
            }
            if !report.measured_signs.is_empty() {
                let count = |f: &dyn Fn(&zeta2rank::sweep::MeasuredSigns) -> Sign| {
                    report.measured_signs.iter().filter(|m| f(m) == Sign::Plus).count()
                };
                let total = report.measured_signs.len();
                for (name, plus) in [
                    ("ε₁", count(&|m| m.eps1)),
                    ("ε₂", count(&|m| m.eps2)),
                    ("ε₃", count(&|m| m.eps3)),
                ] {
                    println!("  {name}: +1 at {plus} primes, -1 at {}", total - plus);
                }
            }
        }
    }
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

#[derive(Serialize)]
struct TowerOutput<'a> {
    #[serde(flatten)]
    report: &'a zeta2rank::TowerReport,
    verdict: String,
}

fn tower(d: u64, format: Format) -> Result<ExitCode> {
    let sf = parse_d(d)?;
    let cache = SymbolCache::new();
    let report = tower_rank_cached(&sf, &cache)?;
    match format {
        Format::Json => print_json(&TowerOutput {
            report: &report,
            verdict: report.verdict(),
        })?,
        Format::Table => {
            for layer in &report.layers {
                println!("n = {}: t = {}, e = {}, rank = {}", layer.n.unwrap_or(0), layer.t, layer.e, layer.rank);
            }
            println!("{}", report.verdict());
        }
    }
    Ok(ExitCode::SUCCESS)
}
