use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;

/// 2-rank of the class group of Q(ζ_{2^n}, √d) by closed forms, GF(2)
/// symbol matrices and finite-field residue symbols.
#[derive(Parser, Debug)]
#[command(name = "zeta2rank", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rank for a single d by one or all methods.
    Rank {
        d: u64,
        /// Layer n (default: every certified layer 3, 4, 5).
        #[arg(long)]
        n: Option<u32>,
        #[arg(long, value_enum, default_value_t = MethodArg::All)]
        method: MethodArg,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Residue degree and number of primes of K_n above p.
    Split {
        p: u64,
        #[arg(long)]
        n: u32,
    },
    /// Residue symbols of one unit generator at every prime above p.
    Symbol {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: u32,
        /// Odd k with 1 < k < 2^(n-1), for the cyclotomic unit ξ_k.
        #[arg(long, conflicts_with = "zeta", required_unless_present = "zeta")]
        k: Option<u64>,
        /// Use the root of unity ζ_{2^n}.
        #[arg(long)]
        zeta: bool,
    },
    /// Survey all d up to a bound, comparing the three methods.
    Survey {
        #[arg(long)]
        max: u64,
        #[arg(long, default_value = "thm1")]
        classes: String,
        #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
        out: OutFormat,
        /// Write rows here instead of standard output.
        #[arg(long)]
        file: Option<std::path::PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Sweep primes below a bound and check one symbol table or splitting law.
    Verify {
        #[arg(long)]
        lemma: String,
        #[arg(long)]
        bound: u64,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Ranks at n = 3, 4, 5 and the stabilization verdict.
    Tower {
        d: u64,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum MethodArg {
    Closed,
    Symbolic,
    Numeric,
    All,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Table,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum OutFormat {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
