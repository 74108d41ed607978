//! `protori` command-line front end.
//!
//! Exit codes: 0 success, 1 a check failed, 2 input error, 3 resource ceiling.

mod commands;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use protori::arith::{parse_matrix, DEFAULT_PRIME_BOUND};
use protori::protorus::{HullMode, LineScope};
use protori::{Error, GroupDescription};

use commands::Outcome;
use report::Format;

#[derive(Parser)]
#[command(name = "protori", version, about = "Protori and their torsion-free duals")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Trial-division bound used when factoring denominators.
    #[arg(long, default_value_t = DEFAULT_PRIME_BOUND, global = true)]
    prime_bound: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Inf,
    Fininf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeArg {
    Directives,
    Saturated,
}

#[derive(Subcommand)]
enum Command {
    /// Structure report for the protorus dual to a group file.
    Analyze { file: PathBuf },
    /// Isogeny verdict for two group files of equal rank.
    Isogeny { a: PathBuf, b: PathBuf },
    /// Quotient-divisible hull of a group.
    Hull {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Inf)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value_t = ScopeArg::Saturated)]
        scope: ScopeArg,
    },
    /// Lifting report for a matrix A mapping the first group into the second.
    Lift {
        a: PathBuf,
        b: PathBuf,
        /// Rows separated by `;`, entries by `,`, e.g. "1,0;0,2".
        #[arg(long)]
        matrix: String,
        #[arg(long, default_value_t = 2)]
        prime: u64,
        #[arg(long, default_value_t = 4)]
        depth: u32,
    },
    /// Oracle battery against the symbolic results.
    Verify {
        file: PathBuf,
        #[arg(long, default_value_t = 4)]
        depth: u32,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn load(path: &Path, bound: u64) -> Result<GroupDescription, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
    GroupDescription::parse(&text)?.with_prime_bound(bound)
}

fn run(cli: &Cli) -> Result<Outcome, Error> {
    let pb = cli.prime_bound;
    match &cli.command {
        Command::Analyze { file } => commands::analyze(&load(file, pb)?),
        Command::Isogeny { a, b } => commands::isogeny(&load(a, pb)?, &load(b, pb)?),
        Command::Hull { file, mode, scope } => {
            let mode = match mode {
                ModeArg::Inf => HullMode::Inf,
                ModeArg::Fininf => HullMode::FinInf,
            };
            let scope = match scope {
                ScopeArg::Directives => LineScope::Directives,
                ScopeArg::Saturated => LineScope::Saturated,
            };
            commands::hull(&load(file, pb)?, mode, scope)
        }
        Command::Lift {
            a,
            b,
            matrix,
            prime,
            depth,
        } => {
            let m = parse_matrix(matrix).ok_or_else(|| Error::Invalid(format!("cannot parse matrix {matrix:?}")))?;
            commands::lift(&m, &load(a, pb)?, &load(b, pb)?, *prime, *depth)
        }
        Command::Verify { file, depth, trials, seed } => commands::verify(&load(file, pb)?, *depth, *trials, *seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Ok(r)) => {
            print!("{}", r.render(cli.format));
            ExitCode::SUCCESS
        }
        Ok(Outcome::Failed(r)) => {
            print!("{}", r.render(cli.format));
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 3 })
        }
    }
}
