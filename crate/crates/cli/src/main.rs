//! `wce`: batch front end for the W-constraint solver.
//!
//! Exit status: 0 when every requested check passed, 1 when a check or a
//! comparison failed, 2 for invalid invocations, 3 for runtime errors.

mod cache;
mod commands;
mod render;
mod selfcheck;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wce_core::fock::Strategy;
use wce_core::rootdata::DynkinType;
use wce_core::tausolver::{PotentialForm, SolveMode};

#[derive(Parser)]
#[command(name = "wce", version, about = "Exact W-constraint tau functions of ADE singularities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

fn parse_type(s: &str) -> Result<DynkinType, String> {
    s.parse().map_err(|e: wce_core::Error| e.to_string())
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse().map_err(|e: wce_core::Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<SolveMode, String> {
    s.parse().map_err(|e: wce_core::Error| e.to_string())
}

fn parse_form(s: &str) -> Result<PotentialForm, String> {
    s.parse().map_err(|e: wce_core::Error| e.to_string())
}

/// Flags shared by every subcommand.
#[derive(Args, Clone, Debug)]
pub struct Common {
    /// Dynkin type, e.g. A1, D4, E6.
    #[arg(long = "type", value_name = "TYPE", value_parser = parse_type)]
    pub kind: DynkinType,
    /// Generator construction: builtin, kernel_solve or mode_construction.
    /// Defaults to builtin where it exists and kernel_solve otherwise.
    #[arg(long, value_parser = parse_strategy)]
    pub strategy: Option<Strategy>,
    /// Order N of the cyclotomic field ℚ(ζ_N); must be a multiple of the Coxeter number.
    #[arg(long)]
    pub conductor: Option<u32>,
    /// Directory for cached generators, operators and τ series.
    #[arg(long, env = "WCE_CACHE_DIR", value_name = "DIR")]
    pub cache_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Build or load the generators of W and check them against the screenings.
    Generators {
        #[command(flatten)]
        common: Common,
        /// Also check the requested construction before any substitution, dumping residuals of failures.
        #[arg(long)]
        verify: bool,
    },
    /// Solve the W-constraints for the coefficients of τ.
    Tau {
        #[command(flatten)]
        common: Common,
        /// Truncation degree as a numerator over the Coxeter number.
        #[arg(long, value_name = "N")]
        max_degree_num: Option<i64>,
        /// A monomial such as "(1,0)^2 (4,0)"; may be repeated.
        #[arg(long = "goal", value_name = "MONOMIAL")]
        goals: Vec<String>,
        /// frontier or goal_directed (the default when goals are given).
        #[arg(long, value_parser = parse_mode)]
        mode: Option<SolveMode>,
        /// Also print log τ with genus tags.
        #[arg(long)]
        log: bool,
    },
    /// Genus-0 small-phase-space potential, with WDVV and reference checks.
    Potential {
        #[command(flatten)]
        common: Common,
        /// Coordinate form: paper (the solver variables v^i = t^{i,0}), dubrovin or fjrw.
        #[arg(long, default_value = "paper", value_parser = parse_form)]
        form: PotentialForm,
        /// Skip the comparison with a stored reference potential.
        #[arg(long)]
        no_reference: bool,
        /// Degree bound as a numerator over h; defaults to h² − 1.
        #[arg(long, value_name = "N")]
        max_degree_num: Option<i64>,
    },
    /// Dump the terms of W_{i,m} up to a creation degree.
    Operators {
        #[command(flatten)]
        common: Common,
        /// Generator index, 1-based.
        #[arg(long)]
        i: usize,
        #[arg(long, default_value_t = 0)]
        m: u32,
        /// Largest creation degree as a numerator over h; defaults to h·(m_i + 1).
        #[arg(long, value_name = "N")]
        window: Option<i64>,
    },
    /// Run the invariant suites for one type.
    Selfcheck {
        #[command(flatten)]
        common: Common,
        /// Smaller truncations and fewer operators.
        #[arg(long)]
        quick: bool,
    },
}

/// Why a run did not succeed.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<wce_core::Error> for Failure {
    fn from(e: wce_core::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    match cli.command {
        Command::Generators { common, verify } => commands::generators(&commands::Ctx::new(&common)?, verify),
        Command::Tau { common, max_degree_num, goals, mode, log } => {
            commands::tau(&commands::Ctx::new(&common)?, max_degree_num, &goals, mode, log)
        }
        Command::Potential { common, form, no_reference, max_degree_num } => {
            commands::potential(&commands::Ctx::new(&common)?, form, no_reference, max_degree_num)
        }
        Command::Operators { common, i, m, window } => commands::operators(&commands::Ctx::new(&common)?, i, m, window),
        Command::Selfcheck { common, quick } => selfcheck::run(&commands::Ctx::new(&common)?, quick),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
