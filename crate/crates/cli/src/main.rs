//! `troprank`: certify tropical independence of distinguished function
//! families on chains of loops.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | every case was decided as expected |
//! | 1 | input error (bad file, bad parameters, inapplicable operation) |
//! | 2 | at least one case ended Unknown, or a structural check failed |
//! | 3 | a case expected to be independent came out Dependent |

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use troprank_core::report::RunOptions;
use troprank_core::RuleSet;

mod commands;
mod input;

use input::{CaseArgs, ParamArgs};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] troprank_core::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

/// Outcome of a command, ordered by severity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Ok = 0,
    Unknown = 2,
    UnexpectedDependent = 3,
}

#[derive(Debug, Parser)]
#[command(name = "troprank", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Seed for every randomized genericity choice.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Keep only the concluding step of each certificate trace.
    #[arg(long)]
    pub terse: bool,
    /// Allow cases marked as long-running.
    #[arg(long)]
    pub allow_long: bool,
    /// Comma-separated rule subset, e.g. `C1,C4,C5`.
    #[arg(long, value_parser = parse_rules)]
    pub rules: Option<RuleSet>,
    /// Rounds of dependence search after an inconclusive certificate.
    #[arg(long, default_value_t = 64)]
    pub budget: usize,
    /// Verdict that counts as success.
    #[arg(long, value_enum, default_value_t = Expect::Independent)]
    pub expect: Expect,
}

impl RunArgs {
    pub fn options(&self) -> RunOptions {
        RunOptions {
            seed: self.seed,
            rules: self.rules.clone().unwrap_or_else(RuleSet::all),
            budget: self.budget,
            terse: self.terse,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Expect {
    Independent,
    Any,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

fn parse_rules(s: &str) -> Result<RuleSet, String> {
    RuleSet::parse(s).map_err(|e| e.to_string())
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the full pipeline on one case or a library family and print JSON reports.
    Verify {
        #[command(flatten)]
        case: CaseArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Write the JSON here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply an inductive step repeatedly, or look for a case it could come from.
    Induct {
        #[command(flatten)]
        case: CaseArgs,
        /// One of `rho+`, `s+`, `r+`.
        #[arg(long)]
        op: Option<troprank_core::constructions::Induction>,
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Run the certifier on every image case.
        #[arg(long)]
        recheck: bool,
        /// List the smaller-genus cases the given parameters could be deduced from.
        #[arg(long)]
        derive: bool,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run a batch and print one row per case.
    Report {
        /// Library names or prefixes; repeatable.
        #[arg(long)]
        library: Vec<String>,
        /// JSON array of library names and `{"tableau": .., "sidecar": ..}` objects.
        #[arg(long)]
        batch: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        /// Also write the aggregate JSON here.
        #[arg(long)]
        json: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// List tableaux (lingering lattice paths) for the given parameters.
    Enumerate {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 100)]
        limit: usize,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Emit or validate edge-length files.
    Lengths {
        #[command(subcommand)]
        action: LengthsAction,
    },
}

#[derive(Debug, Subcommand)]
enum LengthsAction {
    /// Print admissible lengths for the given parameters.
    Emit {
        #[command(flatten)]
        params: ParamArgs,
        /// Comma-separated extra-long bridge indices.
        #[arg(long, value_delimiter = ',')]
        long: Option<Vec<usize>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a lengths file against the admissibility conditions.
    Validate {
        file: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
    },
}

fn threads() -> Option<usize> {
    std::env::var("TROPRANK_THREADS")
        .ok()?
        .parse()
        .ok()
        .filter(|&n| n > 0)
}

fn dispatch(cli: Cli) -> Result<Status, CliError> {
    if let Some(n) = threads() {
        // a pool that already exists keeps its size
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match cli.command {
        Command::Verify { case, run, out } => commands::verify(&case, &run, out.as_deref()),
        Command::Induct {
            case,
            op,
            count,
            recheck,
            derive,
            run,
        } => {
            if derive {
                commands::derive(&case)
            } else {
                let op = op.ok_or_else(|| {
                    CliError::Input("--op is required unless --derive is given".into())
                })?;
                commands::induct(&case, op, count, recheck.then_some(&run))
            }
        }
        Command::Report {
            library,
            batch,
            format,
            json,
            run,
        } => commands::report(&library, batch.as_deref(), format, json.as_deref(), &run),
        Command::Enumerate {
            params,
            limit,
            format,
        } => commands::enumerate(&params, limit, format),
        Command::Lengths { action } => match action {
            LengthsAction::Emit { params, long, out } => {
                commands::lengths_emit(&params, long, out.as_deref())
            }
            LengthsAction::Validate { file, params } => commands::lengths_validate(&file, &params),
        },
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
