//! `dfb`: command-line front end for the type, poset and real-line engines.
//!
//! Exit codes: 0 success, 1 semantic failure, 2 input error, 3 internal error.

mod commands;

use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use commands::{CliError, Report};

#[derive(Debug, Parser)]
#[command(name = "dfb", version, about = "Doubly f-bounded generics toolkit")]
struct Cli {
    /// Print one JSON object instead of the text report.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a class table and optionally validate a ground type against it.
    Check {
        file: PathBuf,
        /// Ground type to validate, e.g. `Enum<Color>`.
        query: Option<String>,
    },
    /// Export the ground subtyping graph up to a nesting depth as DOT.
    Graph {
        file: PathBuf,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Domains and the recursive-bound theorem over finite posets.
    Poset {
        #[command(subcommand)]
        command: PosetCommand,
    },
    /// Domain of `l(x) <= x <= u(x)` over the reals.
    Real(RealArgs),
}

#[derive(Debug, Subcommand)]
pub enum PosetCommand {
    /// Print the one-shot domain for the named bound maps.
    Domain {
        file: PathBuf,
        #[arg(long)]
        lower: Option<String>,
        #[arg(long)]
        upper: Option<String>,
        /// Use strict comparisons on both sides.
        #[arg(long)]
        strict: bool,
    },
    /// Compare the one-shot domain against the greatest fixed point.
    Theorem {
        #[arg(
            required_unless_present = "random",
            conflicts_with = "random",
            requires = "map"
        )]
        file: Option<PathBuf>,
        #[arg(long)]
        map: Option<String>,
        /// Number of seeded random instances.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..=64))]
        max_size: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Strict comparisons (the default).
        #[arg(long, overrides_with = "non_strict")]
        strict: bool,
        #[arg(long)]
        non_strict: bool,
    },
}

#[derive(Debug, Args)]
pub struct RealArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub lower: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub upper: Option<String>,
    /// Function body substituted for `f(x)` in the bounds.
    #[arg(long, allow_hyphen_values = true)]
    pub body: Option<String>,
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
    pub window: Option<Vec<f64>>,
    #[arg(long, default_value_t = dfb_core::realline::DEFAULT_GRID)]
    pub grid: usize,
    #[arg(long, default_value_t = dfb_core::realline::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

fn dispatch(command: Command) -> Result<Report, CliError> {
    match command {
        Command::Check { file, query } => commands::check(&file, query.as_deref()),
        Command::Graph { file, depth, out } => commands::graph(&file, depth, out.as_deref()),
        Command::Poset { command } => commands::poset(command),
        Command::Real(args) => commands::real(&args),
    }
}

fn name(command: &Command) -> &'static str {
    match command {
        Command::Check { .. } => "check",
        Command::Graph { .. } => "graph",
        Command::Poset {
            command: PosetCommand::Domain { .. },
        } => "poset domain",
        Command::Poset {
            command: PosetCommand::Theorem { .. },
        } => "poset theorem",
        Command::Real(_) => "real",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.json;
    let command = name(&cli.command);

    let result = panic::catch_unwind(AssertUnwindSafe(|| dispatch(cli.command)))
        .unwrap_or_else(|_| Err(CliError::Internal("command panicked".into())));

    let (code, body) = match result {
        Ok(report) => {
            if !json {
                print!("{}", report.text);
            }
            (report.code, report.json)
        }
        Err(e) => {
            eprintln!("dfb {command}: {e}");
            (
                e.code(),
                json!({ "error": { "kind": e.kind(), "message": e.to_string() } }),
            )
        }
    };
    if json {
        let mut object = body;
        object["command"] = json!(command);
        object["exit_code"] = json!(code);
        println!(
            "{}",
            serde_json::to_string_pretty(&object).expect("JSON values always serialize")
        );
    }
    ExitCode::from(code)
}
