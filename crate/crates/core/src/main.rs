use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use knightian::cli::{self, Command, Overrides, EXIT_FAILURE, EXIT_VALIDATION};

#[derive(Parser)]
#[command(name = "knightian", version, about = "Robust sup-inf solver on finite scenario lattices")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Backward induction, policy extraction and policy evaluation.
    Solve(Flags),
    /// Compare the solver with exhaustive enumeration.
    Oracle(Flags),
    /// No-arbitrage diagnostics.
    NaCheck(Flags),
    /// Solve and dump the whole value field.
    DumpValues(Flags),
}

#[derive(Args)]
struct Flags {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Write the report here instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
    #[arg(long, value_name = "N")]
    budget_strategies: Option<u64>,
    #[arg(long, value_name = "N")]
    budget_selections: Option<u64>,
    #[arg(long)]
    no_doubling_check: bool,
}

fn main() -> ExitCode {
    let args = Cli::parse();
    let (command, flags) = match args.command {
        Cmd::Solve(f) => (Command::Solve, f),
        Cmd::Oracle(f) => (Command::Oracle, f),
        Cmd::NaCheck(f) => (Command::NaCheck, f),
        Cmd::DumpValues(f) => (Command::DumpValues, f),
    };
    let text = match std::fs::read_to_string(&flags.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", flags.config.display());
            return ExitCode::from(EXIT_VALIDATION as u8);
        }
    };
    let overrides = Overrides {
        workers: flags.workers,
        budget_strategies: flags.budget_strategies,
        budget_selections: flags.budget_selections,
        no_doubling_check: flags.no_doubling_check,
    };
    let outcome = cli::run(command, &text, &overrides);
    for m in &outcome.messages {
        eprintln!("{m}");
    }
    let mut code = outcome.exit_code;
    if let Some(report) = &outcome.report {
        let json = report.to_json();
        match &flags.out {
            Some(path) => {
                if let Err(e) = std::fs::write(path, json) {
                    eprintln!("cannot write {}: {e}", path.display());
                    code = code.max(EXIT_FAILURE);
                }
            }
            None => print!("{json}"),
        }
    }
    ExitCode::from(code as u8)
}
