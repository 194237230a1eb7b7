use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spdred::commands::{
    run_compare, run_gen, run_reduce, run_validate, CompareArgs, GenArgs, ReduceArgs, ValidateArgs,
};

/// Symmetry- and stability-preserving H2 model reduction for systems
/// `x' = -Ax + Bu, y = Cx` with symmetric positive definite `A`.
#[derive(Debug, Parser)]
#[command(name = "spdred", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reduce one system to order r.
    Reduce(ReduceArgs),
    /// Tabulate relative H2 errors of every method over several orders.
    Compare(CompareArgs),
    /// Check a system file and print its properties.
    Validate(ValidateArgs),
    /// Write a seeded random system.
    Gen(GenArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Reduce(args) => run_reduce(args),
        Command::Compare(args) => run_compare(args),
        Command::Validate(args) => run_validate(args),
        Command::Gen(args) => run_gen(args),
    };
    match result {
        Ok(outcome) => ExitCode::from(outcome.exit_code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
