//! `schromag` command-line front end. Exit status: 0 on success, 1 when a
//! numerical check fails, 2 on bad input.

mod commands;
mod config;
mod problem;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{merge, CommonArgs};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("bad input: {0}")]
    Input(String),
    #[error("numerical check failed: {0}")]
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "schromag", version, about = "MAG linear solver and its Schrodingerization, classically emulated")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one system with one method; writes solution and trace.
    Solve(CommonArgs),
    /// Run every method on one system; writes trajectories and the auxiliary/solved ratio.
    Compare(CommonArgs),
    /// Build a PDE preset, solve it and check against the direct solve.
    Pde(CommonArgs),
    /// Full Schrodingerization pipeline with its report.
    Schro(CommonArgs),
    /// Verify block encodings and their compositions.
    #[command(name = "blockenc-verify")]
    BlockencVerify(CommonArgs),
    /// Cost estimates for every method.
    Complexity {
        #[command(flatten)]
        common: CommonArgs,
        /// Read the derivative norm as N_p instead of log2 N_p.
        #[arg(long)]
        linear_np: bool,
    },
}

fn init_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("SCHROMAG_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Input(format!("SCHROMAG_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Input(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    match cli.command {
        Command::Solve(a) => commands::solve(&merge(&a)?),
        Command::Compare(a) => commands::compare(&merge(&a)?),
        Command::Pde(a) => commands::pde(&merge(&a)?),
        Command::Schro(a) => commands::schro(&merge(&a)?),
        Command::BlockencVerify(a) => commands::blockenc_verify(&merge(&a)?),
        Command::Complexity { common, linear_np } => commands::complexity(&merge(&common)?, linear_np),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("schromag: {e}");
            ExitCode::from(e.code())
        }
    }
}
