//! `ideal-clock`: run the rotator simulations, phase exports, invariant
//! checks and Legendre rank maps from the command line.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::RankArgs;
use config::{RunArgs, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "ideal-clock", version, about = "Relativistic ideal-clock simulator and verifier")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate a clock and write its trajectory (the default)
    Simulate,
    /// Write the invariant phase series and report phi per cycle
    Phase,
    /// Run the invariant suite and print a pass/fail table
    Verify,
    /// Classify the Legendre map over a (u1, u2) grid
    Rankmap(RankArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = RunConfig::resolve(&cli.run).and_then(|cfg| match &cli.command {
        None | Some(Command::Simulate) => commands::cmd_simulate(&cfg),
        Some(Command::Phase) => commands::cmd_phase(&cfg),
        Some(Command::Verify) => commands::cmd_verify(&cfg),
        Some(Command::Rankmap(args)) => commands::cmd_rankmap(&cfg, args),
    });
    match result {
        Ok(0) => ExitCode::SUCCESS,
        Ok(code) => ExitCode::from(code as u8),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
