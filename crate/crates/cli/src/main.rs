//! Batch front door for the pulse-shaping library.
//!
//! Five workflows, each writing deterministic artifacts into an output
//! directory: gate optimization for a drift estimate, decoupling-pulse
//! synthesis, the hybrid projected-gradient flow, drift sweeps of the gate
//! distance, and drift-ensemble state-fidelity statistics.

mod artifacts;
mod config;
mod error;
mod workflows;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Mode, RunArgs, RunConfig};

#[derive(Parser)]
#[command(
    name = "pulseopt",
    about = "Pulse shaping for a driven two-level system with an uncertain drift",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Steepest-descent gate optimization at a drift estimate.
    OptimizeOct(RunArgs),
    /// Synthesize a decoupling pulse for a target rotation angle.
    SynthDp(RunArgs),
    /// Projected-gradient flow from a decoupling pulse.
    OptimizeHybrid(RunArgs),
    /// Tabulate gate distance over a drift interval.
    Sweep(RunArgs),
    /// State-fidelity statistics over a drift ensemble.
    Ensemble(RunArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, args) = match &cli.command {
        Command::OptimizeOct(a) => (Mode::OptimizeOct, a),
        Command::SynthDp(a) => (Mode::SynthDp, a),
        Command::OptimizeHybrid(a) => (Mode::OptimizeHybrid, a),
        Command::Sweep(a) => (Mode::Sweep, a),
        Command::Ensemble(a) => (Mode::Ensemble, a),
    };
    let outcome = RunConfig::resolve(mode, args).and_then(|cfg| workflows::run(&cfg));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
