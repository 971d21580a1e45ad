//! `swstab`: exact stabilizability analysis for discrete-time switched
//! linear systems under arbitrary switching.
//!
//! Every subcommand prints a JSON report to stdout. Exit codes are stable:
//! 0 for success / affirmative verdicts, 2 for negative verdicts (not
//! stabilizable, counterexample found), 1 for errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod format;
mod plot;
mod report;

use commands::{LoadedSystem, ModeArg, RateFlags};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeFlag {
    Md,
    Mi,
    Both,
}

impl From<ModeFlag> for ModeArg {
    fn from(flag: ModeFlag) -> Self {
        match flag {
            ModeFlag::Md => ModeArg::Md,
            ModeFlag::Mi => ModeArg::Mi,
            ModeFlag::Both => ModeArg::Both,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "swstab",
    version,
    about = "Exact fixed-time stabilizability analysis of switched linear systems",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Feedback kind: per-mode gains (md), one shared gain (mi), or both
    #[arg(long, global = true, value_enum, default_value_t = ModeFlag::Both)]
    mode: ModeFlag,

    /// Drop linearly dependent input directions before analysis
    #[arg(long, global = true)]
    reduce_inputs: bool,

    /// Worker threads for exhaustive verification
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    /// Cap on sequence-state pairs visited by exhaustive checks
    #[arg(long, global = true, default_value_t = swstab_core::simulate::DEFAULT_BUDGET as u64)]
    budget: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Subspace ladder, stabilizability verdicts, and synthesized gains
    Analyze {
        /// System file (JSON with "A" and "B" matrix lists)
        system: PathBuf,
    },
    /// Block-triangular normal form with a dead-beat part and a residual part
    Decompose {
        system: PathBuf,
        /// Also write the transforms and blocks to this file
        #[arg(long, value_name = "FILE")]
        matrices: Option<PathBuf>,
    },
    /// Exact closed-loop trajectory under a chosen switching sequence
    Simulate {
        system: PathBuf,
        /// "from-analysis" (synthesize for --mode) or a gains file
        #[arg(long, default_value = "from-analysis", value_name = "SOURCE")]
        gains: String,
        /// Comma-separated 1-based modes, "adversarial", or "random:SEED"
        #[arg(long, value_name = "SPEC")]
        sigma: String,
        /// Initial state, comma-separated entries (integers, decimals, or p/q)
        #[arg(long, value_name = "VECTOR")]
        x0: String,
        /// Number of steps (defaults: sequence length, or 10)
        #[arg(long)]
        steps: Option<usize>,
        /// Write the trajectory as CSV (exact and decimal columns)
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
        /// Write a log-scale norm plot as SVG
        #[arg(long, value_name = "FILE")]
        plot: Option<PathBuf>,
    },
    /// Exhaustively check supplied gains over all switching sequences
    Verify {
        system: PathBuf,
        /// Gains file with a "mode_kind" field and "K"
        #[arg(long, value_name = "FILE")]
        gains: PathBuf,
        /// Sequence length to check
        #[arg(long, value_name = "T")]
        horizon: usize,
        /// File with explicit initial states (default: standard basis)
        #[arg(long, value_name = "FILE")]
        initial: Option<PathBuf>,
    },
    /// Decay-rate questions: verdict, exact scalar rate, bound, certificate
    Rate {
        system: PathBuf,
        /// Exact minimax rate for one-dimensional systems
        #[arg(long, group = "op")]
        scalar: bool,
        /// Sampled lower bound on the shared-feedback rate
        #[arg(long, group = "op", num_args = 2, value_names = ["SAMPLES", "SEED"])]
        lower_bound: Option<Vec<u64>>,
        /// Build and check a decay certificate for rate RHO
        #[arg(long, group = "op", value_name = "RHO")]
        certificate: Option<String>,
    },
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    let mode = ModeArg::from(cli.mode);
    let budget = cli.budget as u128;
    match &cli.command {
        Command::Analyze { system } => {
            let loaded = LoadedSystem::load(system, cli.reduce_inputs)?;
            commands::cmd_analyze(&loaded, mode)
        }
        Command::Decompose { system, matrices } => {
            let loaded = LoadedSystem::load(system, cli.reduce_inputs)?;
            commands::cmd_decompose(&loaded, mode, matrices.as_deref())
        }
        Command::Simulate { system, gains, sigma, x0, steps, csv, plot } => {
            let loaded = LoadedSystem::load(system, cli.reduce_inputs)?;
            commands::cmd_simulate(
                &loaded,
                mode,
                gains,
                sigma,
                x0,
                *steps,
                csv.as_deref(),
                plot.as_deref(),
            )
        }
        Command::Verify { system, gains, horizon, initial } => {
            let loaded = LoadedSystem::load(system, cli.reduce_inputs)?;
            commands::cmd_verify(&loaded, gains, *horizon, initial.as_deref(), cli.threads, budget)
        }
        Command::Rate { system, scalar, lower_bound, certificate } => {
            let loaded = LoadedSystem::load(system, cli.reduce_inputs)?;
            let lower_bound = match lower_bound {
                Some(pair) => {
                    let samples = usize::try_from(pair[0])
                        .map_err(|_| anyhow::anyhow!("sample count too large"))?;
                    Some((samples, pair[1]))
                }
                None => None,
            };
            let flags = RateFlags {
                scalar: *scalar,
                lower_bound,
                certificate: certificate.as_deref(),
            };
            commands::cmd_rate(&loaded, mode, flags, budget)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(u8::try_from(code).unwrap_or(1)),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
