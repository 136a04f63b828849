//! `slocc`: bounds, protocols and simulation for conversions between
//! GHZ-class states.

mod commands;
mod inputs;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use inputs::{InitialArgs, TargetArgs};

/// Seed used when neither `--seed` nor `SLOCC_SEED` is given.
pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Parser)]
#[command(
    name = "slocc",
    version,
    about = "Success-probability bounds and exact protocol simulation for GHZ-class conversions"
)]
struct Cli {
    /// Random seed; the SLOCC_SEED environment variable takes precedence.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the result here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Upper bounds on the conversion probability.
    Bound(BoundArgs),
    /// Constructive lower bounds, checked by simulation.
    Lower(LowerArgs),
    /// Run a protocol file and print the labelled trace.
    Simulate(SimulateArgs),
    /// Check conservation laws on a trace file.
    Verify(VerifyArgs),
    /// Write the combined bound curve as CSV.
    Curve(CurveArgs),
    /// Compare the sampled maximum 3-tangle with its closed form.
    Oracle(OracleArgs),
    /// Generalized Schmidt form of a three-qubit state.
    Decompose(DecomposeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum MethodChoice {
    Best,
    Theorem1,
    InterferenceTangle,
    TangleRatio,
}

#[derive(Args)]
pub struct BoundArgs {
    #[command(flatten)]
    target: TargetArgs,
    #[command(flatten)]
    initial: InitialArgs,
    /// Which bound to report as `value`; all applicable bounds are listed regardless.
    #[arg(long, value_enum, default_value = "best")]
    method: MethodChoice,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum LowerMethod {
    FourStep,
    Orthogonal,
    General,
    Ghz3,
}

#[derive(Args)]
pub struct LowerArgs {
    #[command(flatten)]
    target: TargetArgs,
    #[arg(long, conflicts_with_all = ["orthogonal", "general", "ghz3"])]
    four_step: bool,
    /// Deterministic protocol for a two-term target with an orthogonal party.
    #[arg(long, conflicts_with_all = ["general", "ghz3"])]
    orthogonal: bool,
    /// Lower bound for a multi-term target given as a `terms` file.
    #[arg(long, conflicts_with = "ghz3")]
    general: bool,
    /// Deterministic conversion from the three-level GHZ state.
    #[arg(long)]
    ghz3: bool,
    /// Party that performs the final filtering (four-step only).
    #[arg(long)]
    party: Option<usize>,
    /// Also write the protocol tree as JSON.
    #[arg(long)]
    protocol_out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Protocol tree JSON.
    #[arg(long)]
    protocol: PathBuf,
    #[command(flatten)]
    start: StartArgs,
    /// State JSON used to label leaves.
    #[arg(long)]
    target: Option<PathBuf>,
    /// Overlap tolerance for success labels.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Args)]
pub struct StartArgs {
    /// Initial state JSON; defaults to the GHZ state given by `--ghz`.
    #[arg(long)]
    initial: Option<PathBuf>,
    /// Parties and levels of the initial GHZ state.
    #[arg(long, default_value = "3,2")]
    ghz: String,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Trace JSON written by `simulate`.
    #[arg(long)]
    trace: PathBuf,
    #[command(flatten)]
    start: StartArgs,
    /// State JSON; when given, leaves are relabelled against it.
    #[arg(long)]
    target: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Args)]
pub struct CurveArgs {
    #[command(flatten)]
    target: TargetArgs,
    #[command(flatten)]
    initial: InitialArgs,
    /// Largest distance of the stopping interference from the initial value.
    #[arg(long, default_value_t = 4.0)]
    z_max: f64,
    #[arg(long, default_value_t = 4001)]
    points: usize,
}

#[derive(Args)]
pub struct OracleArgs {
    #[arg(long, allow_hyphen_values = true)]
    interference: f64,
    /// Sample budget; accepts forms like `1e6`.
    #[arg(long, default_value = "1e6")]
    samples: String,
    #[arg(long, default_value_t = 64)]
    chunks: usize,
    /// Allowed gap between the sampled maximum and the closed form.
    #[arg(long, default_value_t = 1e-2)]
    tol: f64,
}

#[derive(Args)]
pub struct DecomposeArgs {
    /// State JSON; `random` draws a Haar-random three-qubit state.
    #[arg(long)]
    state: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let seed = match inputs::resolve_seed(cli.seed) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let result = match &cli.command {
        Command::Bound(a) => commands::bound(a, seed),
        Command::Lower(a) => commands::lower(a, seed),
        Command::Simulate(a) => commands::simulate(a),
        Command::Verify(a) => commands::verify(a),
        Command::Curve(a) => commands::curve(a, seed),
        Command::Oracle(a) => commands::oracle(a, seed),
        Command::Decompose(a) => commands::decompose(a, seed),
    };
    match result {
        Ok(out) => {
            if let Err(e) = output::emit(&out.text, cli.output.as_deref()) {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
            if out.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("check failed");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
