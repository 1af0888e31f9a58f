//! `lio`: evaluate, optimize and characterize input states of a lossy
//! two-mode interferometer.

mod classical;
mod evaluate;
mod failure;
mod grid;
mod manifest;
mod optimize;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use failure::{Failure, Outcome};
use grid::{ControlLoss, PhaseChoice, Range};

#[derive(Parser, Debug)]
#[command(name = "lio", version, about = "Optimal entangled inputs for a lossy two-mode interferometer")]
struct Cli {
    /// Worker threads for objective evaluation (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Detection statistics and Fisher information of a given input state.
    Evaluate(EvaluateArgs),
    /// Search for the input state with the largest Fisher information.
    Optimize(OptimizeArgs),
    /// Optimize along a grid of detection-arm losses and write a CSV curve.
    Sweep(SweepArgs),
    /// Optimize at several photon numbers and fit δφ ∝ N^(-x).
    Scaling(ScalingArgs),
    /// Coherent-light baselines with a 50-50 or tuned first splitter.
    Classical(ClassicalArgs),
    /// Composition and benchmark overlaps of optimal states.
    Characterize(CharacterizeArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum MethodArg {
    Ga,
    Sa,
    MultiStartLocal,
    Consensus,
}

impl From<MethodArg> for lio::optimize::Method {
    fn from(m: MethodArg) -> Self {
        use lio::optimize::Method;
        match m {
            MethodArg::Ga => Method::Ga,
            MethodArg::Sa => Method::Sa,
            MethodArg::MultiStartLocal => Method::MultiStartLocal,
            MethodArg::Consensus => Method::Consensus,
        }
    }
}

/// Options shared by every command that runs the optimizer.
#[derive(Args, Debug, Clone, Serialize)]
struct SearchArgs {
    #[arg(long, value_enum, default_value = "consensus")]
    method: MethodArg,
    /// RNG seed; falls back to LIO_SEED, then to a random seed that is recorded.
    #[arg(long, env = "LIO_SEED")]
    seed: Option<u64>,
    /// Phase at which F is maximized.
    #[arg(long = "phi", default_value_t = 0.0, allow_negative_numbers = true)]
    phi0: f64,
    /// Objective evaluations per method (default scales with N).
    #[arg(long)]
    max_evals: Option<usize>,
    /// Exit with code 4 when the consensus spread is flagged.
    #[arg(long)]
    strict: bool,
}

#[derive(Args, Debug, Serialize)]
struct EvaluateArgs {
    /// State file, or a result file from `optimize`.
    state: PathBuf,
    /// Detection-arm loss in dB (default: the result file's, else 0).
    #[arg(long, allow_negative_numbers = true)]
    ra: Option<f64>,
    /// Control-arm loss in dB (default: the result file's, else 0).
    #[arg(long, allow_negative_numbers = true)]
    rb: Option<f64>,
    /// Phase in radians, or "best" to scan for the largest F (default: the
    /// result file's phase, else 0).
    #[arg(long, allow_negative_numbers = true)]
    phi: Option<PhaseChoice>,
    /// Write the report here as well as to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the post-loss blocked density matrix here.
    #[arg(long)]
    density: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct OptimizeArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    ra: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    rb: f64,
    #[command(flatten)]
    search: SearchArgs,
    /// Result JSON path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the optimal state as a bare state file.
    #[arg(long)]
    state_out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SweepArgs {
    #[arg(long)]
    n: usize,
    /// Detection-arm losses in dB as start:stop:step.
    #[arg(long, default_value = "0:24:1")]
    ra_range: Range,
    /// Control-arm loss in dB, or "lockstep" to follow the detection arm.
    #[arg(long, default_value = "0")]
    rb: ControlLoss,
    #[command(flatten)]
    search: SearchArgs,
    /// CSV path (default: stdout); a JSON sidecar is written beside it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct ScalingArgs {
    /// Photon numbers to optimize.
    #[arg(long, value_delimiter = ',', default_value = "1,3,4,6,10")]
    ns: Vec<usize>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    ra: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    rb: f64,
    #[command(flatten)]
    search: SearchArgs,
    /// Report JSON path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct ClassicalArgs {
    /// Amplitude transmissions |t| as start:stop:step.
    #[arg(long, conflicts_with = "ra_range")]
    t_range: Option<Range>,
    /// Losses in dB as start:stop:step (default 0:40:1).
    #[arg(long)]
    ra_range: Option<Range>,
    /// CSV path (default: stdout); a JSON sidecar is written beside it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct CharacterizeArgs {
    /// Characterize the state stored in a result file instead of optimizing.
    #[arg(long, conflicts_with_all = ["n", "ra_range"])]
    result: Option<PathBuf>,
    #[arg(long, required_unless_present = "result")]
    n: Option<usize>,
    #[arg(long, default_value = "0:10:1")]
    ra_range: Range,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    rb: f64,
    #[command(flatten)]
    search: SearchArgs,
    /// CSV path (default: stdout); a JSON sidecar is written beside it.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Outcome {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Failure::usage(anyhow::anyhow!("--jobs must be at least 1")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::usage(anyhow::anyhow!("cannot size the thread pool: {e}")))?;
    }
    match cli.command {
        Command::Evaluate(args) => evaluate::run(&args),
        Command::Optimize(args) => optimize::run(&args),
        Command::Sweep(args) => sweep::run_sweep(&args),
        Command::Scaling(args) => optimize::run_scaling(&args),
        Command::Classical(args) => classical::run(&args),
        Command::Characterize(args) => sweep::run_characterize(&args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code as u8)
        }
    }
}
