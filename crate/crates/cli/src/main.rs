mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::UsageError;

#[derive(Debug, Parser)]
#[command(name = "whitney", version, about = "Whitney-decomposition walks and coordinate hit-and-run on convex bodies")]
struct Cli {
    /// Worker threads for parallel subcommands (0 = one per core).
    #[arg(long, global = true, env = "WHITNEY_THREADS", default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Enumerate the decomposition down to a cutoff level as JSON lines.
    Decompose(DecomposeArgs),
    /// Run one walk and write its trajectory as CSV.
    Sample(SampleArgs),
    /// Build the finite chain and report its checks, profile or evolution.
    Finite(FiniteArgs),
    /// Binned TV to stationarity over independent replicas, as CSV.
    Mixcurve(MixcurveArgs),
    /// Chi-square uniformity test of walk samples after burn-in.
    Uniformity(UniformityArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Walk {
    /// The Whitney-cube walk.
    Mp,
    /// Coordinate hit-and-run.
    Chr,
}

impl Walk {
    pub fn name(self) -> &'static str {
        match self {
            Walk::Mp => "mp",
            Walk::Chr => "chr",
        }
    }
}

#[derive(Debug, Args)]
pub struct Common {
    /// Body description (JSON).
    #[arg(long)]
    pub body: PathBuf,
    /// Norm index: a number ≥ 1 or `inf`.
    #[arg(long, default_value = "inf")]
    pub p: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; standard output when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub common: Common,
    /// Cutoff level.
    #[arg(long)]
    pub depth: u32,
    /// Also list the subdivided cubes left at the cutoff.
    #[arg(long)]
    pub frontier: bool,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub walk: Walk,
    #[arg(long, default_value_t = 1000)]
    pub steps: u64,
    /// Record every `stride`-th state.
    #[arg(long, default_value_t = 1)]
    pub stride: u64,
    /// `auto`, `point:x1,...,xn`, `cube:level:v1,...,vn` or `uniform:h`.
    #[arg(long, default_value = "auto")]
    pub start: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Report {
    /// Row sums, stationarity and detailed balance.
    Balance,
    /// Conductance of the cut `x_axis < 0`.
    Cut,
    /// Brute-force conductance profile at `--alpha` (small chains only).
    Profile,
    /// TV to stationarity of the point mass on the start cube.
    Evolve,
    /// Half-cube cut experiment on `[-1/2, 1/2]^n`; needs no body.
    Halfcube,
}

impl Report {
    pub fn name(self) -> &'static str {
        match self {
            Report::Balance => "balance",
            Report::Cut => "cut",
            Report::Profile => "profile",
            Report::Evolve => "evolve",
            Report::Halfcube => "halfcube",
        }
    }
}

#[derive(Debug, Args)]
pub struct FiniteArgs {
    /// Body description (JSON); not used by `--report halfcube`.
    #[arg(long)]
    pub body: Option<PathBuf>,
    #[arg(long, default_value = "inf")]
    pub p: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Cutoff level of the chain.
    #[arg(long)]
    pub depth: u32,
    #[arg(long, value_enum, default_value = "balance")]
    pub report: Report,
    /// Body volume, when the body has no closed form for it.
    #[arg(long)]
    pub volume: Option<f64>,
    /// Axis of the cut for `--report cut`.
    #[arg(long, default_value_t = 0)]
    pub axis: usize,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Steps for `--report evolve`.
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    /// Start for `--report evolve`.
    #[arg(long, default_value = "auto")]
    pub start: String,
    /// Dimension for `--report halfcube`.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MixcurveArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub walk: Walk,
    /// Histogram bins: complete cubes up to this level plus a remainder bin.
    #[arg(long, default_value_t = 4)]
    pub bin_depth: u32,
    /// Comma-separated step counts; overrides `--max-steps`/`--every`.
    #[arg(long, value_delimiter = ',')]
    pub checkpoints: Option<Vec<u64>>,
    #[arg(long, default_value_t = 200)]
    pub max_steps: u64,
    #[arg(long, default_value_t = 10)]
    pub every: u64,
    #[arg(long, default_value_t = 1000)]
    pub replicas: usize,
    #[arg(long, default_value = "auto")]
    pub start: String,
    #[arg(long)]
    pub volume: Option<f64>,
}

#[derive(Debug, Args)]
pub struct UniformityArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "chr")]
    pub walk: Walk,
    /// Steps discarded before recording; defaults to the mixing-time formula
    /// with constant 1.
    #[arg(long)]
    pub burn_in: Option<u64>,
    /// Warmth `M` of the start, used by the default burn-in.
    #[arg(long, default_value_t = 100.0)]
    pub warmth: f64,
    /// Target accuracy, used by the default burn-in.
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    #[arg(long, default_value_t = 1000)]
    pub points: u64,
    #[arg(long, default_value_t = 50)]
    pub stride: u64,
    /// Bins per axis.
    #[arg(long, default_value_t = 4)]
    pub grid: usize,
    /// Monte-Carlo probes per bin for the bin volumes.
    #[arg(long, default_value_t = whitney_core::diagnostics::BIN_VOLUME_PROBES)]
    pub probes: usize,
    #[arg(long, default_value = "auto")]
    pub start: String,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<whitney_core::Error>() {
        Some(whitney_core::Error::InvalidBody { .. }) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("whitney: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Decompose(a) => commands::decompose(a),
        Command::Sample(a) => commands::sample(a),
        Command::Finite(a) => commands::finite(a),
        Command::Mixcurve(a) => commands::mixcurve(a),
        Command::Uniformity(a) => commands::uniformity(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("whitney: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
