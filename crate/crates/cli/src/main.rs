use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

use eoswap::{Layout, SearchObjective, Structure, Target, TimeMode};

/// Environment variable naming the default directory for run outputs.
pub const OUTPUT_ROOT_VAR: &str = "EOSWAP_OUTPUT_ROOT";

#[derive(Parser, Debug)]
#[command(
    name = "eoswap",
    version,
    about = "Exchange-only CNOT/CZ pulse sequences: verify, time, transform, search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a sequence against CNOT or CZ; exit 0 iff d < 1e-8.
    Verify {
        /// Sequence file, or the name of a bundled reference (e.g. fw_cnot).
        sequence: String,
        #[arg(long, default_value = "CNOT", value_parser = parse_target)]
        target: Target,
    },
    /// Print sequential/parallel time and the parallel step grouping.
    Time { sequence: String },
    /// Apply a symmetry transform and write the resulting sequence.
    Transform {
        sequence: String,
        #[command(flatten)]
        kind: TransformKind,
        /// Output file; stdout if omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run the actor-critic search and write manifest, log, checkpoint and
    /// every exact sequence found.
    Optimize(OptimizeArgs),
    /// Sweep training lengths and tabulate best times against the reference lines.
    Bench(BenchArgs),
    /// Write sector unitaries of a sequence as JSON, or the bundled references as files.
    Export {
        #[arg(required_unless_present = "references", conflicts_with = "references")]
        sequence: Option<String>,
        /// Directory to write every bundled reference sequence into.
        #[arg(long)]
        references: Option<PathBuf>,
        /// Output file for the unitaries; stdout if omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct TransformKind {
    /// alpha -> 2 - alpha on every pulse.
    #[arg(long)]
    conjugate: bool,
    /// Reverse the pulse order and negate every alpha.
    #[arg(long)]
    invert: bool,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub(crate) enum PolishObjective {
    Distance,
    DistancePlusTime,
}

impl From<PolishObjective> for SearchObjective {
    fn from(p: PolishObjective) -> Self {
        match p {
            PolishObjective::Distance => SearchObjective::Distance,
            PolishObjective::DistancePlusTime => SearchObjective::DistancePlusTime,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub(crate) struct RunArgs {
    #[arg(long, default_value = "CNOT", value_parser = parse_target)]
    pub(crate) target: Target,
    #[arg(long, default_value = "LINEAR_11", value_parser = parse_layout)]
    pub(crate) layout: Layout,
    /// FIVE_BRICK_n or SEVEN_BLOCK_n; defaults to 7 bricks of the layout's kind.
    #[arg(long, value_parser = parse_structure)]
    pub(crate) structure: Option<Structure>,
    #[arg(long, default_value_t = 0)]
    pub(crate) seed: u64,
    #[arg(long, default_value_t = 0.01)]
    pub(crate) gamma: f64,
    #[arg(long = "bigN", alias = "big-n", default_value_t = 10.0)]
    pub(crate) big_n: f64,
    #[arg(long, default_value = "PARALLEL", value_parser = parse_time_mode)]
    pub(crate) time_mode: TimeMode,
    /// What the partial Powell polish minimizes.
    #[arg(long, value_enum, default_value = "distance-plus-time")]
    pub(crate) powell_objective: PolishObjective,
    #[arg(long, default_value_t = 64)]
    pub(crate) episode_length: usize,
    #[arg(long, default_value_t = 1000)]
    pub(crate) log_interval: u64,
    #[arg(long, default_value_t = 256)]
    pub(crate) batch_size: usize,
    #[arg(long, default_value_t = 5_000_000)]
    pub(crate) buffer_capacity: usize,
    /// Record elapsed time in the log (makes logs differ between runs).
    #[arg(long)]
    pub(crate) wall_clock: bool,
}

#[derive(Args, Debug)]
pub(crate) struct OptimizeArgs {
    #[command(flatten)]
    pub(crate) run: RunArgs,
    #[arg(long, default_value_t = 5000)]
    pub(crate) steps: u64,
    /// Repeat the run described by a manifest; other run flags are ignored.
    #[arg(long)]
    pub(crate) manifest: Option<PathBuf>,
    /// Output directory; defaults to a named directory under $EOSWAP_OUTPUT_ROOT (or ./runs).
    #[arg(long)]
    pub(crate) out: Option<PathBuf>,
    /// Reuse an output directory that already holds a run.
    #[arg(long)]
    pub(crate) force: bool,
}

#[derive(Args, Debug)]
pub(crate) struct BenchArgs {
    /// Emit the steps-versus-best-time table (the only bench mode).
    #[arg(long, required = true)]
    pub(crate) curve: bool,
    /// Comma-separated training lengths.
    #[arg(long, value_delimiter = ',', default_value = "0,1000,5000,10000,45000")]
    pub(crate) grid: Vec<u64>,
    #[command(flatten)]
    pub(crate) run: RunArgs,
    #[arg(long)]
    pub(crate) out: Option<PathBuf>,
    #[arg(long)]
    pub(crate) force: bool,
}

fn parse_target(s: &str) -> Result<Target, String> {
    s.parse().map_err(|e: eoswap::Error| e.to_string())
}

fn parse_layout(s: &str) -> Result<Layout, String> {
    s.parse().map_err(|e: eoswap::Error| e.to_string())
}

fn parse_structure(s: &str) -> Result<Structure, String> {
    s.parse().map_err(|e: eoswap::Error| e.to_string())
}

fn parse_time_mode(s: &str) -> Result<TimeMode, String> {
    s.parse().map_err(|e: eoswap::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify { sequence, target } => commands::verify(&sequence, target),
        Command::Time { sequence } => commands::time(&sequence),
        Command::Transform {
            sequence,
            kind,
            out,
        } => commands::transform(&sequence, kind.invert, out.as_deref()),
        Command::Optimize(args) => commands::optimize(args),
        Command::Bench(args) => commands::bench(args),
        Command::Export {
            sequence,
            references,
            out,
        } => match references {
            Some(dir) => commands::export_references(&dir),
            None => {
                commands::export_unitaries(sequence.as_deref().unwrap_or_default(), out.as_deref())
            }
        },
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
