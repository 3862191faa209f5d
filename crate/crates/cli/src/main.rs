//! `imat`: plan, encode, synthesize, decode and simulate touch-readable material tags.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use imat_core::Error;

#[derive(Parser, Debug)]
#[command(name = "imat", version, about = "Material-tag codec toolkit")]
struct Cli {
    /// Log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a code plan and print the per-channel capacity.
    Plan(PlanArgs),
    /// Turn a word into fabrication targets and a filler recipe.
    Encode(EncodeArgs),
    /// Synthesize sensor traces for one word.
    Synth(SynthArgs),
    /// Decode sensor traces back to states or a word.
    Decode(DecodeArgs),
    /// Train a texture classifier and write it as JSON.
    Train(TrainArgs),
    /// Monte Carlo error rates for a plan.
    Simulate(SimulateArgs),
    /// Error rates as one noise field is varied.
    Sweep(SweepArgs),
    /// Query a filler calibration table.
    Calib(CalibArgs),
}

#[derive(Args, Debug)]
struct PlanArgs {
    /// Bits per channel as electrical/magnetic/surface.
    #[arg(long, default_value = "5/3/4")]
    alloc: String,
    /// Plan bound overrides, e.g. electrical_margin=1.7.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Texture class table (JSON list); defaults to the built-in 16 classes.
    #[arg(long)]
    classes: Option<PathBuf>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct WordArgs {
    /// Word value.
    #[arg(long, conflicts_with = "label", required_unless_present = "label")]
    word: Option<u32>,
    /// Word label, looked up in --labels.
    #[arg(long, requires = "labels")]
    label: Option<String>,
    /// `word_value,label` CSV.
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EncodeArgs {
    #[arg(long)]
    plan: PathBuf,
    #[command(flatten)]
    word: WordArgs,
    /// Graphite fraction → conductivity table; defaults to the starter table.
    #[arg(long)]
    conductivity_table: Option<PathBuf>,
    /// Magnetite fraction → remanence table; defaults to the starter table.
    #[arg(long)]
    remanence_table: Option<PathBuf>,
    /// Also write the targets and recipe as JSON.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum NoisePreset {
    Default,
    Zero,
    Pessimistic,
}

#[derive(Args, Debug)]
struct NoiseArgs {
    #[arg(long, value_enum, default_value_t = NoisePreset::Default)]
    noise: NoisePreset,
    /// Noise field overrides, e.g. s11_noise_db=0.2.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ChannelArg {
    All,
    Electrical,
    Magnetic,
    Surface,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long)]
    plan: PathBuf,
    #[command(flatten)]
    word: WordArgs,
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long, value_enum, default_value_t = ChannelArg::All)]
    channel: ChannelArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory receiving sweeps.jsonl, trace.jsonl and swipe.wav.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Trained texture model; without it a synthetic model is trained from --seed.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct DecodeArgs {
    #[arg(long)]
    plan: PathBuf,
    /// S11 sweep frames (JSONL).
    #[arg(long)]
    sweeps: Option<PathBuf>,
    /// Magnetometer samples (JSONL).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Swipe audio (WAV).
    #[arg(long)]
    clip: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
    /// Print the label bound to the decoded word.
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    plan: PathBuf,
    /// `path,class_id,texture,energy` CSV of recorded clips; synthetic corpus otherwise.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    clips_per_class: usize,
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    plan: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long, default_value_t = 1000, conflicts_with = "exhaustive")]
    trials: u64,
    /// Run every word once instead of random words.
    #[arg(long)]
    exhaustive: bool,
    /// Report JSON; stdout when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Per-trial CSV.
    #[arg(long)]
    records: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    plan: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    noise: NoiseArgs,
    /// Noise field to vary.
    #[arg(long)]
    field: String,
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Conductivity,
    Remanence,
}

#[derive(Args, Debug)]
struct CalibArgs {
    #[arg(long)]
    table: PathBuf,
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Property value at this weight fraction.
    #[arg(long)]
    fraction: Option<f64>,
    /// Weight fraction reaching this property value.
    #[arg(long)]
    target: Option<f64>,
    /// Report the steepest rise of the table.
    #[arg(long)]
    percolation: bool,
    /// Write the interpolated curve at this many fractions as CSV.
    #[arg(long, value_name = "PATH")]
    series: Option<PathBuf>,
    #[arg(long, default_value_t = 101)]
    series_points: usize,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let Some(core) = err.chain().find_map(|e| e.downcast_ref::<Error>()) else {
        return 2;
    };
    match core.root() {
        Error::Unreachable { .. } | Error::Extrapolation { .. } => 3,
        Error::Parse { .. } | Error::Io(_) | Error::Json(_) | Error::Csv(_) | Error::Wav(_) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();
    let result = match cli.command {
        Command::Plan(a) => commands::plan(a),
        Command::Encode(a) => commands::encode(a),
        Command::Synth(a) => commands::synth(a),
        Command::Decode(a) => commands::decode(a),
        Command::Train(a) => commands::train(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Calib(a) => commands::calib(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
