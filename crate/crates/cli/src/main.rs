//! `multisketch` command-line front-end.
//!
//! Exit codes: 0 success, 1 data error, 2 incompatible sketches, 64 usage error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use multisketch::metrics::{Metric, Mismatch};

#[derive(Debug, Parser)]
#[command(
    name = "multisketch",
    version,
    about = "Multiset similarity through counting Bloom filters and count-min sketches"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic corpus with controlled Dice values.
    Gen(GenArgs),
    /// Filter a user/song/plays triplet file into user profiles.
    Ingest(IngestArgs),
    /// Encode one profile into a sketch envelope.
    Sketch(SketchCmdArgs),
    /// Estimate the similarity of two profiles or sketch envelopes.
    Compare(CompareArgs),
    /// Compare every corpus pair and write per-pair results as CSV.
    Pairs(PairsArgs),
    /// Sweep sketch dimensions and write an RMSE grid as CSV.
    Grid(GridArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, default_value_t = 1001)]
    pairs: usize,
    /// Distinct entries of the base multiset.
    #[arg(long, default_value_t = 67)]
    unique: usize,
    #[arg(long, default_value_t = 10)]
    strlen: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for manifest.json and profiles.tsv.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct IngestArgs {
    /// Tab-separated user, song, plays; gzip is detected.
    input: PathBuf,
    #[arg(long, default_value_t = 50)]
    min_distinct: usize,
    /// Filtered profiles, same TSV layout as the input.
    #[arg(long, short)]
    out: PathBuf,
    /// Optional JSON summary (users, distinct_songs, total_plays).
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Bf,
    Cbf,
    Cms,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MetricArg {
    Dice,
    Cosine,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Dice => Metric::Dice,
            MetricArg::Cosine => Metric::Cosine,
        }
    }
}

#[derive(Debug, Clone, Args)]
struct SketchParamArgs {
    #[arg(long, value_enum, default_value_t = KindArg::Cbf)]
    kind: KindArg,
    /// Filter length n, or count-min width w.
    #[arg(long, short = 'n', default_value_t = 128)]
    width: u32,
    /// Hash functions k (BF/CBF only).
    #[arg(long, short = 'k')]
    hashes: Option<u32>,
    /// Rows d (CMS only).
    #[arg(long, short = 'd')]
    depth: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct SketchCmdArgs {
    /// Profile TSV.
    input: PathBuf,
    /// User to encode; optional when the file holds a single user.
    #[arg(long)]
    user: Option<String>,
    #[command(flatten)]
    params: SketchParamArgs,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Profile TSV or sketch envelope.
    left: PathBuf,
    /// Profile TSV or sketch envelope.
    right: PathBuf,
    #[arg(long)]
    left_user: Option<String>,
    #[arg(long)]
    right_user: Option<String>,
    #[command(flatten)]
    params: SketchParamArgs,
    #[arg(long, value_enum, default_value_t = MetricArg::Dice)]
    metric: MetricArg,
    /// Also report the exact similarity and signed error (profiles only).
    #[arg(long)]
    truth: bool,
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
struct CorpusSource {
    /// Corpus directory written by `gen`.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Profile TSV; every unordered user pair is compared.
    #[arg(long)]
    profiles: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PairsArgs {
    #[command(flatten)]
    source: CorpusSource,
    #[arg(long, default_value_t = 4000)]
    max_pairs: usize,
    #[command(flatten)]
    params: SketchParamArgs,
    #[arg(long, value_enum, default_value_t = MetricArg::Dice)]
    metric: MetricArg,
    /// Comparisons CSV: pair_id,truth,estimate,error.
    #[arg(long, short)]
    out: PathBuf,
    /// Thresholds for the classification report.
    #[arg(long, value_delimiter = ',', default_value = "0.6")]
    threshold: Vec<f64>,
    /// Threshold report CSV: threshold,tp,fp,tn,fn,max_overshoot.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GridArgs {
    #[command(flatten)]
    source: CorpusSource,
    #[arg(long, default_value_t = 4000)]
    max_pairs: usize,
    #[arg(long, value_enum, default_value_t = KindArg::Cbf)]
    kind: KindArg,
    /// Lengths (CBF) or widths (CMS).
    #[arg(long, value_delimiter = ',', default_value = "64,128,200,400,800")]
    widths: Vec<u32>,
    /// Hash counts (CBF) or depths (CMS).
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,10")]
    depths: Vec<u32>,
    #[arg(long, value_enum, default_value_t = MetricArg::Dice)]
    metric: MetricArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Grid CSV: dim,depth,rmse.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Incompatible(Mismatch),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Data(_) => 1,
            CliError::Incompatible(_) => 2,
            CliError::Usage(_) => 64,
        }
    }
}

impl From<multisketch::Error> for CliError {
    fn from(e: multisketch::Error) -> Self {
        match e {
            multisketch::Error::Incompatible(m) => CliError::Incompatible(m),
            multisketch::Error::InvalidParams(msg) => CliError::Usage(msg),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<multisketch::wire::WireError> for CliError {
    fn from(e: multisketch::wire::WireError) -> Self {
        CliError::Data(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Ingest(a) => commands::ingest(a),
        Command::Sketch(a) => commands::sketch(a),
        Command::Compare(a) => commands::compare(a),
        Command::Pairs(a) => commands::pairs(a),
        Command::Grid(a) => commands::grid(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(msg) => eprintln!("usage error: {msg}"),
                CliError::Data(msg) => eprintln!("error: {msg}"),
                CliError::Incompatible(m) => {
                    eprintln!("error: sketches are not comparable");
                    for field in &m.fields {
                        eprintln!("  {field}");
                    }
                }
            }
            ExitCode::from(e.exit_code())
        }
    }
}
