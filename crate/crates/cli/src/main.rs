mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use hexsom::corpus::Weighting;
use hexsom::som::Engine;

use crate::config::{Config, UsageError};

/// Segment and visualize complaint corpora with hexagonal self-organizing maps.
#[derive(Parser)]
#[command(name = "hexsom", version)]
struct Cli {
    /// Flat key = value file; flags given on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tokenize a JSONL complaint file into a corpus file.
    Ingest(IngestArgs),
    /// Build a normalized TF or TF-IDF document-term matrix.
    Dtm(DtmArgs),
    /// Size, initialize and train a map.
    Train(TrainArgs),
    /// Map every document of a matrix onto a trained map.
    Assign(AssignArgs),
    /// Render a trained map as SVG plus a JSON decoration dump.
    Viz(VizArgs),
    /// Engine parity or map-size scaling benchmark, as CSV.
    Bench(BenchArgs),
}

#[derive(Args)]
pub struct IngestArgs {
    /// JSONL input, one {"id", "text", "severity"?} object per line.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Replaces the built-in stopword list.
    #[arg(long, value_name = "FILE")]
    pub stopwords: Option<PathBuf>,
    #[arg(long)]
    pub stem: bool,
    #[arg(long)]
    pub min_token_len: Option<usize>,
}

#[derive(Args)]
pub struct DtmArgs {
    /// Corpus file written by `ingest`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// tf or tfidf.
    #[arg(long)]
    pub weighting: Option<Weighting>,
}

#[derive(Args)]
pub struct MapOverride {
    /// Map rows; requires --cols and --iters.
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub cols: Option<usize>,
    /// Training iterations.
    #[arg(long)]
    pub iters: Option<u64>,
}

#[derive(Args)]
pub struct TrainArgs {
    /// DTM1 matrix file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// SOM1 output; run metadata goes to <output>.meta.json.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub map: MapOverride,
    #[arg(long)]
    pub alpha0: Option<f64>,
    #[arg(long)]
    pub sigma0: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// serial, parallel-strict or parallel-fast.
    #[arg(long)]
    pub engine: Option<Engine>,
    /// Worker threads; defaults to SOM_WORKERS, then the available cores.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Args)]
pub struct AssignArgs {
    /// SOM1 map file.
    #[arg(long)]
    pub map: Option<PathBuf>,
    /// DTM1 matrix file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Corpus file, for document ids.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// CSV output; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct VizArgs {
    #[arg(long)]
    pub map: Option<PathBuf>,
    /// DTM1 matrix file; also supplies the vocabulary.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Corpus file, for severity labels.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long)]
    pub top_terms: Option<usize>,
    /// Pixels between neighboring hexagon centers.
    #[arg(long)]
    pub cell_size: Option<f64>,
    /// Print the document count inside each hexagon.
    #[arg(long)]
    pub show_counts: bool,
    #[arg(long)]
    pub title: Option<String>,
}

#[derive(Args)]
pub struct BenchArgs {
    /// parity or scaling.
    #[arg(long)]
    pub study: Option<String>,
    /// CSV output; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Parity: DTM1 matrix to train on instead of a 513x3917 synthetic corpus.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub map: MapOverride,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Scaling: ascending square map sides.
    #[arg(long, value_delimiter = ',')]
    pub sides: Option<Vec<usize>>,
    /// Scaling: vector length.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Scaling: number of random data rows.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Scaling: timings per point, fastest kept.
    #[arg(long)]
    pub repeats: Option<usize>,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    match cli.command {
        Command::Ingest(a) => commands::ingest(&a, &cfg),
        Command::Dtm(a) => commands::dtm(&a, &cfg),
        Command::Train(a) => commands::train(&a, &cfg),
        Command::Assign(a) => commands::assign(&a, &cfg),
        Command::Viz(a) => commands::viz(&a, &cfg),
        Command::Bench(a) => commands::bench(&a, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let rendered = e.to_string();
            let line = rendered.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid usage");
            eprintln!("{line}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
