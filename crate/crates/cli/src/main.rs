use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod manifest;

use config::{Backend, PolicyKind};

/// Synthesizability-aware molecular design: dataset generation, surrogate
/// training, search, screening and reporting.
#[derive(Debug, Parser)]
#[command(name = "synthweaver", version)]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample random molecules from a space and label them with the planner.
    GenDataset(GenDatasetArgs),
    /// Label the SMILES in a file with the planner.
    Label(LabelArgs),
    /// Cross-validate and train a surrogate on a labeled dataset.
    Train(TrainArgs),
    /// Softmax (or random-walk) search over a space.
    Search(SearchArgs),
    /// Score and rank an existing SMILES library.
    Screen(ScreenArgs),
    /// Compare search and screening runs.
    Report(ReportArgs),
    /// Time the surrogate against the planner.
    Benchmark(BenchmarkArgs),
}

#[derive(Debug, Args)]
struct GenDatasetArgs {
    #[arg(long)]
    space: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Output CSV (`smiles,score`).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct LabelArgs {
    /// One SMILES per line.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Labeled CSV from `gen-dataset` or `label`.
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value = "regression")]
    task: synthweaver::surrogate::Task,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    dropout: Option<f64>,
}

#[derive(Debug, Args)]
struct ScorerArgs {
    /// Regression checkpoint; required for the retrognn backend.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long, value_enum)]
    synth_backend: Option<Backend>,
    #[arg(long)]
    top_k: Option<usize>,
    /// Re-label the top-k rows with the planner.
    #[arg(long)]
    relabel: bool,
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    scorer: ScorerArgs,
    #[arg(long)]
    space: Option<String>,
    #[arg(long, value_enum, default_value = "softmax")]
    policy: PolicyKind,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    n_init: Option<usize>,
    #[arg(long)]
    trajectories: Option<usize>,
    #[arg(long)]
    max_actions: Option<usize>,
}

#[derive(Debug, Args)]
struct ScreenArgs {
    /// One SMILES per line; extra columns are ignored.
    #[arg(long)]
    library: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    scorer: ScorerArgs,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Run directories written by `search` or `screen`.
    #[arg(long, num_args = 1.., required = true)]
    runs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct BenchmarkArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    space: Option<String>,
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Smallest heavy-atom count of the timed molecules.
    #[arg(long, default_value_t = 15)]
    min_atoms: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
