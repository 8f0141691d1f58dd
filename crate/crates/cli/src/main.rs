//! `compdist`: build and import word spaces, run the evaluation tasks and
//! compare reports.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use compdist::eval::Task;
use compdist::CompositionMethod;

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "compdist", version, about = "Compositional distributional semantics toolkit")]
pub struct Cli {
    /// Flat `key = value` file; command-line flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads (0 = one per core). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Count co-occurrences in a corpus and write a weighted space.
    BuildSpace(BuildSpaceArgs),
    /// Train skip-gram vectors with negative sampling.
    TrainSgns(TrainSgnsArgs),
    /// Convert a pretrained space between the binary and text formats.
    ImportEmbeddings(ImportArgs),
    /// Run an evaluation task and emit a report.
    Eval(EvalArgs),
    /// Test whether two reports of the same task differ significantly.
    Compare(CompareArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorpusFormat {
    /// `surface<TAB>lemma<TAB>pos` rows, blank line between sentences.
    Tagged,
    /// One whitespace-tokenized sentence per line.
    Plain,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceFormat {
    Text,
    Binary,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weighting {
    Ppmi,
    Lmi,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    Surface,
    Lemma,
}

impl From<Field> for compdist::TokenField {
    fn from(f: Field) -> Self {
        match f {
            Field::Surface => compdist::TokenField::Surface,
            Field::Lemma => compdist::TokenField::Lemma,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct CorpusArgs {
    #[arg(long, value_name = "PATH")]
    corpus: PathBuf,
    #[arg(long, value_enum, default_value_t = CorpusFormat::Tagged)]
    corpus_format: CorpusFormat,
    /// Token form used as the word identity.
    #[arg(long, value_enum, default_value_t = Field::Surface)]
    field: Field,
    /// Drop words seen fewer times than this.
    #[arg(long, default_value_t = 1)]
    min_count: u64,
}

#[derive(Args, Debug)]
pub struct BuildSpaceArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long, value_name = "PATH")]
    output: PathBuf,
    #[arg(long, value_enum, default_value_t = SpaceFormat::Text)]
    format: SpaceFormat,
    #[arg(long, value_enum, default_value_t = Weighting::Ppmi)]
    weighting: Weighting,
    /// Context words on each side of the target.
    #[arg(long, default_value_t = 5)]
    window: usize,
    /// Number of context (basis) words.
    #[arg(long, default_value_t = 2000)]
    basis_size: usize,
    /// Skip the N most frequent candidates when picking the basis.
    #[arg(long, default_value_t = 0)]
    skip_top: usize,
    /// Only nouns, verbs, adjectives and adverbs may be basis words.
    #[arg(long)]
    content_only: bool,
    /// Word list excluded from the basis.
    #[arg(long, value_name = "PATH")]
    stop_words: Option<PathBuf>,
    /// Word list of targets (default: every word meeting --min-count).
    #[arg(long, value_name = "PATH")]
    targets: Option<PathBuf>,
    /// Reduce to this many dimensions with a truncated SVD.
    #[arg(long)]
    svd_dim: Option<usize>,
    /// L2-normalize rows before the SVD.
    #[arg(long)]
    normalize: bool,
}

#[derive(Args, Debug)]
pub struct TrainSgnsArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long, value_name = "PATH")]
    output: PathBuf,
    #[arg(long, value_enum, default_value_t = SpaceFormat::Text)]
    format: SpaceFormat,
    #[arg(long, default_value_t = 50)]
    dim: usize,
    #[arg(long, default_value_t = 5)]
    window: usize,
    #[arg(long, default_value_t = 5)]
    negatives: usize,
    #[arg(long, default_value_t = 5)]
    epochs: usize,
    #[arg(long, default_value_t = 0.025)]
    learning_rate: f64,
    /// Frequent-word subsampling threshold, e.g. 1e-3.
    #[arg(long)]
    subsample: Option<f64>,
    /// Lock-free multi-threaded updates (not reproducible).
    #[arg(long)]
    hogwild: bool,
}

#[derive(Args, Debug)]
pub struct ImportArgs {
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    /// Defaults to binary for `.bin` files, text otherwise.
    #[arg(long, value_enum)]
    input_format: Option<SpaceFormat>,
    #[arg(long, value_name = "PATH")]
    output: PathBuf,
    #[arg(long, value_enum, default_value_t = SpaceFormat::Text)]
    format: SpaceFormat,
    /// Keep only the words listed in this file.
    #[arg(long, value_name = "PATH")]
    vocab: Option<PathBuf>,
}

fn parse_task(s: &str) -> Result<Task, String> {
    s.parse().map_err(|e: compdist::Error| e.to_string())
}

fn parse_method(s: &str) -> Result<CompositionMethod, String> {
    s.parse().map_err(|e: compdist::Error| e.to_string())
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// disambiguation, sentence-similarity, paraphrase or dialogue-acts.
    #[arg(long, value_parser = parse_task)]
    task: Task,
    /// Composition method, e.g. addition or copy-object.
    #[arg(long, value_parser = parse_method)]
    method: CompositionMethod,
    #[arg(long, value_name = "PATH")]
    space: PathBuf,
    /// Defaults to binary for `.bin` files, text otherwise.
    #[arg(long, value_enum)]
    space_format: Option<SpaceFormat>,
    /// Name recorded in the report (default: the space file name).
    #[arg(long)]
    space_id: Option<String>,
    /// `surface<TAB>lemma` file used when a surface form is missing.
    #[arg(long, value_name = "PATH")]
    lemma_map: Option<PathBuf>,
    /// Look words up by their lemma first.
    #[arg(long)]
    lemmatize: bool,
    /// Retry missing words in lower case.
    #[arg(long)]
    case_fold: bool,
    /// `verb<TAB>subject<TAB>object<TAB>count` file for relational verbs.
    #[arg(long, value_name = "PATH")]
    triples: Option<PathBuf>,
    /// Dataset for the two correlation tasks.
    #[arg(long, value_name = "PATH")]
    dataset: Option<PathBuf>,
    /// Check judgements against a scale, as `LO,HI`.
    #[arg(long, value_name = "LO,HI")]
    scale: Option<String>,
    /// Paraphrase training pairs.
    #[arg(long, value_name = "PATH")]
    train: Option<PathBuf>,
    /// Paraphrase test pairs.
    #[arg(long, value_name = "PATH")]
    test: Option<PathBuf>,
    /// Dialogue-act CSV.
    #[arg(long, value_name = "PATH")]
    dialogues: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    train_ids: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    test_ids: Option<PathBuf>,
    /// Neighbours consulted by the dialogue-act classifier.
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// SVD dimension for dialogue-act vectors.
    #[arg(long, default_value_t = 50)]
    svd_dim: usize,
    /// Keep dialogue-act vectors at full dimension.
    #[arg(long)]
    no_svd: bool,
    /// Comma-separated disfluency markers (default: uh,um,uh-huh).
    #[arg(long)]
    markers: Option<String>,
    /// Write the key-value report here and print the table to stdout.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    report_a: PathBuf,
    report_b: PathBuf,
    /// Bootstrap resamples for correlation tasks.
    #[arg(long, default_value_t = 10_000)]
    iterations: usize,
}

fn run() -> Result<(), CliError> {
    let cmd = Cli::command().mut_subcommands(|s| s.args_override_self(true));
    let args = config::merge(&cmd, std::env::args_os().collect())?;
    let matches = match cmd.try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return Ok(());
            }
            let rendered = e.render().to_string();
            return Err(CliError::Usage(rendered.trim_start_matches("error: ").trim_end().to_string()));
        }
    };
    let cli = Cli::from_arg_matches(&matches).map_err(|e| CliError::Usage(e.to_string()))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} workers: {e}", cli.workers)))?;
    pool.install(|| commands::dispatch(&cli))
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
