//! `monoembed`: file-based pipeline from Java sources to scored service
//! decompositions.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use monoembed_core::clustering::{Algorithm, NoisePolicy};
use monoembed_core::embedding::mock::MockMode;
use monoembed_core::embedding::{BaseFeatures, ProviderKind};
use monoembed_core::Error;
use serde::Serialize;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INPUT: u8 = 3;
pub const EXIT_NETWORK: u8 = 4;
pub const EXIT_NOT_CONVERGED: u8 = 5;

#[derive(Parser)]
#[command(name = "monoembed", version, about = "Decompose Java monoliths into services from class embeddings")]
struct Cli {
    /// Log more (repeat for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a Java source tree into a corpus directory.
    Analyze(AnalyzeArgs),
    /// Discover or list repositories and turn each into a labelled corpus.
    Mine(MineArgs),
    /// Sample hard-negative triplets from labelled corpora.
    Triplets(TripletArgs),
    /// Embed a corpus into a CSV feature matrix.
    Embed(EmbedArgs),
    /// Train a contrastive projection on triplets.
    Train(TrainArgs),
    /// Standardize an embedding and cluster it into services.
    Decompose(DecomposeArgs),
    /// Score a provider's embeddings against service labels.
    EvalEmbeddings(EvalEmbeddingsArgs),
    /// Compute F-beta and the metric battery for a decomposition.
    EvalDecomposition(EvalDecompositionArgs),
    /// Aggregate metric reports into one SCORE per approach.
    Score(ScoreArgs),
    /// 2-D PCA coordinates of an embedding, for plotting.
    Project(ProjectArgs),
    /// Run a local embedding server for offline testing.
    MockServer(MockServerArgs),
}

fn parse_provider(s: &str) -> Result<ProviderKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_noise(s: &str) -> Result<NoisePolicy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_base(s: &str) -> Result<BaseFeatures, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<MockMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args, Serialize)]
pub struct AnalyzeArgs {
    /// Root of the Java sources.
    #[arg(long)]
    pub src: PathBuf,
    /// Output corpus directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Application name (defaults to the source directory name).
    #[arg(long)]
    pub app: Option<String>,
    /// JSON object mapping fqn to service name.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Glob of files to skip (repeatable).
    #[arg(long = "ignore")]
    pub ignore: Vec<String>,
    /// Glob of unparseable files to keep with raw-text terms (repeatable).
    #[arg(long = "raw-fallback")]
    pub raw_fallback: Vec<String>,
    /// Drop get/set/impl/util from terms.
    #[arg(long)]
    pub drop_accessor_words: bool,
}

#[derive(Args, Serialize)]
pub struct MineArgs {
    /// File with one repository per line (directory or clone URL).
    #[arg(long, conflicts_with = "discover")]
    pub list: Option<PathBuf>,
    /// Find repositories through the search API.
    #[arg(long)]
    pub discover: bool,
    /// Search query (repeatable; defaults to the built-in queries).
    #[arg(long = "query")]
    pub queries: Vec<String>,
    /// Serve search pages from these files instead of the API (in page order).
    #[arg(long = "search-fixture")]
    pub search_fixtures: Vec<PathBuf>,
    #[arg(long, default_value = monoembed_core::corpus_builder::DEFAULT_API_BASE)]
    pub api_base: String,
    /// Directory caching API responses.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    #[arg(long, default_value_t = monoembed_core::corpus_builder::DEFAULT_MIN_STARS)]
    pub min_stars: u64,
    #[arg(long, default_value_t = 3)]
    pub max_pages: u32,
    /// Only list discovered repositories; do not clone or analyze.
    #[arg(long)]
    pub discover_only: bool,
    /// Where clones live (default: <out>/.clones).
    #[arg(long)]
    pub clones: Option<PathBuf>,
    /// Never use the network; rely on caches and existing clones.
    #[arg(long)]
    pub offline: bool,
    /// Output directory; each accepted repository becomes <out>/<name>/.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct TripletArgs {
    /// Directory of corpus directories.
    #[arg(long)]
    pub corpora: PathBuf,
    /// Maximum number of sampling iterations.
    #[arg(long = "k", alias = "samples", default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// File of repository names to hold out, one per line.
    #[arg(long)]
    pub exclusions: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize, Clone)]
pub struct ProviderArgs {
    /// bow, tfidf, calls_row, interactions_row, remote or projection.
    #[arg(long, value_parser = parse_provider, default_value = "tfidf")]
    pub provider: ProviderKind,
    /// Mirror adjacency rows (graph providers).
    #[arg(long)]
    pub symmetric: bool,
    /// Remote embedding endpoint URL.
    #[arg(long)]
    pub endpoint: Option<String>,
    /// Remote model name.
    #[arg(long)]
    pub model_name: Option<String>,
    /// Prefix every payload with this instruction.
    #[arg(long)]
    pub instruction: Option<String>,
    /// Use the default bounded-context instruction (instruct models).
    #[arg(long)]
    pub instruct: bool,
    #[arg(long, default_value_t = 16)]
    pub batch_size: usize,
    #[arg(long, default_value_t = monoembed_core::embedding::remote::DEFAULT_MAX_CHARS)]
    pub max_chars: usize,
    #[arg(long, default_value_t = monoembed_core::embedding::remote::DEFAULT_CONCURRENCY)]
    pub concurrency: usize,
    #[arg(long, default_value_t = monoembed_core::embedding::remote::DEFAULT_RETRIES)]
    pub retries: u32,
    #[arg(long, default_value_t = 200)]
    pub backoff_ms: u64,
    /// Trained projection model (projection provider).
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct EmbedArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub provider: ProviderArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub triplets: PathBuf,
    #[arg(long)]
    pub corpora: PathBuf,
    /// Triplet margin.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 32)]
    pub dim_out: usize,
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 32)]
    pub batch: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// tfidf, bow or remote-cached.
    #[arg(long, value_parser = parse_base, default_value = "tfidf")]
    pub base_features: BaseFeatures,
    /// Directory of `<app>.csv` embeddings (remote-cached base features).
    #[arg(long)]
    pub cached: Option<PathBuf>,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Loss history CSV (default: <out>.history.csv).
    #[arg(long)]
    pub history: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct DecomposeArgs {
    /// Embedding CSV.
    #[arg(long)]
    pub embedding: PathBuf,
    /// affinity, kmeans, ward or dbscan.
    #[arg(long, value_parser = parse_algorithm, default_value = "affinity")]
    pub algorithm: Algorithm,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 0.65)]
    pub damping: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub preference: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    #[arg(long, default_value_t = 4)]
    pub min_pts: usize,
    /// nearest or singletons.
    #[arg(long, value_parser = parse_noise, default_value = "nearest")]
    pub noise: NoisePolicy,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    /// Cluster the raw matrix instead of its z-scores.
    #[arg(long)]
    pub no_standardize: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct EvalEmbeddingsArgs {
    /// Directory of labelled corpus directories.
    #[arg(long)]
    pub corpora: PathBuf,
    #[command(flatten)]
    pub provider: ProviderArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct EvalDecompositionArgs {
    #[arg(long)]
    pub decomposition: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    /// Ground-truth decomposition (defaults to the corpus labels, if any).
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Use-case traces for BCP.
    #[arg(long)]
    pub traces: Option<PathBuf>,
    #[arg(long, default_value_t = monoembed_core::evaluation::DEFAULT_BETA)]
    pub beta: f64,
    /// Approach name used by `score` (default: the decomposition's algorithm).
    #[arg(long)]
    pub approach: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct ScoreArgs {
    /// Directory of eval-decomposition reports.
    #[arg(long)]
    pub reports: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct ProjectArgs {
    #[arg(long)]
    pub embedding: PathBuf,
    /// Corpus whose labels annotate the points.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct MockServerArgs {
    #[arg(long, default_value = "127.0.0.1:8089")]
    pub addr: std::net::SocketAddr,
    /// normal, dim-switch or always-fail.
    #[arg(long, value_parser = parse_mode, default_value = "normal")]
    #[serde(skip)]
    pub mode: MockMode,
    #[arg(long, default_value_t = 4)]
    pub dim: usize,
    #[arg(long, default_value_t = 0)]
    pub max_delay_ms: u64,
    #[arg(long, default_value_t = 0)]
    pub fail_first: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Why a command did not finish cleanly.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Core(Error),
    /// Output was written but the algorithm did not converge.
    NotConverged(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

pub type CmdResult = std::result::Result<(), Failure>;

fn exit_code(failure: &Failure) -> u8 {
    match failure {
        Failure::Usage(_) => EXIT_USAGE,
        Failure::Core(Error::Network(_)) => EXIT_NETWORK,
        Failure::Core(_) => EXIT_INPUT,
        Failure::NotConverged(_) => EXIT_NOT_CONVERGED,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    let result = match cli.command {
        Command::Analyze(a) => commands::analyze(&a),
        Command::Mine(a) => commands::mine(&a),
        Command::Triplets(a) => commands::triplets(&a),
        Command::Embed(a) => commands::embed(&a),
        Command::Train(a) => commands::train(&a),
        Command::Decompose(a) => commands::decompose(&a),
        Command::EvalEmbeddings(a) => commands::eval_embeddings(&a),
        Command::EvalDecomposition(a) => commands::eval_decomposition(&a),
        Command::Score(a) => commands::score(&a),
        Command::Project(a) => commands::project(&a),
        Command::MockServer(a) => commands::mock_server(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Usage(msg) => eprintln!("usage error: {msg}"),
                Failure::Core(e) => eprintln!("error: {e}"),
                Failure::NotConverged(msg) => eprintln!("warning: {msg}"),
            }
            ExitCode::from(exit_code(&failure))
        }
    }
}
