mod commands;
mod config;

use std::io::IsTerminal;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tracing_subscriber::EnvFilter;

/// Search mobile app screens by sketched icons and positional text.
#[derive(Debug, Parser)]
#[command(name = "screenseek", version)]
struct Cli {
    /// TOML file with defaults for seed, limit, ranking and serve options.
    #[arg(long, global = true, env = "SCREENSEEK_CONFIG")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the text and sketch indexes of a corpus directory.
    BuildIndex(BuildIndexArgs),
    /// Build the synonym table from embedding models and thesauri.
    BuildSynonyms(BuildSynonymsArgs),
    /// Replay a queries file and report where each target ranked.
    Eval(EvalArgs),
    /// Run one query against an index.
    Search(SearchArgs),
    /// Write a synthetic corpus.
    GenCorpus(GenCorpusArgs),
    /// Write synthetic doodles as JSON lines.
    GenDoodles(GenDoodlesArgs),
    /// Write a corpus with planted target screens plus a matching queries file.
    GenBenchmark(GenBenchmarkArgs),
    /// Train the doodle recognizer from a doodles file.
    TrainRecognizer(TrainRecognizerArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct BuildIndexArgs {
    /// Directory of *.screen.json files.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
    /// Synonym table; without it only exact and fuzzy matches score.
    #[arg(long)]
    synonyms: Option<PathBuf>,
    /// label<TAB>class file mapping corpus labels to doodle classes.
    #[arg(long)]
    class_map: Option<PathBuf>,
    /// Directory with stopwords.txt, named_entities.txt, lemma_exceptions.txt.
    #[arg(long)]
    lexicons: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BuildSynonymsArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
    /// Embedding model (word then vector components per line). Repeatable.
    #[arg(long = "model")]
    models: Vec<PathBuf>,
    /// Thesaurus consulted first on ties and when no model knows a word.
    #[arg(long)]
    thesaurus: Option<PathBuf>,
    #[arg(long)]
    secondary_thesaurus: Option<PathBuf>,
    #[arg(long)]
    lexicons: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    index: PathBuf,
    /// target<TAB>icon:Class@l,t,r,b;...<TAB>text per line.
    #[arg(long)]
    queries: PathBuf,
    #[arg(long)]
    limit: Option<usize>,
    /// Print JSON lines instead of the table.
    #[arg(long)]
    json: bool,
    /// Also write the JSON lines report here.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[arg(long)]
    index: PathBuf,
    /// Class@left,top,right,bottom in normalized screen coordinates. Repeatable.
    #[arg(long = "icon")]
    icons: Vec<String>,
    /// Text chips such as `tl:twitter` or `checkout`.
    texts: Vec<String>,
    #[arg(long)]
    limit: Option<usize>,
    #[arg(long)]
    json: bool,
    /// Show each component's contribution per result.
    #[arg(long)]
    explain: bool,
}

#[derive(Debug, Args)]
struct GenCorpusArgs {
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long)]
    screens: i64,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct GenDoodlesArgs {
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long)]
    per_class: i64,
    /// Comma-separated class names; all 23 when omitted.
    #[arg(long, value_delimiter = ',')]
    classes: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct GenBenchmarkArgs {
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    distractors: i64,
    #[arg(long, default_value_t = 200)]
    targets: i64,
    /// Std-dev of doodle placement error, as a fraction of the screen.
    #[arg(long, default_value_t = 0.03)]
    drift: f64,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct TrainRecognizerArgs {
    /// JSON lines of {"class": ..., "strokes": [[[x, y], ...], ...]}.
    #[arg(long)]
    doodles: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long, default_value_t = 3)]
    k: usize,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, env = "SCREENSEEK_INDEX")]
    index: Option<PathBuf>,
    #[arg(long, env = "SCREENSEEK_CORPUS")]
    corpus: Option<PathBuf>,
    /// Recognizer model; a reference model is trained on synthetic doodles when absent.
    #[arg(long, env = "SCREENSEEK_MODEL")]
    model: Option<PathBuf>,
    #[arg(long, env = "SCREENSEEK_BIND")]
    bind: Option<String>,
    #[arg(long, env = "SCREENSEEK_LIMIT")]
    limit: Option<usize>,
    #[arg(long, env = "SCREENSEEK_CORS_ORIGIN")]
    cors_origin: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")),
        )
        .with_writer(std::io::stderr)
        .with_ansi(std::io::stderr().is_terminal())
        .init();
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
