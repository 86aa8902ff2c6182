//! `semshift`: file-based pipeline for lexical semantic change detection.

mod commands;
mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use semshift_core::contextual::ContextualMetric;
use semshift_core::profiling::ProfileKind;
use semshift_core::static_embeddings::AlignmentMode;

/// Log filter variable, e.g. `SEMSHIFT_LOG=debug`.
pub const LOG_ENV: &str = "SEMSHIFT_LOG";

#[derive(Debug, Parser)]
#[command(name = "semshift", version, about = "Lexical semantic change detection between two time periods")]
#[command(after_help = "Exit codes: 0 success, 1 runtime error, 2 usage error.\nLog verbosity: SEMSHIFT_LOG=error|warn|info|debug (default warn).")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Grammatical profile change scores from two CoNLL-U corpora.
    Profile(ProfileArgs),
    /// Change scores from per-target usage matrices (UMX1 files).
    EmbedScore(EmbedArgs),
    /// Change scores from two static embedding spaces aligned by Orthogonal Procrustes.
    StaticScore(StaticArgs),
    /// Geometric-mean ensemble of two score tables.
    Ensemble(EnsembleArgs),
    /// Binary changed/stable labels from a score table via change point detection.
    Classify(ClassifyArgs),
    /// Evaluate predictions against gold annotations.
    Evaluate(EvaluateArgs),
    /// Pairwise Spearman correlations between methods.
    Correlate(CorrelateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
enum KindArg {
    Morph,
    Synt,
    Morphsynt,
}

impl From<KindArg> for ProfileKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Morph => ProfileKind::Morph,
            KindArg::Synt => ProfileKind::Synt,
            KindArg::Morphsynt => ProfileKind::MorphSynt,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
enum MetricArg {
    Apd,
    Prt,
    ApdPrt,
    Jsd,
}

impl From<MetricArg> for ContextualMetric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Apd => ContextualMetric::Apd,
            MetricArg::Prt => ContextualMetric::Prt,
            MetricArg::ApdPrt => ContextualMetric::ApdPrt,
            MetricArg::Jsd => ContextualMetric::Jsd,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
enum ModeArg {
    Raw,
    Lemma,
}

impl From<ModeArg> for AlignmentMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Raw => AlignmentMode::Raw,
            ModeArg::Lemma => AlignmentMode::Lemma,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
enum TaskArg {
    Rank,
    Class,
}

#[derive(Debug, Args, serde::Serialize)]
struct ProfileArgs {
    /// CoNLL-U file(s) for the first period.
    #[arg(long, num_args = 1.., required = true)]
    corpus_t1: Vec<PathBuf>,
    /// CoNLL-U file(s) for the second period.
    #[arg(long, num_args = 1.., required = true)]
    corpus_t2: Vec<PathBuf>,
    /// Target list: `lemma<TAB>[pos]` per line.
    #[arg(long)]
    targets: PathBuf,
    /// Profile kind(s); repeat or comma-separate for several.
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    kind: Vec<KindArg>,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Ignore categories with fewer observations over both periods.
    #[arg(long, default_value_t = 0)]
    min_category_count: u64,
    /// Match lemmas case-insensitively.
    #[arg(long)]
    case_fold: bool,
    /// Fail on the first malformed CoNLL-U line instead of skipping it.
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Args, serde::Serialize)]
struct EmbedArgs {
    /// Directory of `<lemma>.umx` files for the first period.
    #[arg(long)]
    umx_t1: PathBuf,
    /// Directory of `<lemma>.umx` files for the second period.
    #[arg(long)]
    umx_t2: PathBuf,
    /// Metric(s); repeat or comma-separate for several.
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    metric: Vec<MetricArg>,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Seed for usage subsampling and clustering tie-breaks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Keep at most this many usages per target and period.
    #[arg(long)]
    max_usages: Option<usize>,
    /// Restrict to these targets (default: every `.umx` stem in either directory).
    #[arg(long)]
    targets: Option<PathBuf>,
}

#[derive(Debug, Args, serde::Serialize)]
struct StaticArgs {
    /// word2vec text vectors for the first period.
    #[arg(long)]
    vec_t1: PathBuf,
    /// word2vec text vectors for the second period.
    #[arg(long)]
    vec_t2: PathBuf,
    /// Target list: `lemma<TAB>[pos]` per line.
    #[arg(long)]
    targets: PathBuf,
    /// Output naming: `raw` for token-trained spaces, `lemma` for lemmatised ones.
    #[arg(long, value_enum, default_value = "raw")]
    mode: ModeArg,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Also write the alignment matrix as `alignment.umx`.
    #[arg(long)]
    dump_alignment: bool,
}

#[derive(Debug, Args, serde::Serialize)]
struct EnsembleArgs {
    /// Two score tables; the method id of each is its file stem.
    #[arg(long = "in", num_args = 2, required = true)]
    inputs: Vec<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, serde::Serialize)]
struct ClassifyArgs {
    /// Score table to binarise.
    #[arg(long = "in")]
    input: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, serde::Serialize)]
struct EvaluateArgs {
    /// Score tables (rank) or label files (class).
    #[arg(long, num_args = 1.., required = true)]
    pred: Vec<PathBuf>,
    /// Gold file: `lemma<TAB>graded<TAB>[binary]`.
    #[arg(long)]
    gold: PathBuf,
    /// `rank`: Spearman against graded gold; `class`: accuracy against binary gold.
    #[arg(long, value_enum)]
    task: TaskArg,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Fraction of lemmas in each false positive / negative tail.
    #[arg(long, default_value_t = 0.2)]
    bin_fraction: f64,
}

#[derive(Debug, Args, serde::Serialize)]
struct CorrelateArgs {
    /// Score tables, one per method (and dataset).
    #[arg(long = "in", num_args = 2.., required = true)]
    inputs: Vec<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Treat each parent directory as one dataset and average the
    /// per-dataset matrices.
    #[arg(long)]
    by_dataset: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Profile(a) => commands::profile(a),
        Command::EmbedScore(a) => commands::embed_score(a),
        Command::StaticScore(a) => commands::static_score(a),
        Command::Ensemble(a) => commands::ensemble(a),
        Command::Classify(a) => commands::classify(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Correlate(a) => commands::correlate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("semshift: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
