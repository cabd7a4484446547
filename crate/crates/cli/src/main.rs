//! `yidtag`: the Yiddish POS-tagging pipeline as subcommands.
//!
//! Exit status is 0 on success, 1 when input data is invalid and 2 when
//! the invocation or configuration is.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Config, Failure};

#[derive(Parser, Debug)]
#[command(name = "yidtag", version, about = "Yiddish corpus preparation, embeddings and POS tagging")]
pub struct Cli {
    /// Flat `key = value` settings file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Character inventory TSV (name, unicode, ascii, class, final, reductions).
    #[arg(long, global = true)]
    inventory: Option<PathBuf>,
    /// Directory with phonetic_rules.tsv, lexicon.tsv, overrides.tsv, respell.tsv, hardcoded.tsv.
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    /// Tagset registry TSV (tag, count).
    #[arg(long, global = true)]
    tagset: Option<PathBuf>,
    /// Punctuation TSV (mark, terminator|punctuation).
    #[arg(long, global = true)]
    punctuation: Option<PathBuf>,
    /// OCR confusion pairs, two TAB-separated letter names per line.
    #[arg(long, global = true)]
    confusion: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for per-document and per-fold work.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Log more to stderr; repeat for more detail.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

/// Input and output for line-oriented commands; `-` or nothing means
/// stdin or stdout.
#[derive(Args, Debug)]
pub struct LineIo {
    input: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// sgd or adamw.
    #[arg(long)]
    optimizer: Option<String>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Fraction of steps spent warming up the learning rate.
    #[arg(long)]
    warmup: Option<f64>,
    #[arg(long)]
    weight_decay: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// NFC-normalize Unicode text line by line.
    Normalize(LineIo),
    /// Unicode Yiddish to the ASCII notation, line by line.
    ToAscii(LineIo),
    /// ASCII notation back to Unicode, line by line.
    ToUnicode(LineIo),
    /// Split ASCII-notation lines into space-separated tokens.
    Tokenize(LineIo),
    /// Read corpus files (`p<page>.l<line>` TAB text) and write one sentence per line.
    Segment {
        /// Corpus files or directories of them.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Drop unconvertible lines instead of failing.
        #[arg(long)]
        lossy: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Token frequencies (token TAB count) of sentence files.
    Freq {
        inputs: Vec<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Quality report over corpus files.
    Qa {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        lossy: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Romanized words to script, one line of words at a time.
    Convert {
        #[command(flatten)]
        io: LineIo,
        /// Tag applied to every word, enabling overrides and respellings.
        #[arg(long)]
        pos: Option<String>,
        /// Write word TAB script TAB route lines instead of converted text.
        #[arg(long)]
        routes: bool,
    },
    /// Bracketed treebank files to word TAB tag TAB route sentences.
    PrepTreebank {
        /// Treebank files or directories of them.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Skip trees that fail instead of stopping.
        #[arg(long)]
        lenient: bool,
        /// Write counts (trees, leaves, tokens, routes) here.
        #[arg(long)]
        stats: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Train GloVe vectors on a sentence file.
    TrainEmbed {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        min_count: Option<u64>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        x_max: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        learning_rate: Option<f64>,
        /// Write the per-iteration loss here.
        #[arg(long)]
        loss: Option<PathBuf>,
    },
    /// Nearest neighbors by cosine; queries from arguments or stdin.
    Neighbors {
        #[arg(long)]
        embeddings: PathBuf,
        /// Frequency table from `freq`, for the count column.
        #[arg(long)]
        freq: Option<PathBuf>,
        #[arg(short)]
        k: Option<usize>,
        queries: Vec<String>,
    },
    /// Spelling-variant and OCR-error candidates among close neighbors.
    Variants {
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long)]
        freq: PathBuf,
        #[arg(long)]
        min_cosine: Option<f64>,
        #[arg(long)]
        max_edit: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Train one tagger on a tagged file (word TAB tag, blank line between sentences).
    TrainTagger {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        val: Option<PathBuf>,
        /// Static embedding table (text format with a `count dim` header).
        #[arg(long, group = "source")]
        embeddings: Option<PathBuf>,
        /// Per-token vectors aligned with the training file.
        #[arg(long, group = "source")]
        token_vectors: Option<PathBuf>,
        /// Per-token vectors aligned with the validation file.
        #[arg(long)]
        val_token_vectors: Option<PathBuf>,
        /// Learn a lookup table of this width.
        #[arg(long, group = "source")]
        lookup_dim: Option<usize>,
        /// Initial rows for the lookup table.
        #[arg(long)]
        init: Option<PathBuf>,
        /// Standardize each dimension of the static table.
        #[arg(long)]
        standardize: bool,
        /// BiLSTM hidden size per direction.
        #[arg(long)]
        hidden: Option<usize>,
        #[command(flatten)]
        training: TrainArgs,
        #[arg(short, long)]
        output: PathBuf,
        /// Write the epoch log here.
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// Tag a sentence file (one sentence of tokens per line).
    Tag {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        io: LineIo,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long)]
        token_vectors: Option<PathBuf>,
    },
    /// Fold plan (index TAB source TAB bucket) for a tagged file.
    MakeFolds {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Cross-validated experiment from a manifest; reports go to the output directory.
    Evaluate {
        manifest: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Smith-Waterman alignment of converted tokens against source tokens.
    Align {
        converted: PathBuf,
        source: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("yidtag: {f}");
            ExitCode::from(match f {
                Failure::Usage(_) => 2,
                Failure::Data(_) => 1,
            })
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let jobs = config.pick(cli.jobs, "jobs", 1)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build_global()
        .map_err(|e| config::usage(format!("cannot start {jobs} workers: {e}")))?;
    let env = commands::Env::new(&cli, config)?;
    commands::dispatch(&env, cli.command)
}
