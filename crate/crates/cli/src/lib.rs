//! The `ner` command-line tool.
//!
//! Every subcommand reads its inputs from files, writes its report to the
//! given writer, and derives all randomness from `--seed`. Settings resolve
//! in the order flag, then `--config` file, then built-in default.

mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use thiserror::Error;

pub use config::RunConfig;

/// Failure categories; each maps to its own exit status.
#[derive(Debug, Error, PartialEq)]
pub enum CliError {
    /// Bad flags or configuration.
    #[error("{0}")]
    Usage(String),
    /// Missing, unreadable or malformed input.
    #[error("{0}")]
    Data(String),
    /// Training or inference produced non-finite values.
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// Aligned plain-text tables.
    Table,
    /// Versioned newline-delimited JSON.
    Structured,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelType {
    Crf,
    Svm,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Per-tag token counts.
    #[default]
    Token,
    /// Exact entity spans.
    Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Digits {
    /// U+0660..U+0669
    ArabicIndic,
    /// U+06F0..U+06F9
    Extended,
}

#[derive(Debug, Parser)]
#[command(name = "ner", version, about = "Named-entity recognition for CoNLL/BIO corpora")]
pub struct Cli {
    /// TOML file with default settings; flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Args)]
pub struct Hyper {
    /// CRF L1 penalty.
    #[arg(long)]
    pub l1: Option<f64>,
    /// CRF L2 penalty.
    #[arg(long)]
    pub l2: Option<f64>,
    /// CRF iteration cap.
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// SVM regularization.
    #[arg(long)]
    pub c: Option<f64>,
    /// Feature context window on each side.
    #[arg(long)]
    pub window: Option<usize>,
}

#[derive(Debug, Default, Args)]
pub struct Decode {
    /// Mask IOB2-illegal transitions during CRF decoding.
    #[arg(long)]
    pub constrain_bio: bool,
    /// Rewrite illegal I- tags to B- in SVM output.
    #[arg(long)]
    pub repair_bio: bool,
}

#[derive(Debug, Default, Args)]
pub struct Scoring {
    /// Count the O tag in aggregate scores.
    #[arg(long)]
    pub include_o: bool,
    #[arg(long, value_enum, default_value = "token")]
    pub mode: Mode,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clean and tokenize raw text into a CoNLL skeleton tagged O.
    Preprocess {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Emit one tokenized sentence per line instead of CoNLL.
        #[arg(long)]
        sentences: bool,
        #[arg(long, value_enum, default_value = "arabic-indic")]
        digits: Digits,
        /// Keep Latin letters.
        #[arg(long)]
        keep_latin: bool,
    },
    /// Entity type distribution of a corpus.
    Stats { corpus: PathBuf },
    /// Check IOB2 legality, optionally writing a repaired copy.
    Validate {
        corpus: PathBuf,
        #[arg(long)]
        repair: bool,
        /// Where to write the repaired corpus (default: standard output).
        #[arg(long, requires = "repair")]
        output: Option<PathBuf>,
        /// Also flag sentences that do not end in ". O".
        #[arg(long)]
        lint: bool,
    },
    /// Write a seeded holdout split or k folds.
    Split {
        corpus: PathBuf,
        /// Training fraction.
        #[arg(long, conflicts_with = "k")]
        split: Option<f64>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Train a model on a corpus and save it.
    Train {
        #[arg(long, value_enum, default_value = "crf")]
        model: ModelType,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        model_file: PathBuf,
        #[command(flatten)]
        hyper: Hyper,
    },
    /// Tag a corpus with a saved model and print CoNLL.
    Predict {
        #[arg(long)]
        model_file: PathBuf,
        /// CoNLL file whose tags are ignored.
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        decode: Decode,
    },
    /// Score predictions (or a saved model) against a gold corpus.
    Evaluate {
        #[arg(long)]
        test: PathBuf,
        /// Predicted CoNLL file.
        #[arg(long, required_unless_present = "model_file", conflicts_with = "model_file")]
        pred: Option<PathBuf>,
        #[arg(long)]
        model_file: Option<PathBuf>,
        #[command(flatten)]
        decode: Decode,
        #[command(flatten)]
        scoring: Scoring,
    },
    /// Train on a seeded holdout split and evaluate on the rest.
    Holdout {
        #[arg(long, value_enum, default_value = "crf")]
        model: ModelType,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        split: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        hyper: Hyper,
        #[command(flatten)]
        decode: Decode,
        #[command(flatten)]
        scoring: Scoring,
    },
    /// K-fold cross-validation of one model.
    Crossval {
        #[arg(long, value_enum, default_value = "crf")]
        model: ModelType,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        hyper: Hyper,
        #[command(flatten)]
        decode: Decode,
        #[command(flatten)]
        scoring: Scoring,
    },
    /// Cross-validate CRF and SVM on the same folds and run a paired t-test.
    Compare {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        hyper: Hyper,
        #[command(flatten)]
        decode: Decode,
        #[command(flatten)]
        scoring: Scoring,
    },
    /// Cohen's kappa between two annotations of the same tokens.
    Iaa { first: PathBuf, second: PathBuf },
    /// Dump the features extracted for a sentence.
    Features {
        /// Whitespace-separated tokens.
        #[arg(long)]
        text: String,
        /// Only this 0-based position.
        #[arg(long)]
        position: Option<usize>,
        #[arg(long)]
        window: Option<usize>,
    },
}

/// Parses `args` (program name first) and runs the command, writing the
/// report to `out`.
pub fn run<I, S>(args: I, out: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    use clap::error::ErrorKind;
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli, out),
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            write!(out, "{e}").map_err(|e| CliError::Data(e.to_string()))
        }
        Err(e) => Err(CliError::Usage(e.to_string())),
    }
}

/// Runs an already parsed command line.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(f) = cli.format {
        config.format = f;
    }
    commands::dispatch(cli.command, &config, out)
}
