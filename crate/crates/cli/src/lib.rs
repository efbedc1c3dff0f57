//! Command-line runner and HTTP scorer for accessibility review
//! classification.

pub mod commands;
pub mod config;
pub mod server;

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::run;

/// Failure with its process exit code: 1 for experiment failures, 2 for
/// usage, configuration and input errors.
#[derive(Debug)]
pub struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    pub fn failure(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }

    pub fn code(&self) -> i32 {
        self.code
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<a11yrev_core::Error> for CliError {
    fn from(e: a11yrev_core::Error) -> Self {
        CliError::failure(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "a11yrev",
    version,
    about = "Classify app reviews as accessibility-related or not"
)]
pub struct Cli {
    /// TOML config file
    #[arg(long, global = true, env = config::CONFIG_ENV)]
    pub config: Option<PathBuf>,

    /// Run every loop on one thread
    #[arg(long, global = true)]
    pub sequential: bool,

    /// Log progress (repeat for more detail)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// 10-fold cross-validation of one or all learners
    Crossval {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Evaluate all seven learners
        #[arg(long)]
        all: bool,
    },
    /// F1 as a function of training-set size
    Curve {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Increment between curve points
        #[arg(long)]
        step: Option<usize>,
        /// CSV output (defaults to the report path with a .csv extension)
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Keyword or random baseline, optionally compared with a crossval report
    Baseline {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, value_enum)]
        which: BaselineKind,
        /// Keyword list, one phrase per line
        #[arg(long)]
        keywords: Option<PathBuf>,
        /// Positive count for the random baseline (default: from the corpus)
        #[arg(long, requires = "n_total")]
        n_pos: Option<u64>,
        /// Population size for the random baseline
        #[arg(long, requires = "n_pos")]
        n_total: Option<u64>,
        /// Crossval report to compare against
        #[arg(long)]
        compare: Option<PathBuf>,
        /// Learner row of the compared report (default: boosted_trees)
        #[arg(long)]
        compare_algorithm: Option<String>,
    },
    /// Fit one learner on the whole corpus and save it
    Train {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long)]
        model: PathBuf,
    },
    /// Score reviews with a saved model (JSONL output)
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// Reviews as CSV or JSONL with at least `id` and `text`
        #[arg(long)]
        input: PathBuf,
        /// Output file (default: stdout)
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Serve a saved model over HTTP
    Serve {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
        /// Maximum request body in bytes
        #[arg(long, default_value_t = server::DEFAULT_BODY_LIMIT)]
        max_body: usize,
    },
    /// Most influential grams of a saved model
    Features {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 20)]
        top: usize,
    },
    /// Write the synthetic corpus and its planted keyword list
    Synth {
        #[arg(long, default_value_t = 500)]
        n_per_class: usize,
        #[arg(long, default_value_t = config::DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        keywords_out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaselineKind {
    Keyword,
    Random,
}

/// Experiment settings that override the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct ExperimentArgs {
    /// Labeled corpus (CSV or JSONL)
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Corpus format: csv or jsonl (default: from the extension)
    #[arg(long)]
    pub format: Option<String>,
    /// Stop-word list replacing the built-in one
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Hash bits (8..=24)
    #[arg(long)]
    pub bits: Option<u32>,
    /// Use the sign hash
    #[arg(long)]
    pub signed: Option<bool>,
    /// Largest n-gram order
    #[arg(long)]
    pub max_n: Option<usize>,
    /// Features kept by mutual information (0 keeps all)
    #[arg(long)]
    pub mi_k: Option<usize>,
    #[arg(long)]
    pub algorithm: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub folds: Option<usize>,
    /// Hyperparameter override, e.g. `--hp n_tree=50`
    #[arg(long = "hp", value_parser = config::parse_hp)]
    pub hyperparameters: Vec<(String, f64)>,
    /// Report path
    #[arg(long)]
    pub output: Option<PathBuf>,
}
