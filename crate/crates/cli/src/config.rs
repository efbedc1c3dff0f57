use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use a11yrev_core::corpus::CorpusFormat;
use a11yrev_core::{Algorithm, FeaturizerConfig, LearnerSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Environment variable naming the config file when `--config` is absent.
pub const CONFIG_ENV: &str = "A11YREV_CONFIG";

/// Contents of the flat TOML config file. Every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub corpus: Option<PathBuf>,
    pub format: Option<String>,
    pub stopwords: Option<PathBuf>,
    pub keywords: Option<PathBuf>,
    pub bits: Option<u32>,
    pub signed: Option<bool>,
    pub max_n: Option<usize>,
    /// 0 disables selection
    pub mi_k: Option<usize>,
    pub algorithm: Option<String>,
    pub seed: Option<u64>,
    pub folds: Option<usize>,
    pub step: Option<usize>,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub hyperparameters: BTreeMap<String, f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::usage(format!("invalid config {}: {e}", path.display())))
    }
}

/// Command-line values that override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub corpus: Option<PathBuf>,
    pub format: Option<String>,
    pub stopwords: Option<PathBuf>,
    pub keywords: Option<PathBuf>,
    pub bits: Option<u32>,
    pub signed: Option<bool>,
    pub max_n: Option<usize>,
    pub mi_k: Option<usize>,
    pub algorithm: Option<String>,
    pub seed: Option<u64>,
    pub folds: Option<usize>,
    pub step: Option<usize>,
    pub output: Option<PathBuf>,
    pub hyperparameters: Vec<(String, f64)>,
}

/// Fully resolved settings; embedded verbatim in every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub corpus: Option<PathBuf>,
    pub format: Option<CorpusFormat>,
    pub stopwords: Option<PathBuf>,
    pub keywords: Option<PathBuf>,
    pub featurizer: FeaturizerConfig,
    pub algorithm: Algorithm,
    pub hyperparameters: BTreeMap<String, f64>,
    pub seed: u64,
    pub folds: usize,
    pub step: usize,
    pub output: Option<PathBuf>,
}

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_FOLDS: usize = 10;
pub const DEFAULT_STEP: usize = 100;

impl ExperimentConfig {
    /// flag > file > default
    pub fn resolve(file: FileConfig, flags: Overrides) -> Result<Self, CliError> {
        let defaults = FeaturizerConfig::default();
        let mi_k = flags.mi_k.or(file.mi_k);
        let featurizer = FeaturizerConfig {
            bits: flags.bits.or(file.bits).unwrap_or(defaults.bits),
            signed: flags.signed.or(file.signed).unwrap_or(defaults.signed),
            max_n: flags.max_n.or(file.max_n).unwrap_or(defaults.max_n),
            mi_k: match mi_k {
                Some(0) => None,
                Some(k) => Some(k),
                None => defaults.mi_k,
            },
        };
        featurizer.validate().map_err(|e| CliError::usage(e.to_string()))?;
        let algorithm: Algorithm = match flags.algorithm.or(file.algorithm) {
            Some(name) => name
                .parse()
                .map_err(|e: a11yrev_core::Error| CliError::usage(e.to_string()))?,
            None => Algorithm::BoostedTrees,
        };
        let format = match flags.format.or(file.format) {
            Some(f) => Some(f.parse::<CorpusFormat>().map_err(CliError::usage)?),
            None => None,
        };
        let mut hyperparameters = file.hyperparameters;
        hyperparameters.extend(flags.hyperparameters);
        let cfg = ExperimentConfig {
            corpus: flags.corpus.or(file.corpus),
            format,
            stopwords: flags.stopwords.or(file.stopwords),
            keywords: flags.keywords.or(file.keywords),
            featurizer,
            algorithm,
            hyperparameters,
            seed: flags.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            folds: flags.folds.or(file.folds).unwrap_or(DEFAULT_FOLDS),
            step: flags.step.or(file.step).unwrap_or(DEFAULT_STEP),
            output: flags.output.or(file.output),
        };
        if cfg.folds < 2 {
            return Err(CliError::usage("folds must be at least 2"));
        }
        if cfg.step == 0 {
            return Err(CliError::usage("step must be positive"));
        }
        cfg.learner_spec(cfg.algorithm)?;
        Ok(cfg)
    }

    /// Spec for `algorithm` with the configured overrides that apply to it.
    ///
    /// When a single algorithm is configured every override must be valid
    /// for it; for other algorithms (as in `crossval --all`) unknown names
    /// are skipped.
    pub fn learner_spec(&self, algorithm: Algorithm) -> Result<LearnerSpec, CliError> {
        let mut spec = LearnerSpec::new(algorithm, self.seed);
        for (name, &value) in &self.hyperparameters {
            let known = algorithm.defaults().iter().any(|(k, _)| k == name);
            if known || algorithm == self.algorithm {
                spec.set(name, value).map_err(|e| CliError::usage(e.to_string()))?;
            }
        }
        spec.validate().map_err(|e| CliError::usage(e.to_string()))?;
        Ok(spec)
    }

    pub fn corpus_path(&self) -> Result<&Path, CliError> {
        self.corpus
            .as_deref()
            .ok_or_else(|| CliError::usage("no corpus given (use --corpus or `corpus` in the config file)"))
    }

    pub fn corpus_format(&self) -> Result<CorpusFormat, CliError> {
        Ok(match self.format {
            Some(f) => f,
            None => CorpusFormat::from_path(self.corpus_path()?),
        })
    }
}

/// Parse a `name=value` hyperparameter flag.
pub fn parse_hp(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| format!("hyperparameter `{name}` needs a number, got `{value}`"))?;
    Ok((name.trim().to_string(), value))
}
