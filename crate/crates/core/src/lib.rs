//! Accessibility app-review classification.
//!
//! The crate covers the whole experimental pipeline: loading and balancing a
//! labeled review corpus, text cleanup, hashed unigram/bigram features with
//! mutual-information selection, seven trainable binary classifiers, the
//! keyword and random baselines, and the evaluation harness (metrics,
//! stratified cross-validation, learning curves, grid search, agreement).
//!
//! Data-parallel loops (row featurization, folds, grid cells, curve points)
//! go through [`Exec`]. With the default `parallel` feature they run on
//! rayon; without it every mode runs sequentially.

pub mod baselines;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod featurize;
pub mod learners;
mod par;
pub mod synthetic;
pub mod textprep;

pub use corpus::{FoldPlan, Label, LabeledCorpus, Review};
pub use error::{Error, Result};
pub use featurize::{DesignMatrix, FeaturePipeline, FeaturizerConfig, SelectorModel, SparseVector};
pub use learners::{Algorithm, LearnerSpec, TrainedModel};
pub use par::Exec;
