//! The seven supervised learners behind one [`fit`] / [`TrainedModel`]
//! interface, plus the versioned model file.
//!
//! | algorithm | procedure |
//! |-----------|-----------|
//! | `logreg` | L1+L2 penalized logistic loss, OWL-QN (L-BFGS with orthant projection) |
//! | `decision_forest` | bagged presence-split trees, Gini over random candidate splits, vote fraction |
//! | `boosted_trees` | leaf-wise gradient boosting on logistic loss, Newton leaf values with shrinkage |
//! | `neural_net` | one sigmoid hidden layer, per-example SGD on cross-entropy |
//! | `linear_svm` | Pegasos stochastic subgradient on the hinge loss |
//! | `avg_perceptron` | perceptron with averaged weights |
//! | `bayes_point` | average of unit-normalized perceptrons trained on shuffled orders |
//!
//! Linear margins and boosted scores map to `[0, 1]` through the logistic
//! function; the forest score is the fraction of trees voting positive.

mod boosting;
mod forest;
mod linear;
mod network;
mod trainset;
mod tree;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::featurize::{DesignMatrix, FeaturePipeline, SparseVector};

pub use boosting::{BoostedTrees, BoostingTrace};
pub use forest::DecisionForest;
pub use linear::{LinearModel, LogisticObjective};
pub use network::Network;
pub use tree::{Node, Tree};

pub const MODEL_FORMAT_VERSION: u32 = 1;
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Logreg,
    DecisionForest,
    BoostedTrees,
    NeuralNet,
    LinearSvm,
    AvgPerceptron,
    BayesPoint,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::Logreg,
        Algorithm::DecisionForest,
        Algorithm::BoostedTrees,
        Algorithm::NeuralNet,
        Algorithm::LinearSvm,
        Algorithm::AvgPerceptron,
        Algorithm::BayesPoint,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Logreg => "logreg",
            Algorithm::DecisionForest => "decision_forest",
            Algorithm::BoostedTrees => "boosted_trees",
            Algorithm::NeuralNet => "neural_net",
            Algorithm::LinearSvm => "linear_svm",
            Algorithm::AvgPerceptron => "avg_perceptron",
            Algorithm::BayesPoint => "bayes_point",
        }
    }

    /// Whether the learner produces a single linear decision function.
    pub fn is_linear(self) -> bool {
        matches!(
            self,
            Algorithm::Logreg | Algorithm::LinearSvm | Algorithm::AvgPerceptron | Algorithm::BayesPoint
        )
    }

    /// Default hyperparameters.
    ///
    /// For `decision_forest`, `n_samples_leaf` is the number of random
    /// candidate splits per node and `min_samples_split` the minimum number
    /// of samples per leaf.
    pub fn defaults(self) -> &'static [(&'static str, f64)] {
        match self {
            Algorithm::Logreg => &[
                ("optimiz_tol", 1e-7),
                ("L1_weight", 1.0),
                ("L2_weight", 1.0),
                ("memory_L_BFGS", 20.0),
            ],
            Algorithm::DecisionForest => &[
                ("n_estimators", 8.0),
                ("max_depth", 32.0),
                ("n_samples_leaf", 128.0),
                ("min_samples_split", 1.0),
            ],
            Algorithm::BoostedTrees => &[
                ("max_n_leaf", 20.0),
                ("min_samples_leaf", 10.0),
                ("learning_rate", 0.2),
                ("n_tree", 100.0),
            ],
            Algorithm::NeuralNet => &[
                ("n_nodes", 100.0),
                ("learning_rate", 0.1),
                ("n_learning_rate", 100.0),
                ("learning_rate_weights", 0.1),
                ("momentum", 0.0),
            ],
            Algorithm::LinearSvm => &[("n_iter", 1.0), ("Lambda", 0.001)],
            Algorithm::AvgPerceptron => &[("learning_rate", 1.0), ("m_iter", 10.0)],
            Algorithm::BayesPoint => &[("n_training_iter", 30.0)],
        }
    }

    fn check(self, name: &str, value: f64) -> std::result::Result<(), String> {
        if !value.is_finite() {
            return Err("must be finite".into());
        }
        let positive_int = || {
            if value >= 1.0 && value.fract() == 0.0 {
                Ok(())
            } else {
                Err("must be a positive integer".to_string())
            }
        };
        let positive = || {
            if value > 0.0 {
                Ok(())
            } else {
                Err("must be > 0".to_string())
            }
        };
        let non_negative = || {
            if value >= 0.0 {
                Ok(())
            } else {
                Err("must be >= 0".to_string())
            }
        };
        match (self, name) {
            (Algorithm::Logreg, "optimiz_tol") => positive(),
            (Algorithm::Logreg, "L1_weight" | "L2_weight") => non_negative(),
            (Algorithm::Logreg, _) => positive_int(),
            (Algorithm::DecisionForest, _) => positive_int(),
            (Algorithm::BoostedTrees, "learning_rate") => positive(),
            (Algorithm::BoostedTrees, "max_n_leaf") => {
                if value >= 2.0 && value.fract() == 0.0 {
                    Ok(())
                } else {
                    Err("must be an integer >= 2".into())
                }
            }
            (Algorithm::BoostedTrees, _) => positive_int(),
            (Algorithm::NeuralNet, "learning_rate" | "learning_rate_weights") => positive(),
            (Algorithm::NeuralNet, "momentum") => {
                if (0.0..1.0).contains(&value) {
                    Ok(())
                } else {
                    Err("must be in [0, 1)".into())
                }
            }
            (Algorithm::NeuralNet, _) => positive_int(),
            (Algorithm::LinearSvm, "Lambda") => positive(),
            (Algorithm::LinearSvm, _) => positive_int(),
            (Algorithm::AvgPerceptron, "learning_rate") => positive(),
            (Algorithm::AvgPerceptron, _) => positive_int(),
            (Algorithm::BayesPoint, _) => positive_int(),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "unknown algorithm `{s}` (expected one of {})",
                Algorithm::ALL.map(Algorithm::name).join(", ")
            ))
        })
    }
}

/// Algorithm, complete hyperparameters and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerSpec {
    pub algorithm: Algorithm,
    pub hyperparameters: BTreeMap<String, f64>,
    pub seed: u64,
}

impl LearnerSpec {
    /// Spec with every hyperparameter at its default.
    pub fn new(algorithm: Algorithm, seed: u64) -> Self {
        LearnerSpec {
            algorithm,
            hyperparameters: algorithm.defaults().iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            seed,
        }
    }

    /// Override one hyperparameter. The name must belong to the algorithm;
    /// the value is validated by [`LearnerSpec::validate`].
    pub fn set(&mut self, name: &str, value: f64) -> Result<&mut Self> {
        if !self.algorithm.defaults().iter().any(|(k, _)| *k == name) {
            return Err(self.hp_error(name, "unknown hyperparameter"));
        }
        self.hyperparameters.insert(name.to_string(), value);
        Ok(self)
    }

    pub fn with(mut self, name: &str, value: f64) -> Result<Self> {
        self.set(name, value)?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, _) in self.algorithm.defaults() {
            if !self.hyperparameters.contains_key(*name) {
                return Err(self.hp_error(name, "missing"));
            }
        }
        for (name, &value) in &self.hyperparameters {
            if !self.algorithm.defaults().iter().any(|(k, _)| k == name) {
                return Err(self.hp_error(name, "unknown hyperparameter"));
            }
            self.algorithm
                .check(name, value)
                .map_err(|reason| self.hp_error(name, &reason))?;
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> f64 {
        self.hyperparameters[name]
    }

    pub(crate) fn get_usize(&self, name: &str) -> usize {
        self.get(name) as usize
    }

    fn hp_error(&self, name: &str, reason: &str) -> Error {
        Error::Hyperparameter {
            algorithm: self.algorithm.name(),
            name: name.to_string(),
            reason: reason.to_string(),
        }
    }
}

/// Fitted parameters of one of the learners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelParams {
    Linear(LinearModel),
    Forest(DecisionForest),
    Boosted(BoostedTrees),
    Network(Network),
}

/// A fitted, serializable binary classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub algorithm: Algorithm,
    pub dimension: usize,
    pub threshold: f64,
    pub spec: LearnerSpec,
    pub parameters: ModelParams,
    /// Text-to-vector pipeline the model was trained with, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pipeline: Option<FeaturePipeline>,
}

/// Train `spec` on `data`.
pub fn fit(spec: &LearnerSpec, data: &DesignMatrix) -> Result<TrainedModel> {
    spec.validate()?;
    let set = trainset::TrainSet::from_matrix(data)?;
    let parameters = match spec.algorithm {
        Algorithm::Logreg => ModelParams::Linear(linear::fit_logreg(spec, &set)),
        Algorithm::LinearSvm => ModelParams::Linear(linear::fit_pegasos(spec, &set)),
        Algorithm::AvgPerceptron => ModelParams::Linear(linear::fit_avg_perceptron(spec, &set)),
        Algorithm::BayesPoint => ModelParams::Linear(linear::fit_bayes_point(spec, &set)),
        Algorithm::DecisionForest => ModelParams::Forest(forest::fit(spec, &set)),
        Algorithm::BoostedTrees => ModelParams::Boosted(boosting::fit(spec, &set).0),
        Algorithm::NeuralNet => ModelParams::Network(network::fit(spec, &set)),
    };
    Ok(TrainedModel {
        format_version: MODEL_FORMAT_VERSION,
        algorithm: spec.algorithm,
        dimension: data.dimension(),
        threshold: DEFAULT_THRESHOLD,
        spec: spec.clone(),
        parameters,
        pipeline: None,
    })
}

/// Train boosted trees and also return the per-stage training loss.
pub fn fit_boosted_traced(spec: &LearnerSpec, data: &DesignMatrix) -> Result<(TrainedModel, BoostingTrace)> {
    if spec.algorithm != Algorithm::BoostedTrees {
        return Err(Error::InvalidArgument("traced fit needs a boosted_trees spec".into()));
    }
    spec.validate()?;
    let set = trainset::TrainSet::from_matrix(data)?;
    let (model, trace) = boosting::fit(spec, &set);
    Ok((
        TrainedModel {
            format_version: MODEL_FORMAT_VERSION,
            algorithm: spec.algorithm,
            dimension: data.dimension(),
            threshold: DEFAULT_THRESHOLD,
            spec: spec.clone(),
            parameters: ModelParams::Boosted(model),
            pipeline: None,
        },
        trace,
    ))
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl TrainedModel {
    pub fn with_pipeline(mut self, pipeline: FeaturePipeline) -> Self {
        self.pipeline = Some(pipeline);
        self
    }

    fn check_dimension(&self, vector: &SparseVector) -> Result<()> {
        if vector.dimension() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                actual: vector.dimension(),
            });
        }
        Ok(())
    }

    /// Raw decision value: linear margin, boosted log-odds, network
    /// pre-activation or centered vote fraction.
    pub fn decision_value(&self, vector: &SparseVector) -> Result<f64> {
        self.check_dimension(vector)?;
        Ok(match &self.parameters {
            ModelParams::Linear(m) => m.margin(vector),
            ModelParams::Boosted(m) => m.raw_score(vector),
            ModelParams::Network(m) => m.output_logit(vector),
            ModelParams::Forest(m) => m.vote_fraction(vector) - 0.5,
        })
    }

    /// Probability-like score in `[0, 1]`.
    pub fn predict_score(&self, vector: &SparseVector) -> Result<f64> {
        self.check_dimension(vector)?;
        Ok(match &self.parameters {
            ModelParams::Forest(m) => m.vote_fraction(vector),
            _ => sigmoid(self.decision_value(vector)?),
        })
    }

    /// `accessibility` iff the score is at least the threshold.
    pub fn predict_label(&self, vector: &SparseVector) -> Result<Label> {
        Ok(self.label_for_score(self.predict_score(vector)?))
    }

    pub fn label_for_score(&self, score: f64) -> Label {
        Label::from_positive(score >= self.threshold)
    }

    /// Per-feature importance (sum of split gains) for tree ensembles.
    pub fn feature_importances(&self) -> Option<Vec<(u32, f64)>> {
        match &self.parameters {
            ModelParams::Boosted(m) => Some(m.importances().to_vec()),
            ModelParams::Forest(m) => Some(m.importances()),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::CorruptModel(e.to_string()))?;
        let version = value
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::CorruptModel("missing format_version".into()))?;
        if version != MODEL_FORMAT_VERSION as u64 {
            return Err(Error::UnsupportedVersion {
                found: version as u32,
                supported: MODEL_FORMAT_VERSION,
            });
        }
        let model: TrainedModel = serde_json::from_value(value).map_err(|e| Error::CorruptModel(e.to_string()))?;
        if !(model.threshold > 0.0 && model.threshold < 1.0) {
            return Err(Error::CorruptModel(format!(
                "threshold {} outside (0, 1)",
                model.threshold
            )));
        }
        if model.algorithm != model.spec.algorithm {
            return Err(Error::CorruptModel("algorithm does not match spec".into()));
        }
        if let Some(p) = &model.pipeline {
            if p.dimension() != model.dimension {
                return Err(Error::CorruptModel("pipeline dimension does not match model".into()));
            }
        }
        Ok(model)
    }
}

pub fn save_model(model: &TrainedModel, path: &Path) -> Result<()> {
    fs::write(path, model.to_json()?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<TrainedModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    TrainedModel::from_json(&text)
}
