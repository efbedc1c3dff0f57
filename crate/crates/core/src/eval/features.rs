use serde::{Deserialize, Serialize};

use crate::corpus::LabeledCorpus;
use crate::error::{Error, Result};
use crate::featurize::GramIndex;
use crate::learners::TrainedModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSource {
    /// summed tree split gains
    SplitGain,
    /// mutual-information scores of the model's selector
    MutualInformation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedFeature {
    pub index: u32,
    pub score: f64,
    /// grams of the corpus hashed to this bucket, most frequent first
    pub grams: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureReport {
    pub source: FeatureSource,
    /// set when the model has no importances and MI scores were used
    pub fallback: bool,
    pub features: Vec<RankedFeature>,
}

impl FeatureReport {
    /// Most frequent gram of each ranked bucket, skipping buckets that no
    /// corpus gram maps to.
    pub fn top_grams(&self) -> Vec<&str> {
        self.features
            .iter()
            .filter_map(|f| f.grams.first().map(String::as_str))
            .collect()
    }
}

/// Top `top_n` features of a model trained with a feature pipeline, mapped
/// back to the corpus grams that hash to them.
pub fn report_influential_features(
    corpus: &LabeledCorpus,
    model: &TrainedModel,
    top_n: usize,
) -> Result<FeatureReport> {
    if corpus.is_empty() {
        return Err(Error::Empty("corpus"));
    }
    let pipeline = model
        .pipeline
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("model carries no feature pipeline".into()))?;
    let (source, fallback, mut ranked) = match model.feature_importances() {
        Some(imp) if !imp.is_empty() => (FeatureSource::SplitGain, false, imp),
        _ => {
            let selector = pipeline.selector.as_ref().ok_or_else(|| {
                Error::InvalidArgument("model has neither importances nor a mutual-information selector".into())
            })?;
            (FeatureSource::MutualInformation, true, selector.ranked().to_vec())
        }
    };
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(top_n);
    let index = GramIndex::build(corpus, &pipeline.stops, &pipeline.config)?;
    let features = ranked
        .into_iter()
        .map(|(i, score)| RankedFeature {
            index: i,
            score,
            grams: index.grams(i).into_iter().map(|(g, _)| g).collect(),
        })
        .collect();
    Ok(FeatureReport {
        source,
        fallback,
        features,
    })
}
