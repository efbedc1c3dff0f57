use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{average_metrics, compute_metrics, ConfusionCounts, MetricsReport};
use crate::corpus::{stratified_folds, LabeledCorpus};
use crate::error::{Error, Result};
use crate::featurize::{
    apply_selector, build_design_matrix, fit_mi_selector, DesignMatrix, FeaturizerConfig, SparseVector,
};
use crate::learners::{fit, Algorithm, LearnerSpec};
use crate::textprep::StopList;
use crate::Exec;

/// Settings shared by every cross-validated evaluation.
#[derive(Debug, Clone)]
pub struct CvConfig {
    pub k: usize,
    /// seed of the fold assignment and of learning-curve subsampling
    pub seed: u64,
    pub featurizer: FeaturizerConfig,
    pub stops: StopList,
    pub exec: Exec,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            k: 10,
            seed: 42,
            featurizer: FeaturizerConfig::default(),
            stops: StopList::default_english(),
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub algorithm: Algorithm,
    pub spec: LearnerSpec,
    pub k: usize,
    pub folds: Vec<FoldReport>,
    /// arithmetic mean of the per-fold metrics
    pub mean: MetricsReport,
    /// metrics of the summed confusion counts
    pub pooled: MetricsReport,
}

/// `k`-fold stratified cross-validation of `spec`.
///
/// Hashing is row-local, so every review is hashed once up front; the
/// mutual-information selector and the model are then fitted on each
/// fold's training rows only.
pub fn cross_validate(corpus: &LabeledCorpus, spec: &LearnerSpec, cfg: &CvConfig) -> Result<CvReport> {
    cross_validate_observed(corpus, spec, cfg, &|_, _| {})
}

/// [`cross_validate`] that also reports, per fold, the ids of the reviews
/// whose rows are handed to selector and model fitting.
pub fn cross_validate_observed(
    corpus: &LabeledCorpus,
    spec: &LearnerSpec,
    cfg: &CvConfig,
    observer: &(dyn Fn(usize, &[&str]) + Sync),
) -> Result<CvReport> {
    spec.validate()?;
    cfg.featurizer.validate()?;
    let plan = stratified_folds(corpus, cfg.k, cfg.seed)?;
    let raw = build_design_matrix(corpus, &cfg.stops, &cfg.featurizer, None, cfg.exec)?;
    let folds = cfg.exec.map_range(cfg.k, |fold| {
        let train_rows = plan.train_rows(fold);
        let test_rows = plan.test_rows(fold);
        let ids: Vec<&str> = train_rows.iter().map(|&r| corpus.reviews()[r].id.as_str()).collect();
        observer(fold, &ids);
        let metrics = evaluate_split(&raw, &train_rows, &test_rows, spec, cfg.featurizer.mi_k)?;
        Ok(FoldReport {
            fold,
            train_size: train_rows.len(),
            test_size: test_rows.len(),
            metrics,
        })
    });
    let folds = folds.into_iter().collect::<Result<Vec<_>>>()?;
    let per_fold: Vec<MetricsReport> = folds.iter().map(|f| f.metrics.clone()).collect();
    let pooled = folds
        .iter()
        .filter_map(|f| f.metrics.counts)
        .fold(ConfusionCounts::default(), |a, c| a.merge(&c));
    Ok(CvReport {
        algorithm: spec.algorithm,
        spec: spec.clone(),
        k: cfg.k,
        folds,
        mean: average_metrics(&per_fold)?,
        pooled: compute_metrics(&pooled)?,
    })
}

fn evaluate_split(
    raw: &DesignMatrix,
    train_rows: &[usize],
    test_rows: &[usize],
    spec: &LearnerSpec,
    mi_k: Option<usize>,
) -> Result<MetricsReport> {
    let pick = |rows: &[usize]| -> (Vec<SparseVector>, Vec<_>) {
        rows.iter().map(|&r| (raw.rows()[r].clone(), raw.labels()[r])).unzip()
    };
    let (mut train_x, train_y) = pick(train_rows);
    let (mut test_x, test_y) = pick(test_rows);
    if let Some(k) = mi_k {
        let unselected = DesignMatrix::new(raw.dimension(), train_x, train_y.clone())?;
        let selector = fit_mi_selector(&unselected, k)?;
        train_x = unselected
            .rows()
            .iter()
            .map(|x| apply_selector(x, &selector))
            .collect::<Result<_>>()?;
        test_x = test_x
            .iter()
            .map(|x| apply_selector(x, &selector))
            .collect::<Result<_>>()?;
    }
    let train = DesignMatrix::new(raw.dimension(), train_x, train_y)?;
    let model = fit(spec, &train)?;
    let mut counts = ConfusionCounts::default();
    for (x, &y) in test_x.iter().zip(&test_y) {
        counts.record(model.predict_label(x)?, y);
    }
    compute_metrics(&counts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub size: usize,
    pub n_positive: usize,
    pub f1: f64,
    pub metrics: MetricsReport,
}

/// Cross-validated F1 on nested, class-proportional subsamples of size
/// `step`, `2·step`, … and finally the whole corpus.
pub fn learning_curve(
    corpus: &LabeledCorpus,
    spec: &LearnerSpec,
    cfg: &CvConfig,
    step: usize,
) -> Result<Vec<CurvePoint>> {
    if step == 0 {
        return Err(Error::InvalidArgument("curve step must be positive".into()));
    }
    let n = corpus.len();
    if n < 2 * step {
        return Err(Error::InvalidArgument(format!(
            "corpus of {n} reviews is smaller than two curve steps of {step}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut pos, mut neg): (Vec<usize>, Vec<usize>) =
        (0..n).partition(|&i| corpus.reviews()[i].label.is_some_and(|l| l.is_positive()));
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);

    let mut sizes: Vec<usize> = (1..).map(|i| i * step).take_while(|&s| s < n).collect();
    sizes.push(n);
    let mut points = Vec::with_capacity(sizes.len());
    for size in sizes {
        let share = size as f64 * pos.len() as f64 / n as f64;
        let n_pos = (share.round() as usize)
            .min(pos.len())
            .max(size.saturating_sub(neg.len()));
        let mut rows: Vec<usize> = pos[..n_pos].iter().chain(&neg[..size - n_pos]).copied().collect();
        rows.sort_unstable();
        let report = cross_validate(&corpus.subset(&rows), spec, cfg)?;
        log::info!("curve size {size}: F1 {:.3}", report.mean.f1);
        points.push(CurvePoint {
            size,
            n_positive: n_pos,
            f1: report.mean.f1,
            metrics: report.mean,
        });
    }
    Ok(points)
}

/// Candidate values per hyperparameter; cells are the cartesian product in
/// listed order (first parameter varies slowest).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GridSpec {
    pub params: Vec<(String, Vec<f64>)>,
}

impl GridSpec {
    pub fn new() -> Self {
        GridSpec::default()
    }

    pub fn with(mut self, name: &str, values: &[f64]) -> Self {
        self.params.push((name.to_string(), values.to_vec()));
        self
    }

    pub fn cells(&self) -> Vec<BTreeMap<String, f64>> {
        let mut cells = vec![BTreeMap::new()];
        for (name, values) in &self.params {
            cells = cells
                .into_iter()
                .flat_map(|c| {
                    values.iter().map(move |&v| {
                        let mut c = c.clone();
                        c.insert(name.clone(), v);
                        c
                    })
                })
                .collect();
        }
        cells
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub hyperparameters: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<CvReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub best: LearnerSpec,
    pub best_index: usize,
    pub cells: Vec<GridCell>,
}

/// Cross-validate every grid cell and return the one with the highest mean
/// F1 (earliest cell on ties). Cells whose evaluation fails are kept with
/// their error.
pub fn grid_search(
    corpus: &LabeledCorpus,
    algorithm: Algorithm,
    grid: &GridSpec,
    cfg: &CvConfig,
) -> Result<GridResult> {
    if grid.params.is_empty() || grid.params.iter().any(|(_, v)| v.is_empty()) {
        return Err(Error::InvalidArgument(
            "grid needs at least one value per parameter".into(),
        ));
    }
    for (name, _) in &grid.params {
        LearnerSpec::new(algorithm, cfg.seed).set(name, 0.0)?;
    }
    let specs: Vec<LearnerSpec> = grid
        .cells()
        .into_iter()
        .map(|cell| {
            let mut spec = LearnerSpec::new(algorithm, cfg.seed);
            for (k, v) in cell {
                spec.set(&k, v).expect("names checked above");
            }
            spec
        })
        .collect();
    let cells: Vec<GridCell> = cfg.exec.map(&specs, |spec| {
        let hyperparameters = grid.params.iter().map(|(k, _)| (k.clone(), spec.get(k))).collect();
        match cross_validate(corpus, spec, cfg) {
            Ok(report) => GridCell {
                hyperparameters,
                report: Some(report),
                error: None,
            },
            Err(e) => GridCell {
                hyperparameters,
                report: None,
                error: Some(e.to_string()),
            },
        }
    });
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in cells.iter().enumerate() {
        if let Some(r) = &c.report {
            if best.is_none_or(|(_, f)| r.mean.f1 > f) {
                best = Some((i, r.mean.f1));
            }
        }
    }
    let Some((best_index, _)) = best else {
        let first = cells.iter().find_map(|c| c.error.clone()).unwrap_or_default();
        return Err(Error::InvalidArgument(format!(
            "every grid cell failed; first error: {first}"
        )));
    };
    Ok(GridResult {
        best: specs[best_index].clone(),
        best_index,
        cells,
    })
}
