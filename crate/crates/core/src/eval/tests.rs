use std::sync::Mutex;

use proptest::prelude::*;

use super::*;
use crate::corpus::{Label, LabeledCorpus, Review};
use crate::featurize::{FeaturePipeline, FeaturizerConfig};
use crate::learners::{fit, Algorithm, LearnerSpec};
use crate::synthetic;
use crate::textprep::StopList;
use crate::Exec;

const P: Label = Label::Accessibility;
const O: Label = Label::Other;

fn small_cfg() -> CvConfig {
    CvConfig {
        k: 5,
        seed: 3,
        featurizer: FeaturizerConfig {
            bits: 14,
            mi_k: Some(500),
            ..FeaturizerConfig::default()
        },
        stops: StopList::default_english(),
        exec: Exec::default(),
    }
}

#[test]
fn confusion_examples() {
    let c = confusion_counts(&[P, P, P], &[P, P, P]).unwrap();
    assert_eq!(
        c,
        ConfusionCounts {
            tp: 3,
            ..Default::default()
        }
    );
    let actual = [P, O, P, O];
    let flipped: Vec<Label> = actual.iter().map(|l| l.flipped()).collect();
    let c = confusion_counts(&flipped, &actual).unwrap();
    assert_eq!((c.tp, c.tn, c.fp, c.fn_), (0, 0, 2, 2));
    // hand tally
    let predicted = [P, P, O, O, P, O, P, O, O, P];
    let actual = [P, O, O, P, P, O, P, P, O, O];
    let c = confusion_counts(&predicted, &actual).unwrap();
    assert_eq!(
        c,
        ConfusionCounts {
            tp: 3,
            tn: 3,
            fp: 2,
            fn_: 2
        }
    );
    assert!(confusion_counts(&[P], &[P, O]).is_err());
    assert!(confusion_counts(&[], &[]).is_err());
}

#[test]
fn metric_examples() {
    let m = compute_metrics(&ConfusionCounts {
        tp: 3,
        fp: 1,
        fn_: 2,
        tn: 4,
    })
    .unwrap();
    assert_eq!((m.precision, m.recall, m.accuracy), (0.75, 0.6, 0.7));
    assert!((m.f1 - 2.0 / 3.0).abs() < 1e-15);
    let m = compute_metrics(&ConfusionCounts {
        tp: 5,
        tn: 5,
        ..Default::default()
    })
    .unwrap();
    assert_eq!((m.precision, m.recall, m.accuracy, m.f1), (1.0, 1.0, 1.0, 1.0));
    assert!(m.undefined.is_empty());
    let m = compute_metrics(&ConfusionCounts {
        tn: 4,
        ..Default::default()
    })
    .unwrap();
    assert_eq!(m.undefined, vec![Metric::Precision, Metric::Recall, Metric::F1]);
    assert_eq!((m.precision, m.f1, m.accuracy), (0.0, 0.0, 1.0));
    assert!(compute_metrics(&ConfusionCounts::default()).is_err());
}

#[test]
fn kappa_examples() {
    assert_eq!(kappa_from_table(20, 5, 10, 15).unwrap(), 0.4);
    let a = [P, O, P, P, O];
    assert_eq!(cohens_kappa(&a, &a).unwrap(), 1.0);
    assert_eq!(cohens_kappa(&[P, P], &[P, P]).unwrap(), 1.0);
    // constant raters that always disagree: chance agreement 0
    assert_eq!(cohens_kappa(&[P, P], &[O, O]).unwrap(), 0.0);
    assert_eq!(cohens_kappa(&[P, O], &[O, P]).unwrap(), -1.0);
    assert!(cohens_kappa(&[P], &[P, O]).is_err());
}

fn report(p: f64, r: f64, f1: f64) -> MetricsReport {
    MetricsReport {
        precision: p,
        recall: r,
        accuracy: 0.0,
        f1,
        counts: None,
        undefined: vec![],
    }
}

#[test]
fn improvement_ratio_examples() {
    let ours = report(0.898, 0.916, 0.907);
    let kw = improvement_ratios(&ours, &report(0.996, 0.405, 0.576));
    assert_eq!(
        (kw.precision, kw.recall, kw.f1),
        (Some(0.901), Some(2.261), Some(1.574))
    );
    let rnd = improvement_ratios(&ours, &report(0.012, 0.5, 0.023));
    assert_eq!(
        (rnd.precision, rnd.recall, rnd.f1),
        (Some(74.833), Some(1.832), Some(39.434))
    );
    let same = improvement_ratios(&ours, &ours);
    assert_eq!(
        (same.precision, same.recall, same.f1),
        (Some(1.0), Some(1.0), Some(1.0))
    );
    let zero = improvement_ratios(&ours, &report(0.0, 0.5, 0.0));
    assert_eq!(zero.omitted, vec![Metric::Precision, Metric::F1]);
    assert_eq!(zero.precision, None);
}

fn balanced(n: usize) -> LabeledCorpus {
    synthetic::generate(n, 11)
}

#[test]
fn cross_validation_on_synthetic_data() {
    let corpus = balanced(60);
    let spec = LearnerSpec::new(Algorithm::Logreg, 1);
    let r = cross_validate(&corpus, &spec, &small_cfg()).unwrap();
    assert_eq!(r.folds.len(), 5);
    assert_eq!(r.folds.iter().map(|f| f.test_size).sum::<usize>(), 120);
    assert!(r.mean.f1 >= 0.95, "{}", r.mean.f1);
    let mean_f1 = r.folds.iter().map(|f| f.metrics.f1).sum::<f64>() / 5.0;
    assert!((r.mean.f1 - mean_f1).abs() < 1e-12);
    assert_eq!(r.pooled.counts.unwrap().total(), 120);
}

#[test]
fn two_folds_on_four_reviews() {
    let reviews = vec![
        Review::new("a", "screen reader broken", Some(P)),
        Review::new("b", "font size tiny blind", Some(P)),
        Review::new("c", "login crash", Some(O)),
        Review::new("d", "ads everywhere", Some(O)),
    ];
    let corpus = LabeledCorpus::new(reviews).unwrap();
    let cfg = CvConfig { k: 2, ..small_cfg() };
    let r = cross_validate(&corpus, &LearnerSpec::new(Algorithm::AvgPerceptron, 0), &cfg).unwrap();
    assert_eq!(r.folds.len(), 2);
    assert!(r.folds.iter().all(|f| f.test_size == 2 && f.train_size == 2));
}

#[test]
fn folds_never_train_on_their_test_rows() {
    let corpus = balanced(40);
    let cfg = small_cfg();
    let seen: Mutex<Vec<(usize, Vec<String>)>> = Mutex::new(Vec::new());
    cross_validate_observed(
        &corpus,
        &LearnerSpec::new(Algorithm::LinearSvm, 0),
        &cfg,
        &|fold, ids| {
            seen.lock()
                .unwrap()
                .push((fold, ids.iter().map(|s| s.to_string()).collect()));
        },
    )
    .unwrap();
    let plan = crate::corpus::stratified_folds(&corpus, cfg.k, cfg.seed).unwrap();
    let seen = seen.into_inner().unwrap();
    assert_eq!(seen.len(), cfg.k);
    for (fold, ids) in seen {
        assert_eq!(ids.len(), corpus.len() - plan.test_rows(fold).len());
        assert!(ids.iter().all(|id| plan.fold_of(id) != Some(fold)));
    }
}

#[test]
fn sequential_and_parallel_cross_validation_agree() {
    let corpus = balanced(40);
    let spec = LearnerSpec::new(Algorithm::BoostedTrees, 0)
        .with("n_tree", 10.0)
        .unwrap();
    let a = cross_validate(
        &corpus,
        &spec,
        &CvConfig {
            exec: Exec::Sequential,
            ..small_cfg()
        },
    )
    .unwrap();
    let b = cross_validate(
        &corpus,
        &spec,
        &CvConfig {
            exec: Exec::Parallel,
            ..small_cfg()
        },
    )
    .unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn learning_curve_sizes_and_shape() {
    let corpus = balanced(125);
    let spec = LearnerSpec::new(Algorithm::Logreg, 0);
    let points = learning_curve(&corpus, &spec, &small_cfg(), 50).unwrap();
    let sizes: Vec<usize> = points.iter().map(|p| p.size).collect();
    assert_eq!(sizes, vec![50, 100, 150, 200, 250]);
    assert_eq!(points.len(), corpus.len().div_ceil(50));
    assert!(points.iter().all(|p| p.n_positive * 2 == p.size));
    assert!(learning_curve(&corpus, &spec, &small_cfg(), 200).is_err());
    assert!(learning_curve(&corpus, &spec, &small_cfg(), 0).is_err());
}

#[test]
fn grid_search_picks_best_cell() {
    let corpus = balanced(40);
    let grid = GridSpec::new()
        .with("n_tree", &[2.0, 20.0])
        .with("learning_rate", &[0.05, 0.5]);
    let result = grid_search(&corpus, Algorithm::BoostedTrees, &grid, &small_cfg()).unwrap();
    assert_eq!(result.cells.len(), 4);
    let f1s: Vec<f64> = result
        .cells
        .iter()
        .map(|c| c.report.as_ref().unwrap().mean.f1)
        .collect();
    let mut manual = 0;
    for (i, f) in f1s.iter().enumerate() {
        if *f > f1s[manual] {
            manual = i;
        }
    }
    assert_eq!(result.best_index, manual);
    assert_eq!(
        result.best.get("n_tree"),
        result.cells[manual].hyperparameters["n_tree"]
    );
}

#[test]
fn grid_search_surfaces_cell_errors() {
    let corpus = balanced(30);
    let grid = GridSpec::new().with("n_tree", &[0.0, 5.0]);
    let result = grid_search(&corpus, Algorithm::BoostedTrees, &grid, &small_cfg()).unwrap();
    assert!(result.cells[0].error.is_some());
    assert_eq!(result.best_index, 1);
    let one = GridSpec::new().with("n_tree", &[5.0]);
    let result = grid_search(&corpus, Algorithm::BoostedTrees, &one, &small_cfg()).unwrap();
    assert_eq!(result.best.get("n_tree"), 5.0);
    assert!(grid_search(&corpus, Algorithm::BoostedTrees, &GridSpec::new(), &small_cfg()).is_err());
    let unknown = GridSpec::new().with("depth", &[1.0]);
    assert!(grid_search(&corpus, Algorithm::BoostedTrees, &unknown, &small_cfg()).is_err());
}

fn fitted(algorithm: Algorithm, corpus: &LabeledCorpus) -> crate::TrainedModel {
    let cfg = small_cfg();
    let (pipeline, m) = FeaturePipeline::fit(corpus, &cfg.stops, &cfg.featurizer, Exec::default()).unwrap();
    fit(&LearnerSpec::new(algorithm, 0), &m)
        .unwrap()
        .with_pipeline(pipeline)
}

#[test]
fn planted_token_is_an_influential_feature() {
    let corpus = balanced(150);
    let model = fitted(Algorithm::BoostedTrees, &corpus);
    let r = report_influential_features(&corpus, &model, 5).unwrap();
    assert_eq!(r.source, FeatureSource::SplitGain);
    assert!(!r.fallback);
    assert!(r.top_grams().contains(&"blind"), "{:?}", r.top_grams());
}

#[test]
fn features_fall_back_to_mutual_information() {
    let corpus = balanced(60);
    let model = fitted(Algorithm::Logreg, &corpus);
    let r = report_influential_features(&corpus, &model, 10).unwrap();
    assert_eq!(r.source, FeatureSource::MutualInformation);
    assert!(r.fallback);
    assert_eq!(r.features.len(), 10);
    assert!(report_influential_features(&LabeledCorpus::default(), &model, 5).is_err());
}

#[test]
fn report_document_strips_timings() {
    let doc = ReportDocument::new("test", serde_json::json!({"seed": 1}), vec![1, 2]).unwrap();
    let a = doc.clone().with_timing("total", 1.5);
    let b = doc.with_timing("total", 9.0);
    assert_ne!(a.to_json_pretty().unwrap(), b.to_json_pretty().unwrap());
    assert_eq!(a.deterministic_json().unwrap(), b.deterministic_json().unwrap());
    let back = ReportDocument::from_json(&a.to_json_pretty().unwrap()).unwrap();
    assert_eq!(back, a);
}

fn label_strategy() -> impl Strategy<Value = Label> {
    any::<bool>().prop_map(Label::from_positive)
}

proptest! {
    #[test]
    fn metrics_match_brute_force(pairs in prop::collection::vec((label_strategy(), label_strategy()), 1..60)) {
        let (pred, act): (Vec<_>, Vec<_>) = pairs.iter().copied().unzip();
        let c = confusion_counts(&pred, &act).unwrap();
        let tally = |p: bool, a: bool| pairs.iter().filter(|(x, y)| x.is_positive() == p && y.is_positive() == a).count() as u64;
        prop_assert_eq!(c, ConfusionCounts { tp: tally(true, true), tn: tally(false, false), fp: tally(true, false), fn_: tally(false, true) });
        let m = compute_metrics(&c).unwrap();
        prop_assert_eq!(m.accuracy, (c.tp + c.tn) as f64 / pairs.len() as f64);
        if m.is_defined(Metric::Precision) && m.is_defined(Metric::Recall) {
            prop_assert!(m.f1 >= m.precision.min(m.recall) - 1e-12);
            prop_assert!(m.f1 <= m.precision.max(m.recall) + 1e-12);
        }
    }

    #[test]
    fn kappa_is_bounded(pairs in prop::collection::vec((label_strategy(), label_strategy()), 1..60)) {
        let (a, b): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        if let Ok(k) = cohens_kappa(&a, &b) {
            prop_assert!((-1.0..=1.0).contains(&k));
        }
        if a.iter().any(|l| l.is_positive()) && a.iter().any(|l| !l.is_positive()) {
            prop_assert_eq!(cohens_kappa(&a, &a).unwrap(), 1.0);
        }
    }
}
