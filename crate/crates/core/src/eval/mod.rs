//! Metrics, agreement, stratified cross-validation, learning curves, grid
//! search, influential-feature reports and the versioned report document.

mod experiment;
mod features;
mod metrics;
mod report;

pub use experiment::{
    cross_validate, cross_validate_observed, grid_search, learning_curve, CurvePoint, CvConfig, CvReport, FoldReport,
    GridCell, GridResult, GridSpec,
};
pub use features::{report_influential_features, FeatureReport, FeatureSource, RankedFeature};
pub(crate) use metrics::f1_score;
pub use metrics::{
    average_metrics, cohens_kappa, compute_metrics, confusion_counts, improvement_ratios, kappa_from_table, round3,
    truncate3, ConfusionCounts, ImprovementRatios, Metric, MetricsReport,
};
pub use report::{ReportDocument, REPORT_FORMAT_VERSION};

#[cfg(test)]
mod tests;
