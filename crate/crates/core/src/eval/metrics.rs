use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn record(&mut self, predicted: Label, actual: Label) {
        match (predicted.is_positive(), actual.is_positive()) {
            (true, true) => self.tp += 1,
            (false, false) => self.tn += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
        }
    }

    pub fn merge(&self, other: &ConfusionCounts) -> ConfusionCounts {
        ConfusionCounts {
            tp: self.tp + other.tp,
            tn: self.tn + other.tn,
            fp: self.fp + other.fp,
            fn_: self.fn_ + other.fn_,
        }
    }
}

pub fn confusion_counts(predicted: &[Label], actual: &[Label]) -> Result<ConfusionCounts> {
    if predicted.len() != actual.len() {
        return Err(Error::InvalidArgument(format!(
            "{} predictions for {} labels",
            predicted.len(),
            actual.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::Empty("label sequence"));
    }
    let mut c = ConfusionCounts::default();
    for (&p, &a) in predicted.iter().zip(actual) {
        c.record(p, a);
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Precision,
    Recall,
    Accuracy,
    F1,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Precision, Metric::Recall, Metric::Accuracy, Metric::F1];
}

/// Precision, recall, accuracy and F1. A ratio with a zero denominator is
/// reported as 0 and listed in `undefined`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
    pub f1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<ConfusionCounts>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub undefined: Vec<Metric>,
}

impl MetricsReport {
    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Precision => self.precision,
            Metric::Recall => self.recall,
            Metric::Accuracy => self.accuracy,
            Metric::F1 => self.f1,
        }
    }

    pub fn is_defined(&self, metric: Metric) -> bool {
        !self.undefined.contains(&metric)
    }
}

fn ratio(num: f64, den: f64, metric: Metric, undefined: &mut Vec<Metric>) -> f64 {
    if den == 0.0 {
        undefined.push(metric);
        0.0
    } else {
        num / den
    }
}

pub(crate) fn f1_score(p: f64, r: f64) -> Option<f64> {
    (p + r > 0.0).then(|| 2.0 * p * r / (p + r))
}

pub fn compute_metrics(c: &ConfusionCounts) -> Result<MetricsReport> {
    if c.total() == 0 {
        return Err(Error::Empty("confusion counts"));
    }
    let mut undefined = Vec::new();
    let (tp, tn, fp, fn_) = (c.tp as f64, c.tn as f64, c.fp as f64, c.fn_ as f64);
    let precision = ratio(tp, tp + fp, Metric::Precision, &mut undefined);
    let recall = ratio(tp, tp + fn_, Metric::Recall, &mut undefined);
    let accuracy = (tp + tn) / c.total() as f64;
    // F1 = 2TP / (2TP + FP + FN), which equals 2PR/(P+R) whenever both exist
    let f1 = ratio(2.0 * tp, 2.0 * tp + fp + fn_, Metric::F1, &mut undefined);
    Ok(MetricsReport {
        precision,
        recall,
        accuracy,
        f1,
        counts: Some(*c),
        undefined,
    })
}

/// Arithmetic mean of each metric. A metric is flagged undefined if it was
/// undefined in any input report.
pub fn average_metrics(reports: &[MetricsReport]) -> Result<MetricsReport> {
    if reports.is_empty() {
        return Err(Error::Empty("metric reports"));
    }
    let n = reports.len() as f64;
    let mean = |m: Metric| reports.iter().map(|r| r.get(m)).sum::<f64>() / n;
    let mut undefined: Vec<Metric> = reports.iter().flat_map(|r| r.undefined.iter().copied()).collect();
    undefined.sort();
    undefined.dedup();
    Ok(MetricsReport {
        precision: mean(Metric::Precision),
        recall: mean(Metric::Recall),
        accuracy: mean(Metric::Accuracy),
        f1: mean(Metric::F1),
        counts: None,
        undefined,
    })
}

/// Round half away from zero at 3 decimals.
pub fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

/// Cohen's κ between two labelings of the same items.
///
/// When chance agreement is 1 (both raters constant and equal) κ is 1;
/// constant but different raters give [`Error::KappaUndefined`].
pub fn cohens_kappa(a: &[Label], b: &[Label]) -> Result<f64> {
    let c = confusion_counts(a, b)?;
    // rows: rater a, columns: rater b
    kappa_from_table(c.tp, c.fp, c.fn_, c.tn)
}

/// κ from a 2×2 agreement table `[[both yes, a yes b no], [a no b yes, both no]]`.
pub fn kappa_from_table(yy: u64, yn: u64, ny: u64, nn: u64) -> Result<f64> {
    let n = (yy + yn + ny + nn) as i128;
    if n == 0 {
        return Err(Error::Empty("agreement table"));
    }
    // κ = (n·agree − Σ row·col) / (n² − Σ row·col), exact in integers
    let agree = (yy + nn) as i128;
    let chance = (yy + yn) as i128 * (yy + ny) as i128 + (ny + nn) as i128 * (yn + nn) as i128;
    let den = n * n - chance;
    if den == 0 {
        return if agree == n {
            Ok(1.0)
        } else {
            Err(Error::KappaUndefined {
                observed: agree as f64 / n as f64,
            })
        };
    }
    Ok(((n * agree - chance) as f64 / den as f64).clamp(-1.0, 1.0))
}

/// `ours / baseline` per metric, truncated to 3 decimals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementRatios {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    /// metrics whose baseline value is 0 (or undefined)
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub omitted: Vec<Metric>,
}

/// Drop digits past the third decimal. The small offset absorbs binary
/// representation error so that e.g. 0.916 / 0.5 stays 1.832.
pub fn truncate3(x: f64) -> f64 {
    (x * 1000.0 + 1e-9).trunc() / 1000.0
}

pub fn improvement_ratios(ours: &MetricsReport, baseline: &MetricsReport) -> ImprovementRatios {
    let mut omitted = Vec::new();
    let mut one = |m: Metric| {
        let b = baseline.get(m);
        if b > 0.0 && baseline.is_defined(m) {
            Some(truncate3(ours.get(m) / b))
        } else {
            omitted.push(m);
            None
        }
    };
    let precision = one(Metric::Precision);
    let recall = one(Metric::Recall);
    let f1 = one(Metric::F1);
    ImprovementRatios {
        precision,
        recall,
        f1,
        omitted,
    }
}
