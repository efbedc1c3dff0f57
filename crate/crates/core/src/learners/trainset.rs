use crate::error::{Error, Result};
use crate::featurize::{DesignMatrix, SparseVector};

/// Training rows re-indexed onto the features that actually occur.
///
/// Hashed spaces are large (2^18 by default) while a training split touches
/// a few thousand buckets, so learners work on dense local ids and map back
/// to global indices when they store parameters.
pub(crate) struct TrainSet {
    /// local id → global feature index, ascending
    pub features: Vec<u32>,
    /// rows with local ids, ascending within each row
    pub rows: Vec<Vec<(u32, f64)>>,
    pub positive: Vec<bool>,
}

impl TrainSet {
    pub fn from_matrix(m: &DesignMatrix) -> Result<Self> {
        if m.dimension() == 0 {
            return Err(Error::InvalidArgument("feature dimension is 0".into()));
        }
        if m.is_empty() {
            return Err(Error::Empty("training data"));
        }
        let n_pos = m.n_positive();
        if n_pos == 0 || n_pos == m.len() {
            return Err(Error::SingleClass);
        }
        if let Some(row) = m.rows().iter().position(|r| !r.is_finite()) {
            return Err(Error::NonFinite { row });
        }
        let mut features: Vec<u32> = m
            .rows()
            .iter()
            .flat_map(|r| r.entries().iter().map(|&(i, _)| i))
            .collect();
        features.sort_unstable();
        features.dedup();
        let rows = m
            .rows()
            .iter()
            .map(|r| {
                r.entries()
                    .iter()
                    .map(|&(i, w)| (features.binary_search(&i).unwrap() as u32, w))
                    .collect()
            })
            .collect();
        Ok(TrainSet {
            features,
            rows,
            positive: m.labels().iter().map(|l| l.is_positive()).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    /// `+1.0` for positives, `-1.0` for negatives.
    pub fn y(&self, i: usize) -> f64 {
        if self.positive[i] {
            1.0
        } else {
            -1.0
        }
    }

    pub fn has_feature(&self, row: usize, local: u32) -> bool {
        self.rows[row].binary_search_by_key(&local, |&(j, _)| j).is_ok()
    }
}

/// Map a global sparse vector onto sorted `(local id, value)` pairs, dropping
/// features that were not seen in training.
pub(crate) fn project(features: &[u32], x: &SparseVector) -> Vec<(usize, f64)> {
    let mut out = Vec::with_capacity(x.nnz());
    let mut start = 0;
    for &(i, w) in x.entries() {
        if let Ok(p) = features[start..].binary_search(&i) {
            out.push((start + p, w));
            start += p + 1;
        }
    }
    out
}
