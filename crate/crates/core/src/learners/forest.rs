use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::trainset::TrainSet;
use super::tree::{Node, Tree};
use super::LearnerSpec;
use crate::featurize::SparseVector;

/// Bagged presence-split trees; each leaf votes 1 (positive) or 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionForest {
    pub trees: Vec<Tree>,
    /// weighted Gini decrease per global feature, ascending index
    pub importances: Vec<(u32, f64)>,
}

impl DecisionForest {
    /// Fraction of trees voting positive.
    pub fn vote_fraction(&self, x: &SparseVector) -> f64 {
        let votes: f64 = self.trees.iter().map(|t| t.eval(x)).sum();
        votes / self.trees.len() as f64
    }

    pub fn importances(&self) -> Vec<(u32, f64)> {
        self.importances.clone()
    }
}

fn gini(pos: f64, total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    let p = pos / total;
    2.0 * p * (1.0 - p)
}

struct Params {
    max_depth: usize,
    candidates: usize,
    min_leaf: f64,
}

pub(crate) fn fit(spec: &LearnerSpec, set: &TrainSet) -> DecisionForest {
    let params = Params {
        max_depth: spec.get_usize("max_depth"),
        candidates: spec.get_usize("n_samples_leaf"),
        min_leaf: spec.get("min_samples_split"),
    };
    let n_trees = spec.get_usize("n_estimators");
    let mut importance = vec![0.0; set.n_features()];
    let mut trees = Vec::with_capacity(n_trees);
    for t in 0..n_trees {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(t as u64);
        let mut counts = vec![0u32; set.len()];
        for _ in 0..set.len() {
            counts[rng.gen_range(0..set.len())] += 1;
        }
        let sample: Vec<(usize, f64)> = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (i, c as f64))
            .collect();
        trees.push(grow(set, sample, &params, &mut rng, &mut importance));
    }
    let importances = set
        .features
        .iter()
        .zip(&importance)
        .filter(|(_, &g)| g > 0.0)
        .map(|(&f, &g)| (f, g))
        .collect::<BTreeMap<_, _>>()
        .into_iter()
        .collect();
    DecisionForest { trees, importances }
}

fn grow(
    set: &TrainSet,
    sample: Vec<(usize, f64)>,
    params: &Params,
    rng: &mut ChaCha8Rng,
    importance: &mut [f64],
) -> Tree {
    let mut nodes = vec![Node::Leaf { value: 0.0 }];
    let mut stack = vec![(0usize, sample, 0usize)];
    while let Some((at, rows, depth)) = stack.pop() {
        let total: f64 = rows.iter().map(|r| r.1).sum();
        let pos: f64 = rows.iter().filter(|r| set.positive[r.0]).map(|r| r.1).sum();
        let vote = if pos >= total - pos { 1.0 } else { 0.0 };
        let pure = pos == 0.0 || pos == total;
        if pure || depth >= params.max_depth || total < 2.0 * params.min_leaf {
            nodes[at] = Node::Leaf { value: vote };
            continue;
        }
        let Some((feature, gain)) = best_split(set, &rows, total, pos, params, rng) else {
            nodes[at] = Node::Leaf { value: vote };
            continue;
        };
        importance[feature as usize] += gain * total;
        let (present, absent): (Vec<_>, Vec<_>) = rows.into_iter().partition(|r| set.has_feature(r.0, feature));
        let p = nodes.len() as u32;
        nodes.push(Node::Leaf { value: 0.0 });
        nodes.push(Node::Leaf { value: 0.0 });
        nodes[at] = Node::Split {
            feature: set.features[feature as usize],
            present: p,
            absent: p + 1,
        };
        stack.push((p as usize + 1, absent, depth + 1));
        stack.push((p as usize, present, depth + 1));
    }
    Tree { nodes }
}

/// Draw candidate features from random nonzero entries of random rows in
/// the node and keep the one with the largest Gini decrease.
fn best_split(
    set: &TrainSet,
    rows: &[(usize, f64)],
    total: f64,
    pos: f64,
    params: &Params,
    rng: &mut ChaCha8Rng,
) -> Option<(u32, f64)> {
    let mut candidates = Vec::with_capacity(params.candidates);
    for _ in 0..params.candidates {
        let row = &set.rows[rows[rng.gen_range(0..rows.len())].0];
        if !row.is_empty() {
            candidates.push(row[rng.gen_range(0..row.len())].0);
        }
    }
    candidates.sort_unstable();
    candidates.dedup();
    let parent = gini(pos, total);
    let mut best: Option<(u32, f64)> = None;
    for f in candidates {
        let (mut w_in, mut pos_in) = (0.0, 0.0);
        for &(r, w) in rows {
            if set.has_feature(r, f) {
                w_in += w;
                if set.positive[r] {
                    pos_in += w;
                }
            }
        }
        let w_out = total - w_in;
        if w_in < params.min_leaf || w_out < params.min_leaf {
            continue;
        }
        let child = (w_in * gini(pos_in, w_in) + w_out * gini(pos - pos_in, w_out)) / total;
        let gain = parent - child;
        if gain > 1e-12 && best.is_none_or(|(_, g)| gain > g) {
            best = Some((f, gain));
        }
    }
    best
}
