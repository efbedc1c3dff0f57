use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::trainset::TrainSet;
use super::tree::{Node, Tree};
use super::{sigmoid, LearnerSpec};
use crate::featurize::SparseVector;

/// L2 penalty on leaf values in the split gain and the Newton step.
const LEAF_L2: f64 = 1.0;

/// Gradient-boosted presence-split trees on the logistic loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedTrees {
    /// initial log-odds
    pub init: f64,
    pub trees: Vec<Tree>,
    /// summed split gain per global feature, ascending index
    pub importances: Vec<(u32, f64)>,
}

impl BoostedTrees {
    pub fn raw_score(&self, x: &SparseVector) -> f64 {
        self.init + self.trees.iter().map(|t| t.eval(x)).sum::<f64>()
    }

    pub fn importances(&self) -> &[(u32, f64)] {
        &self.importances
    }
}

/// Mean training log-loss before the first tree and after each tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostingTrace {
    pub losses: Vec<f64>,
}

fn loss(f: f64, positive: bool) -> f64 {
    // log(1 + e^f) - y f
    let sp = if f > 0.0 {
        f + (-f).exp().ln_1p()
    } else {
        f.exp().ln_1p()
    };
    if positive {
        sp - f
    } else {
        sp
    }
}

struct Leaf {
    node: usize,
    rows: Vec<usize>,
    g: f64,
    h: f64,
    split: Option<Split>,
}

struct Split {
    feature: u32,
    gain: f64,
}

fn score(g: f64, h: f64) -> f64 {
    g * g / (h + LEAF_L2)
}

/// Per-local-feature accumulators reused across nodes.
struct Scratch {
    g: Vec<f64>,
    h: Vec<f64>,
    n: Vec<u32>,
    touched: Vec<u32>,
}

impl Scratch {
    fn best(&mut self, set: &TrainSet, leaf: &Leaf, grad: &[f64], hess: &[f64], min_leaf: usize) -> Option<Split> {
        if leaf.rows.len() < 2 * min_leaf {
            return None;
        }
        for &r in &leaf.rows {
            for &(j, _) in &set.rows[r] {
                let j = j as usize;
                if self.n[j] == 0 {
                    self.touched.push(j as u32);
                }
                self.g[j] += grad[r];
                self.h[j] += hess[r];
                self.n[j] += 1;
            }
        }
        self.touched.sort_unstable();
        let parent = score(leaf.g, leaf.h);
        let mut best: Option<Split> = None;
        for &j in &self.touched {
            let j = j as usize;
            let n_in = self.n[j] as usize;
            if n_in >= min_leaf && leaf.rows.len() - n_in >= min_leaf {
                let gain = score(self.g[j], self.h[j]) + score(leaf.g - self.g[j], leaf.h - self.h[j]) - parent;
                if gain > 1e-12 && best.as_ref().is_none_or(|b| gain > b.gain) {
                    best = Some(Split {
                        feature: j as u32,
                        gain,
                    });
                }
            }
            self.g[j] = 0.0;
            self.h[j] = 0.0;
            self.n[j] = 0;
        }
        self.touched.clear();
        best
    }
}

pub(crate) fn fit(spec: &LearnerSpec, set: &TrainSet) -> (BoostedTrees, BoostingTrace) {
    let max_leaves = spec.get_usize("max_n_leaf");
    let min_leaf = spec.get_usize("min_samples_leaf");
    let rate = spec.get("learning_rate");
    let n_tree = spec.get_usize("n_tree");
    let n = set.len();

    let n_pos = set.positive.iter().filter(|&&p| p).count() as f64;
    let init = (n_pos / (n as f64 - n_pos)).ln();
    let mut f = vec![init; n];
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    let mut importance = vec![0.0; set.n_features()];
    let mut scratch = Scratch {
        g: vec![0.0; set.n_features()],
        h: vec![0.0; set.n_features()],
        n: vec![0; set.n_features()],
        touched: Vec::new(),
    };
    let total_loss = |f: &[f64]| -> f64 { f.iter().zip(&set.positive).map(|(&v, &p)| loss(v, p)).sum() };
    let mut current = total_loss(&f);
    let mut losses = vec![current / n as f64];
    let mut trees = Vec::with_capacity(n_tree);

    for _ in 0..n_tree {
        for i in 0..n {
            let p = sigmoid(f[i]);
            grad[i] = p - if set.positive[i] { 1.0 } else { 0.0 };
            hess[i] = p * (1.0 - p);
        }
        let mut nodes = vec![Node::Leaf { value: 0.0 }];
        let mut root = Leaf {
            node: 0,
            rows: (0..n).collect(),
            g: grad.iter().sum(),
            h: hess.iter().sum(),
            split: None,
        };
        root.split = scratch.best(set, &root, &grad, &hess, min_leaf);
        let mut leaves = vec![root];

        while leaves.len() < max_leaves {
            let mut pick: Option<usize> = None;
            for (k, leaf) in leaves.iter().enumerate() {
                if let Some(s) = &leaf.split {
                    if pick.is_none_or(|p| s.gain > leaves[p].split.as_ref().unwrap().gain) {
                        pick = Some(k);
                    }
                }
            }
            let Some(k) = pick else { break };
            let leaf = leaves.swap_remove(k);
            let split = leaf.split.unwrap();
            importance[split.feature as usize] += split.gain;
            let (present, absent): (Vec<usize>, Vec<usize>) =
                leaf.rows.into_iter().partition(|&r| set.has_feature(r, split.feature));
            let at = nodes.len();
            nodes.push(Node::Leaf { value: 0.0 });
            nodes.push(Node::Leaf { value: 0.0 });
            nodes[leaf.node] = Node::Split {
                feature: set.features[split.feature as usize],
                present: at as u32,
                absent: at as u32 + 1,
            };
            for (node, rows) in [(at, present), (at + 1, absent)] {
                let mut child = Leaf {
                    node,
                    g: rows.iter().map(|&r| grad[r]).sum(),
                    h: rows.iter().map(|&r| hess[r]).sum(),
                    rows,
                    split: None,
                };
                child.split = scratch.best(set, &child, &grad, &hess, min_leaf);
                leaves.push(child);
            }
        }

        // Newton value with shrinkage, halved until it lowers the leaf's loss
        let floor = 1e-11 * current;
        for leaf in &leaves {
            let mut value = -leaf.g / (leaf.h + LEAF_L2) * rate;
            let before: f64 = leaf.rows.iter().map(|&r| loss(f[r], set.positive[r])).sum();
            let mut accepted = false;
            for _ in 0..40 {
                let after: f64 = leaf.rows.iter().map(|&r| loss(f[r] + value, set.positive[r])).sum();
                if before - after >= floor && after <= before {
                    accepted = true;
                    break;
                }
                value *= 0.5;
            }
            if !accepted {
                value = 0.0;
            }
            for &r in &leaf.rows {
                f[r] += value;
            }
            nodes[leaf.node] = Node::Leaf { value };
        }
        current = total_loss(&f);
        losses.push(current / n as f64);
        trees.push(Tree { nodes });
    }

    let importances = set
        .features
        .iter()
        .zip(&importance)
        .filter(|(_, &g)| g > 0.0)
        .map(|(&j, &g)| (j, g))
        .collect::<BTreeMap<_, _>>()
        .into_iter()
        .collect();
    (
        BoostedTrees {
            init,
            trees,
            importances,
        },
        BoostingTrace { losses },
    )
}
