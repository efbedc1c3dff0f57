use serde::{Deserialize, Serialize};

use crate::featurize::SparseVector;

/// A node of a binary tree that splits on feature presence (`x_f != 0`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Split {
        /// global feature index
        feature: u32,
        present: u32,
        absent: u32,
    },
    Leaf {
        value: f64,
    },
}

/// Flat node array; the root is `nodes[0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf(value: f64) -> Self {
        Tree {
            nodes: vec![Node::Leaf { value }],
        }
    }

    pub fn eval(&self, x: &SparseVector) -> f64 {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    present,
                    absent,
                } => {
                    at = if x.contains(*feature) {
                        *present as usize
                    } else {
                        *absent as usize
                    };
                }
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { present, absent, .. } => {
                    1 + walk(nodes, *present as usize).max(walk(nodes, *absent as usize))
                }
            }
        }
        walk(&self.nodes, 0)
    }
}
