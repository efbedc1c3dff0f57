use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::trainset::{project, TrainSet};
use super::{sigmoid, LearnerSpec};
use crate::featurize::SparseVector;

/// One hidden layer of sigmoid units and a sigmoid output.
///
/// Input weights are kept only for features seen in training; `w1` is
/// input-major (`features.len() × hidden`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    /// global indices of the input units, ascending
    pub features: Vec<u32>,
    pub hidden: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl Network {
    fn init(features: Vec<u32>, hidden: usize, diameter: f64, rng: &mut ChaCha8Rng) -> Self {
        let half = diameter / 2.0;
        let mut draw = |k: usize| -> Vec<f64> { (0..k).map(|_| rng.gen_range(-half..=half)).collect() };
        let w1 = draw(features.len() * hidden);
        let w2 = draw(hidden);
        Network {
            features,
            hidden,
            w1,
            b1: vec![0.0; hidden],
            w2,
            b2: 0.0,
        }
    }

    fn hidden_activations(&self, x: &[(usize, f64)]) -> Vec<f64> {
        let h = self.hidden;
        let mut a = self.b1.clone();
        for &(j, v) in x {
            let row = &self.w1[j * h..(j + 1) * h];
            for (ak, wk) in a.iter_mut().zip(row) {
                *ak += wk * v;
            }
        }
        a.iter_mut().for_each(|z| *z = sigmoid(*z));
        a
    }

    fn logit_local(&self, x: &[(usize, f64)]) -> (Vec<f64>, f64) {
        let a = self.hidden_activations(x);
        let z = self.b2 + a.iter().zip(&self.w2).map(|(x, w)| x * w).sum::<f64>();
        (a, z)
    }

    /// Output pre-activation.
    pub fn output_logit(&self, x: &SparseVector) -> f64 {
        self.logit_local(&project(&self.features, x)).1
    }

    pub fn n_params(&self) -> usize {
        self.w1.len() + 2 * self.hidden + 1
    }

    /// All parameters flattened as `w1, b1, w2, b2`.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.n_params());
        p.extend_from_slice(&self.w1);
        p.extend_from_slice(&self.b1);
        p.extend_from_slice(&self.w2);
        p.push(self.b2);
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.n_params(), "parameter length");
        let (n1, h) = (self.w1.len(), self.hidden);
        self.w1.copy_from_slice(&p[..n1]);
        self.b1.copy_from_slice(&p[n1..n1 + h]);
        self.w2.copy_from_slice(&p[n1 + h..n1 + 2 * h]);
        self.b2 = p[n1 + 2 * h];
    }

    /// Cross-entropy of one example and its gradient, laid out like
    /// [`Network::params`].
    pub fn example_loss_grad(&self, x: &SparseVector, positive: bool) -> (f64, Vec<f64>) {
        let xl = project(&self.features, x);
        let (a, z) = self.logit_local(&xl);
        let y = if positive { 1.0 } else { 0.0 };
        let sp = if z > 0.0 {
            z + (-z).exp().ln_1p()
        } else {
            z.exp().ln_1p()
        };
        let loss = sp - y * z;
        let mut grad = vec![0.0; self.n_params()];
        let (n1, h) = (self.w1.len(), self.hidden);
        let dz = sigmoid(z) - y;
        for k in 0..h {
            let da = dz * self.w2[k] * a[k] * (1.0 - a[k]);
            grad[n1 + k] = da;
            grad[n1 + h + k] = dz * a[k];
            for &(j, v) in &xl {
                grad[j * h + k] += da * v;
            }
        }
        grad[n1 + 2 * h] = dz;
        (loss, grad)
    }
}

pub(crate) fn fit(spec: &LearnerSpec, set: &TrainSet) -> Network {
    let hidden = spec.get_usize("n_nodes");
    let rate = spec.get("learning_rate");
    let epochs = spec.get_usize("n_learning_rate");
    let diameter = spec.get("learning_rate_weights");
    let momentum = spec.get("momentum");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut net = Network::init(set.features.clone(), hidden, diameter, &mut rng);
    let h = hidden;
    let n1 = net.w1.len();
    let mut velocity = if momentum > 0.0 {
        vec![0.0; net.n_params()]
    } else {
        Vec::new()
    };
    let mut order: Vec<usize> = (0..set.len()).collect();
    let mut delta_hidden = vec![0.0; h];

    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let row: Vec<(usize, f64)> = set.rows[i].iter().map(|&(j, v)| (j as usize, v)).collect();
            let (a, z) = net.logit_local(&row);
            let y = if set.positive[i] { 1.0 } else { 0.0 };
            let dz = sigmoid(z) - y;
            for k in 0..h {
                delta_hidden[k] = dz * net.w2[k] * a[k] * (1.0 - a[k]);
            }
            if momentum > 0.0 {
                velocity.iter_mut().for_each(|v| *v *= momentum);
                for k in 0..h {
                    velocity[n1 + k] -= rate * delta_hidden[k];
                    velocity[n1 + h + k] -= rate * dz * a[k];
                    for &(j, v) in &row {
                        velocity[j * h + k] -= rate * delta_hidden[k] * v;
                    }
                }
                velocity[n1 + 2 * h] -= rate * dz;
                let (v1, rest) = velocity.split_at(n1);
                net.w1.iter_mut().zip(v1).for_each(|(w, v)| *w += v);
                net.b1.iter_mut().zip(&rest[..h]).for_each(|(w, v)| *w += v);
                net.w2.iter_mut().zip(&rest[h..2 * h]).for_each(|(w, v)| *w += v);
                net.b2 += rest[2 * h];
            } else {
                for k in 0..h {
                    net.b1[k] -= rate * delta_hidden[k];
                    net.w2[k] -= rate * dz * a[k];
                }
                for &(j, v) in &row {
                    let w = &mut net.w1[j * h..(j + 1) * h];
                    for k in 0..h {
                        w[k] -= rate * delta_hidden[k] * v;
                    }
                }
                net.b2 -= rate * dz;
            }
        }
    }
    net
}
