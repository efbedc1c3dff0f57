use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::trainset::TrainSet;
use super::LearnerSpec;
use crate::error::Result;
use crate::featurize::{DesignMatrix, SparseVector};

/// `bias + Σ w_i x_i` over the stored (nonzero) weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    /// global feature indices, ascending
    pub indices: Vec<u32>,
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    fn from_local(set: &TrainSet, local: &[f64], bias: f64) -> Self {
        let (indices, weights) = set
            .features
            .iter()
            .zip(local)
            .filter(|(_, &w)| w != 0.0)
            .map(|(&i, &w)| (i, w))
            .unzip();
        LinearModel { indices, weights, bias }
    }

    pub fn margin(&self, x: &SparseVector) -> f64 {
        let mut sum = self.bias;
        let mut start = 0;
        for &(i, v) in x.entries() {
            match self.indices[start..].binary_search(&i) {
                Ok(p) => {
                    sum += self.weights[start + p] * v;
                    start += p + 1;
                }
                Err(p) => start += p,
            }
        }
        sum
    }
}

fn dot_local(w: &[f64], row: &[(u32, f64)]) -> f64 {
    row.iter().map(|&(j, v)| w[j as usize] * v).sum()
}

fn softplus(z: f64) -> f64 {
    // log(1 + e^z), stable for large |z|
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Smooth part of the logistic-regression objective:
/// `Σ log(1 + exp(-y (w·x + b))) + (l2 / 2) ‖w‖²`, with the bias unpenalized.
///
/// Parameters are the weights of the features present in the matrix (in
/// ascending global index order) followed by the bias.
pub struct LogisticObjective {
    set: TrainSet,
    l2: f64,
}

impl LogisticObjective {
    pub fn new(data: &DesignMatrix, l2: f64) -> Result<Self> {
        Ok(LogisticObjective {
            set: TrainSet::from_matrix(data)?,
            l2,
        })
    }

    pub fn n_params(&self) -> usize {
        self.set.n_features() + 1
    }

    /// Objective value and gradient at `theta`.
    pub fn eval(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; theta.len()];
        let f = logistic_value_grad(&self.set, theta, self.l2, &mut grad);
        (f, grad)
    }
}

fn logistic_value_grad(set: &TrainSet, theta: &[f64], l2: f64, grad: &mut [f64]) -> f64 {
    let d = set.n_features();
    let (w, b) = (&theta[..d], theta[d]);
    grad.iter_mut().for_each(|g| *g = 0.0);
    let mut f = 0.0;
    for (i, row) in set.rows.iter().enumerate() {
        let y = set.y(i);
        let m = y * (dot_local(w, row) + b);
        f += softplus(-m);
        // d/dm log(1 + e^-m) = -σ(-m)
        let coef = -y * super::sigmoid(-m);
        for &(j, v) in row {
            grad[j as usize] += coef * v;
        }
        grad[d] += coef;
    }
    for j in 0..d {
        f += 0.5 * l2 * w[j] * w[j];
        grad[j] += l2 * w[j];
    }
    f
}

/// OWL-QN minimization of the L1+L2 penalized logistic loss.
pub(crate) fn fit_logreg(spec: &LearnerSpec, set: &TrainSet) -> LinearModel {
    let tol = spec.get("optimiz_tol");
    let l1 = spec.get("L1_weight");
    let l2 = spec.get("L2_weight");
    let memory = spec.get_usize("memory_L_BFGS");
    let theta = owlqn(set, l1, l2, memory, tol, 1000);
    let d = set.n_features();
    LinearModel::from_local(set, &theta[..d], theta[d])
}

fn l1_norm(theta: &[f64], d: usize) -> f64 {
    theta[..d].iter().map(|w| w.abs()).sum()
}

/// Pseudo-gradient of `f + l1 ‖w‖₁`; the bias (last coordinate) is not penalized.
fn pseudo_gradient(theta: &[f64], grad: &[f64], l1: f64, out: &mut [f64]) {
    let d = theta.len() - 1;
    for j in 0..d {
        let (x, g) = (theta[j], grad[j]);
        out[j] = if x > 0.0 {
            g + l1
        } else if x < 0.0 {
            g - l1
        } else if g + l1 < 0.0 {
            g + l1
        } else if g - l1 > 0.0 {
            g - l1
        } else {
            0.0
        };
    }
    out[d] = grad[d];
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn owlqn(set: &TrainSet, l1: f64, l2: f64, memory: usize, tol: f64, max_iter: usize) -> Vec<f64> {
    let n = set.n_features() + 1;
    let d = n - 1;
    let mut x = vec![0.0; n];
    let mut grad = vec![0.0; n];
    let mut f = logistic_value_grad(set, &x, l2, &mut grad) + l1 * l1_norm(&x, d);
    let mut pg = vec![0.0; n];
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(memory);
    let mut x_new = vec![0.0; n];
    let mut grad_new = vec![0.0; n];

    for iter in 0..max_iter {
        pseudo_gradient(&x, &grad, l1, &mut pg);
        let pg_norm = dot(&pg, &pg).sqrt();
        if pg_norm <= 1e-10 {
            break;
        }

        // two-loop recursion on the pseudo-gradient
        let mut dir: Vec<f64> = pg.iter().map(|g| -g).collect();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(s, &dir);
            for (dv, yv) in dir.iter_mut().zip(y) {
                *dv -= a * yv;
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = history.back() {
            let gamma = dot(s, y) / dot(y, y);
            dir.iter_mut().for_each(|v| *v *= gamma);
        }
        for ((s, y, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
            let b = rho * dot(y, &dir);
            for (dv, sv) in dir.iter_mut().zip(s) {
                *dv += (a - b) * sv;
            }
        }
        // keep only components that descend along -pg
        for (dv, g) in dir.iter_mut().zip(&pg) {
            if *dv * g >= 0.0 {
                *dv = 0.0;
            }
        }
        if dir.iter().all(|&v| v == 0.0) {
            dir = pg.iter().map(|g| -g).collect();
        }

        // orthant to stay in
        let orthant: Vec<f64> = x
            .iter()
            .zip(&pg)
            .map(|(&xv, &g)| if xv != 0.0 { xv.signum() } else { -g.signum() })
            .collect();

        let mut step = if iter == 0 && history.is_empty() {
            1.0 / pg_norm
        } else {
            1.0
        };
        let mut accepted = false;
        let mut f_new = f;
        for _ in 0..60 {
            for j in 0..n {
                let v = x[j] + step * dir[j];
                x_new[j] = if j < d && v * orthant[j] <= 0.0 { 0.0 } else { v };
            }
            f_new = logistic_value_grad(set, &x_new, l2, &mut grad_new) + l1 * l1_norm(&x_new, d);
            let decrease: f64 = pg.iter().zip(x_new.iter().zip(&x)).map(|(g, (a, b))| g * (a - b)).sum();
            if f_new <= f + 1e-4 * decrease {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = grad_new.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            if history.len() == memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }

        let rel = (f - f_new).abs() / f.abs().max(1.0);
        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut grad, &mut grad_new);
        f = f_new;
        if rel < tol {
            break;
        }
    }
    x
}

/// Pegasos: `n_iter` passes of stochastic subgradient descent on
/// `(λ/2)‖w‖² + mean hinge`, step `1/(λt)`, projected onto the `1/√λ` ball.
/// The bias is an extra always-on coordinate.
pub(crate) fn fit_pegasos(spec: &LearnerSpec, set: &TrainSet) -> LinearModel {
    let lambda = spec.get("Lambda");
    let passes = spec.get_usize("n_iter");
    let d = set.n_features();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    // w = scale * v; v[d] is the bias coordinate
    let mut v = vec![0.0; d + 1];
    let mut scale = 1.0f64;
    let mut v_norm2 = 0.0f64;
    let radius = 1.0 / lambda.sqrt();
    let mut t = 0u64;
    let mut order: Vec<usize> = (0..set.len()).collect();
    for _ in 0..passes {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let row = &set.rows[i];
            let y = set.y(i);
            let vx = dot_local(&v, row) + v[d];
            let margin = y * scale * vx;
            let decay = 1.0 - eta * lambda;
            if decay <= 0.0 {
                v.iter_mut().for_each(|x| *x = 0.0);
                v_norm2 = 0.0;
                scale = 1.0;
            } else {
                scale *= decay;
            }
            if margin < 1.0 {
                let delta = eta * y / scale;
                let vx_now = if decay <= 0.0 { 0.0 } else { vx };
                let x_norm2: f64 = row.iter().map(|&(_, w)| w * w).sum::<f64>() + 1.0;
                v_norm2 += 2.0 * delta * vx_now + delta * delta * x_norm2;
                for &(j, w) in row {
                    v[j as usize] += delta * w;
                }
                v[d] += delta;
            }
            let w_norm = scale * v_norm2.max(0.0).sqrt();
            if w_norm > radius {
                scale *= radius / w_norm;
            }
            if scale < 1e-9 {
                v.iter_mut().for_each(|x| *x *= scale);
                v_norm2 *= scale * scale;
                scale = 1.0;
            }
        }
    }
    let w: Vec<f64> = v.iter().map(|x| x * scale).collect();
    LinearModel::from_local(set, &w[..d], w[d])
}

/// Averaged perceptron: mistake-driven updates for up to `m_iter` epochs
/// (stopping after an error-free epoch); returns the average of the weight
/// vector over every visited example.
pub(crate) fn fit_avg_perceptron(spec: &LearnerSpec, set: &TrainSet) -> LinearModel {
    let rate = spec.get("learning_rate");
    let epochs = spec.get_usize("m_iter");
    let d = set.n_features();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (mut w, mut b) = (vec![0.0; d], 0.0);
    // u accumulates c-weighted updates; average = w - u / c
    let (mut u, mut ub) = (vec![0.0; d], 0.0);
    let mut c = 1.0f64;
    let mut order: Vec<usize> = (0..set.len()).collect();
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        let mut mistakes = 0;
        for &i in &order {
            let row = &set.rows[i];
            let y = set.y(i);
            if y * (dot_local(&w, row) + b) <= 0.0 {
                for &(j, x) in row {
                    w[j as usize] += rate * y * x;
                    u[j as usize] += c * rate * y * x;
                }
                b += rate * y;
                ub += c * rate * y;
                mistakes += 1;
            }
            c += 1.0;
        }
        if mistakes == 0 {
            break;
        }
    }
    let avg: Vec<f64> = w.iter().zip(&u).map(|(wv, uv)| wv - uv / c).collect();
    LinearModel::from_local(set, &avg, b - ub / c)
}

/// Epoch budget of each perceptron drawn for the Bayes point estimate.
const BPM_EPOCHS: usize = 10;

/// Bayes point approximation: train `n_training_iter` plain perceptrons on
/// independently shuffled example orders, scale each to unit norm and
/// average them.
pub(crate) fn fit_bayes_point(spec: &LearnerSpec, set: &TrainSet) -> LinearModel {
    let samples = spec.get_usize("n_training_iter");
    let d = set.n_features();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut sum_w = vec![0.0; d];
    let mut sum_b = 0.0;
    let mut order: Vec<usize> = (0..set.len()).collect();
    for _ in 0..samples {
        let (mut w, mut b) = (vec![0.0; d], 0.0);
        for _ in 0..BPM_EPOCHS {
            order.shuffle(&mut rng);
            let mut mistakes = 0;
            for &i in &order {
                let row = &set.rows[i];
                let y = set.y(i);
                if y * (dot_local(&w, row) + b) <= 0.0 {
                    for &(j, x) in row {
                        w[j as usize] += y * x;
                    }
                    b += y;
                    mistakes += 1;
                }
            }
            if mistakes == 0 {
                break;
            }
        }
        let norm = (w.iter().map(|x| x * x).sum::<f64>() + b * b).sqrt();
        if norm > 0.0 {
            for (s, x) in sum_w.iter_mut().zip(&w) {
                *s += x / norm;
            }
            sum_b += b / norm;
        }
    }
    let k = samples as f64;
    let avg: Vec<f64> = sum_w.iter().map(|s| s / k).collect();
    LinearModel::from_local(set, &avg, sum_b / k)
}
