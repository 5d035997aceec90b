use serde::{Deserialize, Serialize};

use super::features::SparseRow;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyper {
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
    #[serde(default)]
    pub bigrams: bool,
}

impl Default for Hyper {
    fn default() -> Self {
        Self {
            epochs: 50,
            learning_rate: 0.1,
            l2: 1e-4,
            bigrams: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub l2_lambda: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Training loss before each epoch's update, then the final loss.
    #[serde(skip)]
    pub loss_history: Vec<f64>,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn score(w: &[f64], b: f64, x: &SparseRow) -> f64 {
    b + x.iter().map(|&(i, v)| w[i] * v).sum::<f64>()
}

/// Mean logistic loss plus `l2 / 2 * |w|^2` (bias not regularized), with
/// its gradient in `w` and `b`. Labels are 0 or 1.
pub fn loss_and_gradient(w: &[f64], b: f64, xs: &[SparseRow], ys: &[f64], l2: f64) -> (f64, Vec<f64>, f64) {
    let n = xs.len().max(1) as f64;
    let mut loss = 0.0;
    let mut gw = vec![0.0; w.len()];
    let mut gb = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let z = score(w, b, x);
        // -[y ln p + (1-y) ln(1-p)] = softplus(z) - y z
        loss += softplus(z) - y * z;
        let r = sigmoid(z) - y;
        gb += r;
        for &(i, v) in x {
            gw[i] += r * v;
        }
    }
    loss /= n;
    gb /= n;
    let mut reg = 0.0;
    for (g, &wi) in gw.iter_mut().zip(w) {
        *g = *g / n + l2 * wi;
        reg += wi * wi;
    }
    (loss + 0.5 * l2 * reg, gw, gb)
}

/// Full-batch gradient descent from zero weights.
pub fn fit(xs: &[SparseRow], ys: &[f64], dim: usize, hyper: &Hyper) -> LinearModel {
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut history = Vec::with_capacity(hyper.epochs + 1);
    for _ in 0..hyper.epochs {
        let (loss, gw, gb) = loss_and_gradient(&w, b, xs, ys, hyper.l2);
        history.push(loss);
        for (wi, g) in w.iter_mut().zip(&gw) {
            *wi -= hyper.learning_rate * g;
        }
        b -= hyper.learning_rate * gb;
    }
    history.push(loss_and_gradient(&w, b, xs, ys, hyper.l2).0);
    LinearModel {
        weights: w,
        bias: b,
        l2_lambda: hyper.l2,
        epochs: hyper.epochs,
        learning_rate: hyper.learning_rate,
        loss_history: history,
    }
}

impl LinearModel {
    pub fn probability(&self, x: &SparseRow) -> f64 {
        sigmoid(score(&self.weights, self.bias, x))
    }

    pub fn predict(&self, x: &SparseRow) -> bool {
        self.probability(x) > 0.5
    }
}
