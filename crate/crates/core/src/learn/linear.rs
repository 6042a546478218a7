//! One-vs-rest linear classifiers: hinge loss (Pegasos) and logistic loss (SGD).
//!
//! Features are divided by their maximum absolute training value before
//! fitting; the scale is stored in the model and applied at prediction time.
//! Sparsity is preserved and all features land in `[-1, 1]`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::exec::{derive_seed, Exec};
use crate::sparse::SparseVec;

const K: usize = Label::COUNT;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinearLoss {
    Hinge,
    Logistic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearParams {
    pub loss: LinearLoss,
    pub epochs: usize,
    /// Hinge: `C`, with `lambda = 1 / (C * n)`. Logistic: initial step size.
    pub c_or_lr: f64,
    /// L2 strength for the logistic loss.
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    loss: LinearLoss,
    scale: Vec<f64>,
    /// One weight vector per class; `None` for classes absent from training.
    weights: Vec<Option<(Vec<f64>, f64)>>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + exp(-m))` without overflow.
fn softplus_neg(m: f64) -> f64 {
    if m > 0.0 {
        (-m).exp().ln_1p()
    } else {
        -m + m.exp().ln_1p()
    }
}

fn split_params(params: &[f64]) -> (&[f64], f64) {
    let (w, b) = params.split_at(params.len() - 1);
    (w, b[0])
}

fn dot(w: &[f64], x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// `ln(1 + exp(-y (w.x + b))) + alpha/2 |w|^2`, with `params = [w.., b]`
/// and `y` in {-1, +1}.
pub fn logistic_loss(params: &[f64], x: &[f64], y: f64, alpha: f64) -> f64 {
    let (w, b) = split_params(params);
    softplus_neg(y * (dot(w, x) + b)) + 0.5 * alpha * dot(w, w)
}

pub fn logistic_gradient(params: &[f64], x: &[f64], y: f64, alpha: f64) -> Vec<f64> {
    let (w, b) = split_params(params);
    let g = -y * sigmoid(-y * (dot(w, x) + b));
    let mut out: Vec<f64> = w.iter().zip(x).map(|(wi, xi)| g * xi + alpha * wi).collect();
    out.push(g);
    out
}

/// `max(0, 1 - y (w.x + b)) + lambda/2 |w|^2`.
pub fn hinge_loss(params: &[f64], x: &[f64], y: f64, lambda: f64) -> f64 {
    let (w, b) = split_params(params);
    (1.0 - y * (dot(w, x) + b)).max(0.0) + 0.5 * lambda * dot(w, w)
}

/// Subgradient of [`hinge_loss`]; at the kink the zero branch is taken.
pub fn hinge_subgradient(params: &[f64], x: &[f64], y: f64, lambda: f64) -> Vec<f64> {
    let (w, b) = split_params(params);
    let active = y * (dot(w, x) + b) < 1.0;
    let g = if active { -y } else { 0.0 };
    let mut out: Vec<f64> = w.iter().zip(x).map(|(wi, xi)| g * xi + lambda * wi).collect();
    out.push(g);
    out
}

/// Weight vector stored as `s * v` so that L2 shrinkage is O(1).
struct Scaled {
    v: Vec<f64>,
    s: f64,
}

impl Scaled {
    fn dot(&self, x: &SparseVec) -> f64 {
        self.s * x.dot_dense(&self.v)
    }

    fn shrink(&mut self, factor: f64) {
        if factor <= 0.0 {
            self.v.iter_mut().for_each(|v| *v = 0.0);
            self.s = 1.0;
            return;
        }
        self.s *= factor;
        if self.s < 1e-9 {
            let s = self.s;
            self.v.iter_mut().for_each(|v| *v *= s);
            self.s = 1.0;
        }
    }

    /// `w += c * x`.
    fn add(&mut self, c: f64, x: &SparseVec) {
        let k = c / self.s;
        for (i, v) in x.iter() {
            self.v[i] += k * v;
        }
    }

    fn into_vec(self) -> Vec<f64> {
        let s = self.s;
        self.v.into_iter().map(|v| v * s).collect()
    }
}

fn fit_binary(x: &[SparseVec], y: &[f64], p: &LinearParams, seed: u64) -> (Vec<f64>, f64) {
    let n = x.len();
    let dim = x.first().map_or(0, |r| r.dim);
    let mut w = Scaled { v: vec![0.0; dim], s: 1.0 };
    let mut b = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut t = 0usize;
    match p.loss {
        LinearLoss::Hinge => {
            // Pegasos; the bias is an extra always-one feature and is
            // regularized with the rest.
            let lambda = 1.0 / (p.c_or_lr * n as f64);
            let radius = 1.0 / lambda.sqrt();
            let mut sq = 0.0;
            for _ in 0..p.epochs {
                order.shuffle(&mut rng);
                for &i in &order {
                    t += 1;
                    let eta = 1.0 / (lambda * t as f64);
                    let margin = y[i] * (w.dot(&x[i]) + b);
                    let factor = 1.0 - eta * lambda;
                    let reset = factor <= 0.0;
                    w.shrink(factor);
                    if reset {
                        b = 0.0;
                        sq = 0.0;
                    } else {
                        b *= factor;
                        sq *= factor * factor;
                    }
                    if margin < 1.0 {
                        let c = eta * y[i];
                        let dot_wx = w.dot(&x[i]) + b;
                        let xx: f64 = x[i].values.iter().map(|v| v * v).sum::<f64>() + 1.0;
                        sq += 2.0 * c * dot_wx + c * c * xx;
                        w.add(c, &x[i]);
                        b += c;
                    }
                    let norm = sq.max(0.0).sqrt();
                    if norm > radius {
                        let r = radius / norm;
                        w.shrink(r);
                        b *= r;
                        sq *= r * r;
                    }
                }
            }
        }
        LinearLoss::Logistic => {
            for _ in 0..p.epochs {
                order.shuffle(&mut rng);
                for &i in &order {
                    let eta = p.c_or_lr / (1.0 + t as f64 / n as f64);
                    t += 1;
                    let z = w.dot(&x[i]) + b;
                    let g = -y[i] * sigmoid(-y[i] * z);
                    w.shrink(1.0 - eta * p.alpha);
                    w.add(-eta * g, &x[i]);
                    b -= eta * g;
                }
            }
        }
    }
    (w.into_vec(), b)
}

impl LinearModel {
    pub fn fit(x: &[SparseVec], y: &[usize], p: &LinearParams, seed: u64, exec: Exec) -> Self {
        let dim = x.first().map_or(0, |r| r.dim);
        let mut scale = vec![0.0f64; dim];
        for r in x {
            for (i, v) in r.iter() {
                scale[i] = scale[i].max(v.abs());
            }
        }
        scale.iter_mut().filter(|s| **s == 0.0).for_each(|s| *s = 1.0);
        let xs: Vec<SparseVec> = x.iter().map(|r| apply_scale(r, &scale)).collect();
        let mut present = [false; K];
        for &c in y {
            present[c] = true;
        }
        let weights = exec.map_range(K, |k| {
            present[k].then(|| {
                let yk: Vec<f64> = y.iter().map(|&c| if c == k { 1.0 } else { -1.0 }).collect();
                fit_binary(&xs, &yk, p, derive_seed(seed, k as u64))
            })
        });
        Self {
            loss: p.loss,
            scale,
            weights,
        }
    }

    pub fn loss(&self) -> LinearLoss {
        self.loss
    }

    /// Per-class decision values; `-inf` for classes never seen in training.
    pub fn scores(&self, x: &SparseVec) -> [f64; K] {
        let xs = apply_scale(x, &self.scale);
        let mut s = [f64::NEG_INFINITY; K];
        for (k, w) in self.weights.iter().enumerate() {
            if let Some((w, b)) = w {
                s[k] = xs.dot_dense(w) + b;
            }
        }
        s
    }
}

fn apply_scale(x: &SparseVec, scale: &[f64]) -> SparseVec {
    let mut out = x.clone();
    for (i, v) in out.indices.iter().zip(out.values.iter_mut()) {
        *v /= scale[*i as usize];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::argmax;

    #[test]
    fn softplus_is_stable() {
        assert!((softplus_neg(0.0) - 2f64.ln()).abs() < 1e-15);
        assert!(softplus_neg(1000.0) >= 0.0);
        assert!((softplus_neg(-1000.0) - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn symmetric_data_gives_symmetric_gradient() {
        let params = vec![0.0, 0.0, 0.0];
        let g1 = logistic_gradient(&params, &[1.0, 2.0], 1.0, 0.1);
        let g2 = logistic_gradient(&params, &[-1.0, -2.0], -1.0, 0.1);
        assert_eq!(&g1[..2], &g2[..2]);
        assert_eq!(g1[2], -g2[2]);
    }

    #[test]
    fn both_losses_separate_blobs() {
        let x: Vec<SparseVec> = (0..40)
            .map(|i| {
                let c = (i % 2) as f64;
                SparseVec::from_dense(&[c * 4.0 + (i % 5) as f64 * 0.1, 1.0 - c + (i % 3) as f64 * 0.1])
            })
            .collect();
        let y: Vec<usize> = (0..40).map(|i| if i % 2 == 0 { 0 } else { 2 }).collect();
        for (loss, c) in [(LinearLoss::Hinge, 1.0), (LinearLoss::Logistic, 0.01)] {
            let p = LinearParams {
                loss,
                epochs: 20,
                c_or_lr: c,
                alpha: 1e-4,
            };
            let m = LinearModel::fit(&x, &y, &p, 3, Exec::Sequential);
            for (r, &c) in x.iter().zip(&y) {
                assert_eq!(argmax(&m.scores(r)), c, "{loss:?}");
            }
            assert_eq!(m.scores(&x[0])[1], f64::NEG_INFINITY);
        }
    }
}
