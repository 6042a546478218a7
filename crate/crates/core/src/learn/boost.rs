//! SAMME (multiclass AdaBoost) over depth-1 trees.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::sparse::SparseVec;

use super::tree::{DecisionTree, GrowParams};

const K: usize = Label::COUNT;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaBoost {
    stumps: Vec<DecisionTree>,
    alphas: Vec<f64>,
}

impl AdaBoost {
    pub fn fit(x: &[SparseVec], y: &[usize], rounds: usize, learning_rate: f64) -> Result<Self> {
        Self::fit_observed(x, y, rounds, learning_rate, |_, _| {})
    }

    /// Like [`AdaBoost::fit`], calling `observe(round, weights)` with the
    /// normalized sample weights after every round's update.
    pub fn fit_observed<F>(
        x: &[SparseVec],
        y: &[usize],
        rounds: usize,
        learning_rate: f64,
        mut observe: F,
    ) -> Result<Self>
    where
        F: FnMut(usize, &[f64]),
    {
        let mut present = [false; K];
        for &c in y {
            present[c] = true;
        }
        let k = present.iter().filter(|&&p| p).count();
        if k < 2 {
            return Err(Error::InvalidInput(
                "boosting needs at least two classes in the training set".into(),
            ));
        }
        let n = x.len();
        let mut w = vec![1.0 / n as f64; n];
        let params = GrowParams {
            max_depth: Some(1),
            ..Default::default()
        };
        let chance = 1.0 - 1.0 / k as f64;
        let mut model = Self {
            stumps: Vec::new(),
            alphas: Vec::new(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for round in 0..rounds {
            let stump = DecisionTree::fit(x, y, Some(&w), params, &mut rng);
            let miss: Vec<bool> = x.iter().zip(y).map(|(r, &c)| stump.predict_class(r) != c).collect();
            let total: f64 = w.iter().sum();
            let err: f64 = w.iter().zip(&miss).filter(|(_, &m)| m).map(|(v, _)| v).sum::<f64>() / total;
            if err <= 0.0 {
                model.stumps.push(stump);
                model.alphas.push(1.0);
                observe(round, &w);
                break;
            }
            if err >= chance {
                if model.stumps.is_empty() {
                    model.stumps.push(stump);
                    model.alphas.push(1.0);
                }
                break;
            }
            let alpha = learning_rate * (((1.0 - err) / err).ln() + ((k - 1) as f64).ln());
            for (v, &m) in w.iter_mut().zip(&miss) {
                if m && *v > 0.0 {
                    *v *= alpha.exp();
                }
            }
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= s);
            model.stumps.push(stump);
            model.alphas.push(alpha);
            observe(round, &w);
        }
        Ok(model)
    }

    pub fn n_rounds(&self) -> usize {
        self.stumps.len()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// Alpha-weighted votes of the first `rounds` stumps, normalized by the
    /// total alpha.
    pub fn scores_upto(&self, x: &SparseVec, rounds: usize) -> [f64; K] {
        let mut s = [0.0; K];
        let mut total = 0.0;
        for (t, a) in self.stumps.iter().zip(&self.alphas).take(rounds) {
            s[t.predict_class(x)] += a;
            total += a;
        }
        if total > 0.0 {
            s.map(|v| v / total)
        } else {
            s
        }
    }

    pub fn scores(&self, x: &SparseVec) -> [f64; K] {
        self.scores_upto(x, self.stumps.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_stay_normalized() {
        let x: Vec<SparseVec> = (0..30).map(|i| SparseVec::from_dense(&[(i * 7 % 30) as f64, (i % 4) as f64])).collect();
        let y: Vec<usize> = (0..30).map(|i| (i * 13 % 17) % 3).collect();
        let mut sums = Vec::new();
        AdaBoost::fit_observed(&x, &y, 25, 1.0, |_, w| sums.push(w.iter().sum::<f64>())).unwrap();
        assert!(!sums.is_empty());
        for s in sums {
            assert!((s - 1.0).abs() < 1e-12, "{s}");
        }
    }

    #[test]
    fn single_class_is_rejected() {
        let x = vec![SparseVec::from_dense(&[1.0]); 3];
        assert!(AdaBoost::fit(&x, &[1, 1, 1], 5, 1.0).is_err());
    }

    #[test]
    fn perfect_stump_stops_early() {
        let x: Vec<SparseVec> = (0..6).map(|i| SparseVec::from_dense(&[i as f64])).collect();
        let m = AdaBoost::fit(&x, &[0, 0, 0, 2, 2, 2], 50, 1.0).unwrap();
        assert_eq!(m.n_rounds(), 1);
    }
}
