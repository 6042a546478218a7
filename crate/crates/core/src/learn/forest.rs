//! Bagged CART ensemble with per-split feature subsampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::exec::{derive_seed, Exec};
use crate::sparse::SparseVec;

use super::tree::{DecisionTree, GrowParams};

const K: usize = Label::COUNT;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
}

impl RandomForest {
    /// Tree `t` draws its bootstrap sample and feature subsets from
    /// `ChaCha8Rng::seed_from_u64(derive_seed(seed, t))`, so the forest does
    /// not depend on how trees are scheduled.
    pub fn fit(
        x: &[SparseVec],
        y: &[usize],
        n_trees: usize,
        bootstrap: bool,
        params: GrowParams,
        seed: u64,
        exec: Exec,
    ) -> Self {
        let n = x.len();
        let trees = exec.map_range(n_trees, |t| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, t as u64));
            if bootstrap {
                let mut w = vec![0.0; n];
                for _ in 0..n {
                    w[rng.gen_range(0..n)] += 1.0;
                }
                DecisionTree::fit(x, y, Some(&w), params, &mut rng)
            } else {
                DecisionTree::fit(x, y, None, params, &mut rng)
            }
        });
        Self { trees }
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    /// Fraction of trees voting for each class.
    pub fn scores(&self, x: &SparseVec) -> [f64; K] {
        let mut votes = [0.0; K];
        for t in &self.trees {
            votes[t.predict_class(x)] += 1.0;
        }
        let n = self.trees.len().max(1) as f64;
        votes.map(|v| v / n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::tree::MaxFeatures;

    #[test]
    fn schedule_does_not_change_the_forest() {
        let x: Vec<SparseVec> = (0..40)
            .map(|i| SparseVec::from_dense(&[(i % 7) as f64, (i % 5) as f64, (i % 3) as f64]))
            .collect();
        let y: Vec<usize> = (0..40).map(|i| (i * 7 % 11) % 3).collect();
        let p = GrowParams {
            max_features: MaxFeatures::Sqrt,
            ..Default::default()
        };
        let a = RandomForest::fit(&x, &y, 12, true, p, 9, Exec::Sequential);
        let b = RandomForest::fit(&x, &y, 12, true, p, 9, Exec::Parallel);
        assert_eq!(a, b);
        let c = RandomForest::fit(&x, &y, 12, true, p, 10, Exec::Sequential);
        assert_ne!(a, c);
    }
}
