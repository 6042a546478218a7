//! Exact k-nearest-neighbour classifier under Euclidean distance.

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::sparse::SparseVec;

const K: usize = Label::COUNT;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    k: usize,
    rows: Vec<SparseVec>,
    labels: Vec<u8>,
}

impl Knn {
    pub fn fit(x: &[SparseVec], y: &[usize], k: usize) -> Self {
        Self {
            k: k.max(1),
            rows: x.to_vec(),
            labels: y.iter().map(|&c| c as u8).collect(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Indices of the `k` nearest stored rows ordered by (distance, index).
    pub fn neighbours(&self, x: &SparseVec) -> Vec<usize> {
        let mut d: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| (r.squared_distance(x), i))
            .collect();
        let k = self.k.min(d.len());
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < d.len() {
            d.select_nth_unstable_by(k, cmp);
            d.truncate(k);
        }
        d.sort_unstable_by(cmp);
        d.into_iter().map(|(_, i)| i).collect()
    }

    /// Vote share of each class among the neighbours.
    pub fn scores(&self, x: &SparseVec) -> [f64; K] {
        let nb = self.neighbours(x);
        let mut votes = [0.0; K];
        for &i in &nb {
            votes[self.labels[i] as usize] += 1.0;
        }
        let n = nb.len().max(1) as f64;
        votes.map(|v| v / n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::argmax;

    #[test]
    fn one_neighbour_returns_own_label() {
        let x: Vec<SparseVec> = (0..10).map(|i| SparseVec::from_dense(&[i as f64, 0.5])).collect();
        let y: Vec<usize> = (0..10).map(|i| i % 3).collect();
        let m = Knn::fit(&x, &y, 1);
        for (r, &c) in x.iter().zip(&y) {
            assert_eq!(argmax(&m.scores(r)), c);
        }
    }

    #[test]
    fn distance_ties_prefer_lower_index() {
        let x = vec![SparseVec::from_dense(&[1.0]), SparseVec::from_dense(&[-1.0])];
        let m = Knn::fit(&x, &[2, 0], 1);
        assert_eq!(m.neighbours(&SparseVec::zeros(1)), vec![0]);
    }

    #[test]
    fn vote_ties_prefer_lower_label() {
        let x: Vec<SparseVec> = (0..4).map(|i| SparseVec::from_dense(&[i as f64])).collect();
        let m = Knn::fit(&x, &[2, 2, 1, 1], 4);
        assert_eq!(argmax(&m.scores(&x[0])), 1);
    }
}
