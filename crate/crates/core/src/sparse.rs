//! Sparse feature vectors and a row-major matrix built from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sparse vector with strictly increasing indices and no stored zeros.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVec {
    pub dim: usize,
    pub indices: Vec<u32>,
    pub values: Vec<f64>,
}

impl SparseVec {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn from_dense(values: &[f64]) -> Self {
        let mut v = Self::zeros(values.len());
        for (i, &x) in values.iter().enumerate() {
            if x != 0.0 {
                v.indices.push(i as u32);
                v.values.push(x);
            }
        }
        v
    }

    /// Builds from unsorted `(index, value)` pairs, summing duplicates and
    /// dropping zeros.
    pub fn from_pairs(dim: usize, mut pairs: Vec<(u32, f64)>) -> Self {
        pairs.sort_by_key(|p| p.0);
        let mut v = Self::zeros(dim);
        for (i, x) in pairs {
            debug_assert!((i as usize) < dim);
            if v.indices.last() == Some(&i) {
                *v.values.last_mut().unwrap() += x;
            } else {
                v.indices.push(i);
                v.values.push(x);
            }
        }
        v.prune();
        v
    }

    fn prune(&mut self) {
        let mut k = 0;
        for j in 0..self.indices.len() {
            if self.values[j] != 0.0 {
                self.indices[k] = self.indices[j];
                self.values[k] = self.values[j];
                k += 1;
            }
        }
        self.indices.truncate(k);
        self.values.truncate(k);
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn get(&self, index: usize) -> f64 {
        match self.indices.binary_search(&(index as u32)) {
            Ok(k) => self.values[k],
            Err(_) => 0.0,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().map(|&i| i as usize).zip(self.values.iter().copied())
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.dim];
        for (i, x) in self.iter() {
            d[i] = x;
        }
        d
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn scale(&mut self, k: f64) {
        for x in &mut self.values {
            *x *= k;
        }
        self.prune();
    }

    /// Concatenates blocks, shifting indices by the running dimension.
    pub fn concat(parts: &[&SparseVec]) -> SparseVec {
        let mut out = SparseVec::zeros(parts.iter().map(|p| p.dim).sum());
        let mut offset = 0u32;
        for p in parts {
            out.indices.extend(p.indices.iter().map(|&i| i + offset));
            out.values.extend_from_slice(&p.values);
            offset += p.dim as u32;
        }
        out
    }

    pub fn dot_dense(&self, w: &[f64]) -> f64 {
        self.iter().map(|(i, x)| x * w[i]).sum()
    }

    /// Squared Euclidean distance, accumulated in increasing index order.
    pub fn squared_distance(&self, other: &SparseVec) -> f64 {
        let (mut i, mut j) = (0, 0);
        let mut acc = 0.0;
        while i < self.indices.len() || j < other.indices.len() {
            let a = self.indices.get(i).copied().unwrap_or(u32::MAX);
            let b = other.indices.get(j).copied().unwrap_or(u32::MAX);
            let d = if a == b {
                i += 1;
                j += 1;
                self.values[i - 1] - other.values[j - 1]
            } else if a < b {
                i += 1;
                self.values[i - 1]
            } else {
                j += 1;
                -other.values[j - 1]
            };
            acc += d * d;
        }
        acc
    }
}

/// Row-major sparse matrix; every row has the same dimension.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    dim: usize,
    rows: Vec<SparseVec>,
}

impl SparseMatrix {
    pub fn from_rows(rows: Vec<SparseVec>) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.dim);
        if let Some(bad) = rows.iter().find(|r| r.dim != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.dim,
            });
        }
        Ok(Self { dim, rows })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> &SparseVec {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[SparseVec] {
        &self.rows
    }

    /// Mean number of stored entries per row divided by the dimension.
    pub fn density(&self) -> f64 {
        if self.rows.is_empty() || self.dim == 0 {
            return 0.0;
        }
        let nnz: usize = self.rows.iter().map(SparseVec::nnz).sum();
        nnz as f64 / (self.rows.len() * self.dim) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basics() {
        let v = SparseVec::from_pairs(5, vec![(3, 1.0), (1, 2.0), (3, 1.5), (4, 0.0)]);
        assert_eq!(v.indices, vec![1, 3]);
        assert_eq!(v.values, vec![2.0, 2.5]);
        assert_eq!(v.get(3), 2.5);
        assert_eq!(v.get(0), 0.0);
        let c = SparseVec::concat(&[&v, &SparseVec::from_dense(&[0.0, 7.0])]);
        assert_eq!(c.dim, 7);
        assert_eq!(c.to_dense(), vec![0.0, 2.0, 0.0, 2.5, 0.0, 0.0, 7.0]);
        assert!(SparseMatrix::from_rows(vec![SparseVec::zeros(2), SparseVec::zeros(3)]).is_err());
    }

    proptest! {
        #[test]
        fn distance_matches_dense(a in proptest::collection::vec(-3i8..3, 8), b in proptest::collection::vec(-3i8..3, 8)) {
            let da: Vec<f64> = a.iter().map(|&x| f64::from(x) * 0.5).collect();
            let db: Vec<f64> = b.iter().map(|&x| f64::from(x) * 0.5).collect();
            let dense: f64 = da.iter().zip(&db).map(|(x, y)| (x - y) * (x - y)).sum();
            let s = SparseVec::from_dense(&da).squared_distance(&SparseVec::from_dense(&db));
            prop_assert_eq!(s, dense);
        }
    }
}
