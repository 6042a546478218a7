use serde::{Deserialize, Serialize};

use super::vocab::Vocabulary;
use crate::sparse::SparseVec;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IdfMode {
    /// `ln((1 + N) / (1 + df)) + 1`
    #[default]
    Smooth,
    /// `ln(N / df)`; zero for terms present in every document.
    Raw,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdfTable {
    pub idf: Vec<f64>,
    pub n_docs: usize,
    pub mode: IdfMode,
}

impl IdfTable {
    /// Document frequencies over `docs` (each already cut into terms).
    pub fn fit<'a, I>(docs: I, vocab: &Vocabulary, mode: IdfMode) -> Self
    where
        I: IntoIterator<Item = &'a [String]>,
    {
        let mut df = vec![0usize; vocab.len()];
        let mut n_docs = 0usize;
        for d in docs {
            n_docs += 1;
            for i in vocab.binary_vector(d).indices {
                df[i as usize] += 1;
            }
        }
        let n = n_docs as f64;
        let idf = df
            .iter()
            .map(|&d| match mode {
                IdfMode::Smooth => ((1.0 + n) / (1.0 + d as f64)).ln() + 1.0,
                IdfMode::Raw if d == 0 => 0.0,
                IdfMode::Raw => (n / d as f64).ln(),
            })
            .collect();
        Self { idf, n_docs, mode }
    }

    /// IDF of a term never seen during fitting (document frequency 0).
    pub fn unseen(&self) -> f64 {
        match self.mode {
            IdfMode::Smooth => (1.0 + self.n_docs as f64).ln() + 1.0,
            IdfMode::Raw => 0.0,
        }
    }

    /// `x_j = tf_j·idf_j / ‖tf·idf‖₂`; an all-zero vector stays zero.
    pub fn transform(&self, vocab: &Vocabulary, doc: &[String]) -> SparseVec {
        let mut v = vocab.count_vector(doc);
        for (k, &i) in v.indices.iter().enumerate() {
            v.values[k] *= self.idf[i as usize];
        }
        let norm = v.norm();
        if norm > 0.0 {
            v.scale(1.0 / norm);
        } else {
            v.scale(0.0);
        }
        v
    }
}
