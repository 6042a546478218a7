use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseVec;

/// What a document is cut into before n-gram extraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Analyzer {
    /// Stemmed word tokens.
    Word,
    /// Characters of the punctuation-free, unstemmed sentence, spaces included.
    Char,
}

/// Extracts contiguous n-grams. Word grams are joined with a single space.
pub fn grams(units: &[String], n: usize) -> Vec<String> {
    if n == 0 || units.len() < n {
        return Vec::new();
    }
    units.windows(n).map(|w| w.join(" ")).collect()
}

/// Contiguous char n-grams of `text`, spaces included.
pub fn char_grams(text: &str, n: usize) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    if n == 0 || chars.len() < n {
        return Vec::new();
    }
    chars.windows(n).map(|w| w.iter().collect()).collect()
}

/// Term universe with lexicographically ordered, dense column indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, u32>,
}

impl From<Vec<String>> for Vocabulary {
    fn from(terms: Vec<String>) -> Self {
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Self { terms, index }
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.terms
    }
}

impl Vocabulary {
    /// Collects every term of every document. Errors on an empty corpus.
    pub fn fit<'a, I>(docs: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [String]>,
    {
        let mut set = BTreeSet::new();
        let mut n_docs = 0usize;
        for d in docs {
            n_docs += 1;
            set.extend(d.iter().cloned());
        }
        if n_docs == 0 || set.is_empty() {
            return Err(Error::InvalidInput("cannot fit a vocabulary on an empty corpus".into()));
        }
        Ok(Vocabulary::from(set.into_iter().collect::<Vec<_>>()))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, term: &str) -> Option<usize> {
        self.index.get(term).map(|&i| i as usize)
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    /// Raw in-vocabulary term counts. Out-of-vocabulary terms are dropped.
    pub fn count_vector(&self, doc: &[String]) -> SparseVec {
        let pairs = doc
            .iter()
            .filter_map(|t| self.index.get(t.as_str()).map(|&i| (i, 1.0)))
            .collect();
        SparseVec::from_pairs(self.len(), pairs)
    }

    /// 1.0 for every vocabulary term that occurs at least once.
    pub fn binary_vector(&self, doc: &[String]) -> SparseVec {
        let mut v = self.count_vector(doc);
        v.values.iter_mut().for_each(|x| *x = 1.0);
        v
    }
}
