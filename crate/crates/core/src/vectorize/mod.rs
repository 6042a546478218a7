//! Language-model vectors for sentence pairs: binary bag-of-words, n-gram
//! counts, TF-IDF (word, char, union), skip-gram embeddings and
//! TF-IDF-weighted embeddings.
//!
//! A pair becomes `[v(premise) | v(hypothesis) | contra]`, where the
//! contradiction block is present iff `include_contra` is set. All fitting
//! happens on training sentences; transforms never touch fitted state.

mod sgns;
mod tfidf;
mod vocab;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use self::sgns::{
    sgns_gradient, sgns_loss, sgns_step, train_sgns, EmbeddingTable, SgnsConfig, SgnsGradient,
};
pub use self::tfidf::{IdfMode, IdfTable};
pub use self::vocab::{char_grams, grams, Analyzer, Vocabulary};

use crate::contra::ContraVector;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::sparse::SparseVec;
use crate::textproc::Analyzed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Bow,
    Ngram,
    Tfidf,
    TfidfUnion,
    W2v,
    W2vTfidf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VectorizerSpec {
    pub scheme: Scheme,
    pub analyzer: Analyzer,
    pub n: usize,
    pub include_contra: bool,
}

/// The thirteen language-model rows of the experiment grid, in report order.
pub const GRID_ROWS: [&str; 13] = [
    "tfidf-char",
    "tfidf-word",
    "tfidf-union",
    "bow-char",
    "bow-word",
    "ngram-word-1",
    "ngram-word-2",
    "ngram-word-3",
    "ngram-char-1",
    "ngram-char-2",
    "ngram-char-3",
    "w2v",
    "w2v-tfidf",
];

impl VectorizerSpec {
    pub fn new(scheme: Scheme, analyzer: Analyzer, n: usize) -> Result<Self> {
        let spec = Self {
            scheme,
            analyzer,
            n,
            include_contra: true,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        match self.scheme {
            Scheme::Ngram if self.n == 0 => bad("n-gram order must be at least 1".into()),
            Scheme::Ngram => Ok(()),
            _ if self.n != 1 => bad(format!("{:?} uses unigrams only (n = {})", self.scheme, self.n)),
            Scheme::W2v | Scheme::W2vTfidf if self.analyzer != Analyzer::Word => {
                bad("embedding schemes are word-level".into())
            }
            _ => Ok(()),
        }
    }

    pub fn with_contra(mut self, include: bool) -> Self {
        self.include_contra = include;
        self
    }

    /// Canonical row name, e.g. `ngram-char-2` or `tfidf-union`.
    pub fn name(&self) -> String {
        let a = match self.analyzer {
            Analyzer::Word => "word",
            Analyzer::Char => "char",
        };
        let base = match self.scheme {
            Scheme::Bow => format!("bow-{a}"),
            Scheme::Ngram => format!("ngram-{a}-{}", self.n),
            Scheme::Tfidf => format!("tfidf-{a}"),
            Scheme::TfidfUnion => "tfidf-union".into(),
            Scheme::W2v => "w2v".into(),
            Scheme::W2vTfidf => "w2v-tfidf".into(),
        };
        if self.include_contra {
            base
        } else {
            format!("{base}+nocontra")
        }
    }

    /// Row label in the style of the published results table.
    pub fn display_label(&self) -> String {
        let a = match self.analyzer {
            Analyzer::Word => "Words",
            Analyzer::Char => "Chars",
        };
        let order = ["", "Unigram", "Bigram", "Trigram"];
        match self.scheme {
            Scheme::Tfidf => format!("TFIDF {}", &a[..a.len() - 1]),
            Scheme::TfidfUnion => "TFIDF Union".into(),
            Scheme::Bow => format!("Bag of Words {a}"),
            Scheme::Ngram => match order.get(self.n) {
                Some(o) => format!("N-Grams {a} {o}"),
                None => format!("N-Grams {a} {}-gram", self.n),
            },
            Scheme::W2v => "W2Vec word2vec".into(),
            Scheme::W2vTfidf => "W2Vec word2vec TF-IDF".into(),
        }
    }
}

impl fmt::Display for VectorizerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for VectorizerSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (body, include_contra) = match s.trim().strip_suffix("+nocontra") {
            Some(b) => (b, false),
            None => (s.trim(), true),
        };
        let parts: Vec<&str> = body.split('-').collect();
        let analyzer = |a: &str| match a {
            "word" | "words" => Ok(Analyzer::Word),
            "char" | "chars" => Ok(Analyzer::Char),
            _ => Err(Error::Config(format!("unknown vectorizer {s:?}"))),
        };
        let spec = match parts[..] {
            ["tfidf", "union"] => VectorizerSpec::new(Scheme::TfidfUnion, Analyzer::Word, 1),
            ["tfidf", a] => VectorizerSpec::new(Scheme::Tfidf, analyzer(a)?, 1),
            ["bow", a] => VectorizerSpec::new(Scheme::Bow, analyzer(a)?, 1),
            ["ngram", a, n] => {
                let n = n
                    .parse()
                    .map_err(|_| Error::Config(format!("bad n-gram order in {s:?}")))?;
                VectorizerSpec::new(Scheme::Ngram, analyzer(a)?, n)
            }
            ["w2v"] => VectorizerSpec::new(Scheme::W2v, Analyzer::Word, 1),
            ["w2v", "tfidf"] => VectorizerSpec::new(Scheme::W2vTfidf, Analyzer::Word, 1),
            _ => Err(Error::Config(format!("unknown vectorizer {s:?}"))),
        }?;
        Ok(spec.with_contra(include_contra))
    }
}

/// Units a sentence contributes for the given analyzer and order.
pub fn sentence_terms(s: &Analyzed, analyzer: Analyzer, n: usize) -> Vec<String> {
    match analyzer {
        Analyzer::Word => grams(&s.stems, n),
        Analyzer::Char => char_grams(&s.clean_text(), n),
    }
}

/// Mean of the known-word vectors, or an IDF-weighted mean when `idf` is
/// supplied (each occurrence weighs its term's IDF, so a word's total weight
/// is TF·IDF). No known words gives the zero vector.
pub fn sentence_embedding(
    tokens: &[String],
    table: &EmbeddingTable,
    idf: Option<(&Vocabulary, &IdfTable)>,
) -> Vec<f64> {
    let mut acc = vec![0.0; table.dim()];
    let mut total = 0.0;
    for t in tokens.iter().filter(|t| table.contains(t)) {
        let w = match idf {
            Some((vocab, tab)) => vocab.get(t).map_or(tab.unseen(), |i| tab.idf[i]),
            None => 1.0,
        };
        for (a, x) in acc.iter_mut().zip(table.vector(t)) {
            *a += w * x;
        }
        total += w;
    }
    if total > 0.0 {
        acc.iter_mut().for_each(|a| *a /= total);
    }
    acc
}

/// Options that affect fitting but not the spec identity.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FitOptions {
    pub idf_mode: IdfMode,
    pub sgns: SgnsConfig,
    /// Pre-trained embeddings used instead of training on the split.
    pub embeddings: Option<EmbeddingTable>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
enum Fitted {
    Counts { vocab: Vocabulary, binary: bool },
    Tfidf { vocab: Vocabulary, idf: IdfTable },
    Union { word: (Vocabulary, IdfTable), chars: (Vocabulary, IdfTable) },
    Embedding { table: EmbeddingTable, idf: Option<(Vocabulary, IdfTable)> },
}

/// A vectorizer spec together with the state fitted on training sentences.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedVectorizer {
    spec: VectorizerSpec,
    contra_dim: usize,
    fitted: Fitted,
}

fn fit_tfidf(
    sentences: &[&Analyzed],
    analyzer: Analyzer,
    mode: IdfMode,
) -> Result<(Vocabulary, IdfTable)> {
    let docs: Vec<Vec<String>> = sentences.iter().map(|s| sentence_terms(s, analyzer, 1)).collect();
    let vocab = Vocabulary::fit(docs.iter().map(Vec::as_slice))?;
    let idf = IdfTable::fit(docs.iter().map(Vec::as_slice), &vocab, mode);
    Ok((vocab, idf))
}

impl FittedVectorizer {
    /// Fits on the training pairs (both sentences of each pair are documents).
    pub fn fit(
        spec: VectorizerSpec,
        train: &[(Analyzed, Analyzed)],
        contra_dim: usize,
        opts: &FitOptions,
    ) -> Result<Self> {
        spec.validate()?;
        let sentences: Vec<&Analyzed> = train.iter().flat_map(|(p, h)| [p, h]).collect();
        let fitted = match spec.scheme {
            Scheme::Bow | Scheme::Ngram => {
                let docs: Vec<Vec<String>> = sentences
                    .iter()
                    .map(|s| sentence_terms(s, spec.analyzer, spec.n))
                    .collect();
                Fitted::Counts {
                    vocab: Vocabulary::fit(docs.iter().map(Vec::as_slice))?,
                    binary: spec.scheme == Scheme::Bow,
                }
            }
            Scheme::Tfidf => {
                let (vocab, idf) = fit_tfidf(&sentences, spec.analyzer, opts.idf_mode)?;
                Fitted::Tfidf { vocab, idf }
            }
            Scheme::TfidfUnion => Fitted::Union {
                word: fit_tfidf(&sentences, Analyzer::Word, opts.idf_mode)?,
                chars: fit_tfidf(&sentences, Analyzer::Char, opts.idf_mode)?,
            },
            Scheme::W2v | Scheme::W2vTfidf => {
                let table = match &opts.embeddings {
                    Some(t) => t.clone(),
                    None => {
                        let corpus: Vec<Vec<String>> = sentences.iter().map(|s| s.stems.clone()).collect();
                        train_sgns(&corpus, &opts.sgns)?
                    }
                };
                let idf = if spec.scheme == Scheme::W2vTfidf {
                    Some(fit_tfidf(&sentences, Analyzer::Word, opts.idf_mode)?)
                } else {
                    None
                };
                Fitted::Embedding { table, idf }
            }
        };
        Ok(Self {
            spec,
            contra_dim,
            fitted,
        })
    }

    pub fn spec(&self) -> &VectorizerSpec {
        &self.spec
    }

    /// Dimension of one sentence's language-model vector.
    pub fn lm_dim(&self) -> usize {
        match &self.fitted {
            Fitted::Counts { vocab, .. } | Fitted::Tfidf { vocab, .. } => vocab.len(),
            Fitted::Union { word, chars } => word.0.len() + chars.0.len(),
            Fitted::Embedding { table, .. } => table.dim(),
        }
    }

    /// Length of a full pair vector.
    pub fn pair_dim(&self) -> usize {
        2 * self.lm_dim() + if self.spec.include_contra { self.contra_dim } else { 0 }
    }

    pub fn embeddings(&self) -> Option<&EmbeddingTable> {
        match &self.fitted {
            Fitted::Embedding { table, .. } => Some(table),
            _ => None,
        }
    }

    pub fn transform_sentence(&self, s: &Analyzed) -> SparseVec {
        let spec = &self.spec;
        match &self.fitted {
            Fitted::Counts { vocab, binary } => {
                let terms = sentence_terms(s, spec.analyzer, spec.n);
                if *binary {
                    vocab.binary_vector(&terms)
                } else {
                    vocab.count_vector(&terms)
                }
            }
            Fitted::Tfidf { vocab, idf } => idf.transform(vocab, &sentence_terms(s, spec.analyzer, 1)),
            Fitted::Union { word, chars } => {
                let w = word.1.transform(&word.0, &sentence_terms(s, Analyzer::Word, 1));
                let c = chars.1.transform(&chars.0, &sentence_terms(s, Analyzer::Char, 1));
                SparseVec::concat(&[&w, &c])
            }
            Fitted::Embedding { table, idf } => {
                let idf = idf.as_ref().map(|(v, t)| (v, t));
                SparseVec::from_dense(&sentence_embedding(&s.stems, table, idf))
            }
        }
    }

    /// `[v(premise) | v(hypothesis) | contra?]`.
    pub fn build_pair_vector(
        &self,
        premise: &Analyzed,
        hypothesis: &Analyzed,
        contra: &ContraVector,
    ) -> Result<SparseVec> {
        let a = self.transform_sentence(premise);
        let b = self.transform_sentence(hypothesis);
        if !self.spec.include_contra {
            return Ok(SparseVec::concat(&[&a, &b]));
        }
        if contra.dimension() != self.contra_dim {
            return Err(Error::DimensionMismatch {
                expected: self.contra_dim,
                got: contra.dimension(),
            });
        }
        let c = SparseVec::from_dense(&contra.to_vec());
        Ok(SparseVec::concat(&[&a, &b, &c]))
    }

    pub fn transform_pairs(
        &self,
        pairs: &[(Analyzed, Analyzed)],
        contra: &[ContraVector],
        exec: Exec,
    ) -> Result<Vec<SparseVec>> {
        if pairs.len() != contra.len() {
            return Err(Error::DimensionMismatch {
                expected: pairs.len(),
                got: contra.len(),
            });
        }
        exec.map_range(pairs.len(), |i| {
            self.build_pair_vector(&pairs[i].0, &pairs[i].1, &contra[i])
        })
        .into_iter()
        .collect()
    }
}
