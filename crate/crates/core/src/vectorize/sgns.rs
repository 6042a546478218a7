//! Skip-gram with negative sampling, plus the plain-text embedding format
//! (`count dim` header, then `word v1 … vd` per line).

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SgnsConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub min_count: usize,
    pub subsample: f64,
    pub seed: u64,
}

impl Default for SgnsConfig {
    fn default() -> Self {
        Self {
            dim: 100,
            window: 5,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            min_count: 2,
            subsample: 1e-3,
            seed: 42,
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Negative-sampling objective for one (center, context, negatives) sample:
/// `−ln σ(u_o·v) − Σ_k ln σ(−u_k·v)`.
pub fn sgns_loss(center: &[f64], context: &[f64], negatives: &[Vec<f64>]) -> f64 {
    let ln_sig = |x: f64| -((-x).exp().ln_1p());
    -ln_sig(dot(context, center)) - negatives.iter().map(|u| ln_sig(-dot(u, center))).sum::<f64>()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SgnsGradient {
    pub center: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

/// Analytic gradient of [`sgns_loss`] with respect to every vector.
pub fn sgns_gradient(center: &[f64], context: &[f64], negatives: &[Vec<f64>]) -> SgnsGradient {
    let g_pos = sigmoid(dot(context, center)) - 1.0;
    let mut g_center: Vec<f64> = context.iter().map(|u| g_pos * u).collect();
    let g_context = center.iter().map(|v| g_pos * v).collect();
    let g_neg = negatives
        .iter()
        .map(|u| {
            let s = sigmoid(dot(u, center));
            for (gc, ui) in g_center.iter_mut().zip(u) {
                *gc += s * ui;
            }
            center.iter().map(|v| s * v).collect()
        })
        .collect();
    SgnsGradient {
        center: g_center,
        context: g_context,
        negatives: g_neg,
    }
}

/// Word → dense vector. Unknown words map to the zero vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "EmbeddingRepr", into = "EmbeddingRepr")]
pub struct EmbeddingTable {
    words: Vec<String>,
    dim: usize,
    vectors: Vec<f64>,
    config: Option<SgnsConfig>,
    index: HashMap<String, usize>,
    zero: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct EmbeddingRepr {
    words: Vec<String>,
    dim: usize,
    vectors: Vec<f64>,
    config: Option<SgnsConfig>,
}

impl From<EmbeddingRepr> for EmbeddingTable {
    fn from(r: EmbeddingRepr) -> Self {
        EmbeddingTable::new(r.words, r.dim, r.vectors, r.config)
    }
}

impl From<EmbeddingTable> for EmbeddingRepr {
    fn from(t: EmbeddingTable) -> Self {
        EmbeddingRepr {
            words: t.words,
            dim: t.dim,
            vectors: t.vectors,
            config: t.config,
        }
    }
}

impl EmbeddingTable {
    fn new(words: Vec<String>, dim: usize, vectors: Vec<f64>, config: Option<SgnsConfig>) -> Self {
        let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Self {
            words,
            dim,
            vectors,
            config,
            index,
            zero: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn config(&self) -> Option<&SgnsConfig> {
        self.config.as_ref()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    /// The word's vector, or the zero vector when unknown.
    pub fn vector(&self, word: &str) -> &[f64] {
        match self.index.get(word) {
            Some(&i) => &self.vectors[i * self.dim..(i + 1) * self.dim],
            None => &self.zero,
        }
    }

    pub fn cosine(&self, a: &str, b: &str) -> f64 {
        let (x, y) = (self.vector(a), self.vector(b));
        let n = dot(x, x).sqrt() * dot(y, y).sqrt();
        if n == 0.0 {
            0.0
        } else {
            dot(x, y) / n
        }
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.words.len(), self.dim)?;
        for (i, word) in self.words.iter().enumerate() {
            write!(w, "{word}")?;
            for x in &self.vectors[i * self.dim..(i + 1) * self.dim] {
                write!(w, " {x}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let bad = |line: u64, m: &str| Error::Row {
            line,
            message: m.to_string(),
        };
        let header = lines
            .next()
            .ok_or_else(|| bad(1, "missing `count dim` header"))?
            .map_err(|e| Error::io("<embeddings>", e))?;
        let mut h = header.split_whitespace().map(str::parse::<usize>);
        let (Some(Ok(count)), Some(Ok(dim)), None) = (h.next(), h.next(), h.next()) else {
            return Err(bad(1, "header must be `count dim`"));
        };
        let mut words = Vec::with_capacity(count);
        let mut vectors = Vec::with_capacity(count * dim);
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::io("<embeddings>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let lno = i as u64 + 2;
            let mut f = line.split_whitespace();
            let word = f.next().unwrap().to_string();
            let vals: Vec<f64> = f
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad(lno, "non-numeric vector component"))?;
            if vals.len() != dim {
                return Err(bad(lno, &format!("expected {dim} components, got {}", vals.len())));
            }
            words.push(word);
            vectors.extend(vals);
        }
        if words.len() != count {
            return Err(Error::InvalidInput(format!(
                "embedding header says {count} words, file has {}",
                words.len()
            )));
        }
        Ok(Self::new(words, dim, vectors, None))
    }

    pub fn load_text(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_text(std::io::BufReader::new(f))
    }
}

/// Cumulative unigram^0.75 distribution for negative draws.
struct NegativeSampler {
    cumulative: Vec<f64>,
}

impl NegativeSampler {
    fn new(counts: &[usize]) -> Self {
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(0.75);
                acc
            })
            .collect();
        Self { cumulative }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> usize {
        let total = *self.cumulative.last().unwrap();
        let r = rng.gen::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= r).min(self.cumulative.len() - 1)
    }
}

/// Trains skip-gram embeddings on tokenized sentences. Single-threaded and
/// bit-deterministic for a fixed seed.
pub fn train_sgns(sentences: &[Vec<String>], cfg: &SgnsConfig) -> Result<EmbeddingTable> {
    if cfg.dim == 0 || cfg.window == 0 || cfg.epochs == 0 {
        return Err(Error::Config("sgns dim, window and epochs must be positive".into()));
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for s in sentences {
        for w in s {
            *counts.entry(w.as_str()).or_default() += 1;
        }
    }
    let kept: Vec<(&str, usize)> = counts
        .into_iter()
        .filter(|&(_, c)| c >= cfg.min_count.max(1))
        .collect();
    if kept.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no word reaches min_count {} in {} sentences",
            cfg.min_count,
            sentences.len()
        )));
    }
    let index: HashMap<&str, usize> = kept.iter().enumerate().map(|(i, (w, _))| (*w, i)).collect();
    let freq: Vec<usize> = kept.iter().map(|(_, c)| *c).collect();
    let corpus: Vec<Vec<usize>> = sentences
        .iter()
        .map(|s| s.iter().filter_map(|w| index.get(w.as_str()).copied()).collect())
        .collect();
    let train_words: usize = freq.iter().sum();

    let (v, d) = (kept.len(), cfg.dim);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut input: Vec<f64> = (0..v * d).map(|_| (rng.gen::<f64>() - 0.5) / d as f64).collect();
    let mut output = vec![0.0; v * d];
    let sampler = NegativeSampler::new(&freq);

    let threshold = cfg.subsample * train_words as f64;
    let keep_prob: Vec<f64> = freq
        .iter()
        .map(|&c| {
            if cfg.subsample <= 0.0 {
                1.0
            } else {
                let c = c as f64;
                ((c / threshold).sqrt() + 1.0) * threshold / c
            }
        })
        .collect();

    let total = (cfg.epochs * train_words) as f64;
    let mut processed = 0usize;
    let mut grad_in = vec![0.0; d];
    for _ in 0..cfg.epochs {
        for sentence in &corpus {
            processed += sentence.len();
            let sent: Vec<usize> = sentence
                .iter()
                .copied()
                .filter(|&w| keep_prob[w] >= 1.0 || rng.gen::<f64>() < keep_prob[w])
                .collect();
            let lr = cfg.learning_rate * f64::max(1e-4, 1.0 - processed as f64 / (total + 1.0));
            for (pos, &center) in sent.iter().enumerate() {
                let reduced = rng.gen_range(0..cfg.window);
                let span = cfg.window - reduced;
                let lo = pos.saturating_sub(span);
                let hi = (pos + span).min(sent.len() - 1);
                for (cpos, &context) in sent.iter().enumerate().take(hi + 1).skip(lo) {
                    if cpos == pos {
                        continue;
                    }
                    grad_in.iter_mut().for_each(|g| *g = 0.0);
                    let c = &input[center * d..(center + 1) * d];
                    for k in 0..=cfg.negatives {
                        let (target, label) = if k == 0 {
                            (context, 1.0)
                        } else {
                            let t = sampler.draw(&mut rng);
                            if t == context {
                                continue;
                            }
                            (t, 0.0)
                        };
                        let out = &mut output[target * d..(target + 1) * d];
                        // d loss / d score is σ(score) − label for both terms.
                        let g = sigmoid(dot(out, c)) - label;
                        for j in 0..d {
                            grad_in[j] += g * out[j];
                            out[j] -= lr * g * c[j];
                        }
                    }
                    let c = &mut input[center * d..(center + 1) * d];
                    for j in 0..d {
                        c[j] -= lr * grad_in[j];
                    }
                }
            }
        }
    }
    let words = kept.iter().map(|(w, _)| w.to_string()).collect();
    Ok(EmbeddingTable::new(words, d, input, Some(cfg.clone())))
}

/// One negative-sampling step on explicit vectors, in the same update
/// order the trainer uses. Exposed so the step can be checked against the
/// analytic gradient.
pub fn sgns_step(
    center: &mut [f64],
    context: &mut [f64],
    negatives: &mut [Vec<f64>],
    lr: f64,
) {
    let d = center.len();
    let mut grad_in = vec![0.0; d];
    let mut update = |out: &mut [f64], label: f64, c: &[f64]| {
        let g = sigmoid(dot(out, c)) - label;
        for j in 0..d {
            grad_in[j] += g * out[j];
            out[j] -= lr * g * c[j];
        }
    };
    update(context, 1.0, center);
    for u in negatives.iter_mut() {
        update(u, 0.0, center);
    }
    for j in 0..d {
        center[j] -= lr * grad_in[j];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_format_round_trip() {
        let t = EmbeddingTable::new(vec!["ا".into(), "ب".into()], 2, vec![0.5, -1.0, 0.25, 3.0], None);
        let mut buf = Vec::new();
        t.write_text(&mut buf).unwrap();
        let back = EmbeddingTable::read_text(buf.as_slice()).unwrap();
        assert_eq!(back.vector("ب"), &[0.25, 3.0]);
        assert_eq!(back.vector("missing"), &[0.0, 0.0]);
        assert!(EmbeddingTable::read_text("2 2\nا 1 2\n".as_bytes()).is_err());
        assert!(EmbeddingTable::read_text("1 2\nا 1\n".as_bytes()).is_err());
        assert!(EmbeddingTable::read_text("x\n".as_bytes()).is_err());
    }

    #[test]
    fn min_count_error() {
        let s = vec![vec!["a".to_string(), "b".to_string()]];
        assert!(train_sgns(&s, &SgnsConfig::default()).is_err());
    }

    #[test]
    fn step_matches_gradient_at_small_lr() {
        let mut c = vec![0.1, -0.2, 0.3];
        let mut o = vec![0.05, 0.1, -0.1];
        let mut n = vec![vec![-0.3, 0.2, 0.1]];
        let g = sgns_gradient(&c, &o, &n);
        let (c0, o0, n0) = (c.clone(), o.clone(), n.clone());
        let lr = 1e-6;
        sgns_step(&mut c, &mut o, &mut n, lr);
        for j in 0..3 {
            assert!(((o0[j] - o[j]) / lr - g.context[j]).abs() < 1e-6);
            assert!(((n0[0][j] - n[0][j]) / lr - g.negatives[0][j]).abs() < 1e-6);
            assert!(((c0[j] - c[j]) / lr - g.center[j]).abs() < 1e-5);
        }
    }
}
