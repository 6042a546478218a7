//! End-to-end model: preprocessing, contradiction resources, fitted
//! vectorizer and classifier, plus the binary file format.
//!
//! File layout (all integers little-endian):
//!
//! | offset | size | content |
//! |---|---|---|
//! | 0 | 8 | magic `ARNLIMDL` |
//! | 8 | 4 | format version, `u32` |
//! | 12 | 1 | algorithm tag |
//! | 13 | 8 | length `A` of the feature section, `u64` |
//! | 21 | A | bincode of the feature state |
//! | 21+A | 8 | length `B` of the parameter section, `u64` |
//! | 29+A | B | bincode of the parameters |
//! | 29+A+B | 32 | SHA-256 of every preceding byte |
//!
//! See `docs/model-format.md` for the section contents.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::contra::{build_contra_batch, build_contra_vector, ContraResources, ContraVector};
use crate::corpus::{Label, LabeledPair};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::learn::{self, Classifier, Metrics, TrainConfig};
use crate::sparse::SparseVec;
use crate::textproc::{Analyzed, Preprocessor};
use crate::vectorize::{FitOptions, FittedVectorizer, VectorizerSpec};

pub const MAGIC: &[u8; 8] = b"ARNLIMDL";
pub const FORMAT_VERSION: u32 = 1;
const CHECKSUM_LEN: usize = 32;

/// Sentences of every pair analyzed once, with their contradiction vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct PairFeatures {
    pub analyzed: Vec<(Analyzed, Analyzed)>,
    pub contra: Vec<ContraVector>,
}

impl PairFeatures {
    pub fn extract<'a, I>(pairs: I, pre: &Preprocessor, res: &ContraResources, exec: Exec) -> Self
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let raw: Vec<(&str, &str)> = pairs.into_iter().collect();
        let analyzed = exec.map_slice(&raw, |(p, h)| (pre.analyze(p), pre.analyze(h)));
        let contra = build_contra_batch(&analyzed, res, exec);
        Self { analyzed, contra }
    }

    pub fn from_dataset(pairs: &[LabeledPair], pre: &Preprocessor, res: &ContraResources, exec: Exec) -> Self {
        Self::extract(
            pairs.iter().map(|p| (p.premise.as_str(), p.hypothesis.as_str())),
            pre,
            res,
            exec,
        )
    }

    pub fn len(&self) -> usize {
        self.analyzed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.analyzed.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct FeatureState {
    preprocessor: Preprocessor,
    resources: ContraResources,
    vectorizer: FittedVectorizer,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Params {
    labels: Vec<String>,
    config: TrainConfig,
    classifier: Classifier,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub preprocessor: Preprocessor,
    pub resources: ContraResources,
    pub vectorizer: FittedVectorizer,
    pub config: TrainConfig,
    pub classifier: Classifier,
}

impl Model {
    /// Fits the vectorizer and the classifier on already extracted features.
    #[allow(clippy::too_many_arguments)]
    pub fn fit_features(
        pre: &Preprocessor,
        res: &ContraResources,
        feats: &PairFeatures,
        labels: &[Label],
        spec: VectorizerSpec,
        opts: &FitOptions,
        cfg: &TrainConfig,
        exec: Exec,
    ) -> Result<Self> {
        let vectorizer = FittedVectorizer::fit(spec, &feats.analyzed, res.dimension(), opts)?;
        let x = vectorizer.transform_pairs(&feats.analyzed, &feats.contra, exec)?;
        Self::fit_vectors(pre, res, vectorizer, &x, labels, cfg, exec)
    }

    /// Trains the classifier on rows already produced by `vectorizer`.
    pub fn fit_vectors(
        pre: &Preprocessor,
        res: &ContraResources,
        vectorizer: FittedVectorizer,
        x: &[SparseVec],
        labels: &[Label],
        cfg: &TrainConfig,
        exec: Exec,
    ) -> Result<Self> {
        let classifier = learn::train(x, labels, cfg, exec)?;
        Ok(Self {
            preprocessor: pre.clone(),
            resources: res.clone(),
            vectorizer,
            config: cfg.clone(),
            classifier,
        })
    }

    pub fn fit(
        train: &[LabeledPair],
        pre: &Preprocessor,
        res: &ContraResources,
        spec: VectorizerSpec,
        opts: &FitOptions,
        cfg: &TrainConfig,
        exec: Exec,
    ) -> Result<Self> {
        let feats = PairFeatures::from_dataset(train, pre, res, exec);
        let labels: Vec<Label> = train.iter().map(|p| p.label).collect();
        Self::fit_features(pre, res, &feats, &labels, spec, opts, cfg, exec)
    }

    pub fn feature_dim(&self) -> usize {
        self.vectorizer.pair_dim()
    }

    pub fn vectorize(&self, feats: &PairFeatures, exec: Exec) -> Result<Vec<SparseVec>> {
        self.vectorizer.transform_pairs(&feats.analyzed, &feats.contra, exec)
    }

    /// Label and per-class scores for one raw sentence pair.
    pub fn predict_pair(&self, premise: &str, hypothesis: &str) -> Result<(Label, [f64; Label::COUNT])> {
        let p = self.preprocessor.analyze(premise);
        let h = self.preprocessor.analyze(hypothesis);
        let c = build_contra_vector(&p, &h, &self.resources);
        let x = self.vectorizer.build_pair_vector(&p, &h, &c)?;
        let scores = self.classifier.scores(&x);
        Ok((self.classifier.predict_one(&x), scores))
    }

    pub fn predict_features(&self, feats: &PairFeatures, exec: Exec) -> Result<Vec<Label>> {
        let x = self.vectorize(feats, exec)?;
        self.classifier.predict(&x, self.feature_dim(), exec)
    }

    pub fn predict_dataset(&self, pairs: &[LabeledPair], exec: Exec) -> Result<Vec<Label>> {
        let feats = PairFeatures::from_dataset(pairs, &self.preprocessor, &self.resources, exec);
        self.predict_features(&feats, exec)
    }

    pub fn evaluate(&self, pairs: &[LabeledPair], exec: Exec) -> Result<Metrics> {
        let pred = self.predict_dataset(pairs, exec)?;
        let gold: Vec<Label> = pairs.iter().map(|p| p.label).collect();
        Metrics::compute(&gold, &pred)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let enc = |e: bincode::Error| Error::ModelFormat(format!("encoding failed: {e}"));
        let features = bincode::serialize(&FeatureState {
            preprocessor: self.preprocessor.clone(),
            resources: self.resources.clone(),
            vectorizer: self.vectorizer.clone(),
        })
        .map_err(enc)?;
        let params = bincode::serialize(&Params {
            labels: Label::ALL.iter().map(|l| l.name().to_string()).collect(),
            config: self.config.clone(),
            classifier: self.classifier.clone(),
        })
        .map_err(enc)?;
        let mut out = Vec::with_capacity(29 + features.len() + params.len() + CHECKSUM_LEN);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.push(self.classifier.algorithm().tag());
        out.extend_from_slice(&(features.len() as u64).to_le_bytes());
        out.extend_from_slice(&features);
        out.extend_from_slice(&(params.len() as u64).to_le_bytes());
        out.extend_from_slice(&params);
        let digest = Sha256::digest(&out);
        out.extend_from_slice(&digest);
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::ModelFormat(m.to_string());
        if bytes.len() < 8 || &bytes[..8] != MAGIC {
            return Err(bad("not a model file (bad magic bytes)"));
        }
        if bytes.len() < 12 {
            return Err(bad("truncated header"));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(Error::ModelVersion {
                found: version,
                expected: FORMAT_VERSION,
            });
        }
        if bytes.len() < 13 + 8 + 8 + CHECKSUM_LEN {
            return Err(bad("truncated file"));
        }
        let (body, sum) = bytes.split_at(bytes.len() - CHECKSUM_LEN);
        if Sha256::digest(body).as_slice() != sum {
            return Err(bad("checksum mismatch (file is corrupt or truncated)"));
        }
        let tag = body[12];
        let mut pos = 13;
        let mut section = |name: &str| -> Result<&[u8]> {
            let len_end = pos + 8;
            if len_end > body.len() {
                return Err(bad(&format!("truncated {name} section length")));
            }
            let len = u64::from_le_bytes(body[pos..len_end].try_into().unwrap()) as usize;
            let end = len_end.checked_add(len).filter(|&e| e <= body.len());
            let end = end.ok_or_else(|| bad(&format!("{name} section runs past end of file")))?;
            pos = end;
            Ok(&body[len_end..end])
        };
        let fs_bytes = section("feature")?;
        let p_bytes = section("parameter")?;
        if pos != body.len() {
            return Err(bad("trailing bytes after parameter section"));
        }
        let dec = |e: bincode::Error| Error::ModelFormat(format!("decoding failed: {e}"));
        let f: FeatureState = bincode::deserialize(fs_bytes).map_err(dec)?;
        let p: Params = bincode::deserialize(p_bytes).map_err(dec)?;
        let expected: Vec<String> = Label::ALL.iter().map(|l| l.name().to_string()).collect();
        if p.labels != expected {
            return Err(bad(&format!("unexpected label order {:?}", p.labels)));
        }
        if p.classifier.algorithm().tag() != tag {
            return Err(bad("algorithm tag does not match the stored classifier"));
        }
        Ok(Self {
            preprocessor: f.preprocessor,
            resources: f.resources,
            vectorizer: f.vectorizer,
            config: p.config,
            classifier: p.classifier,
        })
    }
}

pub fn save_model(model: &Model, path: &Path) -> Result<()> {
    let bytes = model.to_bytes()?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<Model> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Model::from_bytes(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::Algorithm;
    use crate::synth;

    fn small_model(alg: Algorithm) -> (Model, Vec<LabeledPair>) {
        let data = synth::generate(60, 5);
        let pre = Preprocessor::default();
        let res = ContraResources::builtin(&pre);
        let mut cfg = TrainConfig::new(alg);
        cfg.hyperparams.rf.trees = 5;
        let spec: VectorizerSpec = "bow-char".parse().unwrap();
        let m = Model::fit(&data, &pre, &res, spec, &FitOptions::default(), &cfg, Exec::Sequential).unwrap();
        (m, data)
    }

    #[test]
    fn round_trip_preserves_predictions() {
        for alg in Algorithm::ALL {
            let (m, data) = small_model(alg);
            let bytes = m.to_bytes().unwrap();
            assert_eq!(bytes, small_model(alg).0.to_bytes().unwrap(), "{alg}: bytes not deterministic");
            assert_eq!(bytes[12], alg.tag());
            let back = Model::from_bytes(&bytes).unwrap();
            assert_eq!(back, m);
            assert_eq!(
                back.predict_dataset(&data, Exec::Sequential).unwrap(),
                m.predict_dataset(&data, Exec::Sequential).unwrap()
            );
        }
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let (m, _) = small_model(Algorithm::Dt);
        let bytes = m.to_bytes().unwrap();
        for cut in [0, 5, 12, 20, bytes.len() / 2, bytes.len() - 1] {
            assert!(matches!(Model::from_bytes(&bytes[..cut]), Err(Error::ModelFormat(_))), "cut {cut}");
        }
        let mut v = bytes.clone();
        v[8] = 2;
        assert!(matches!(
            Model::from_bytes(&v),
            Err(Error::ModelVersion { found: 2, expected: 1 })
        ));
        let mut v = bytes.clone();
        let mid = v.len() / 2;
        v[mid] ^= 0xff;
        assert!(matches!(Model::from_bytes(&v), Err(Error::ModelFormat(_))));
        let mut v = bytes;
        v[0] = b'X';
        assert!(matches!(Model::from_bytes(&v), Err(Error::ModelFormat(_))));
    }

    #[test]
    fn file_round_trip() {
        let (m, _) = small_model(Algorithm::Knn);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/model.bin");
        save_model(&m, &path).unwrap();
        assert_eq!(load_model(&path).unwrap(), m);
        assert!(matches!(load_model(&dir.path().join("missing.bin")), Err(Error::Io { .. })));
    }
}
