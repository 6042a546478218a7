//! Grid experiments: every (vectorizer, classifier) cell trained on one
//! seeded split and scored on the held-out part.
//!
//! `report.csv`, `report.md`, `metadata.json` and the prediction files depend
//! only on the configuration and data, never on timing or thread count, so
//! reruns are byte-identical. Wall-clock times go to `timings.csv`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::contra::ContraResources;
use crate::corpus::{
    load_dataset_with, split_dataset, split_dataset_stratified, ColumnMap, DataFormat, Label, LabeledPair,
};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::learn::{self, Algorithm, Hyperparams, Metrics, TrainConfig};
use crate::model::{Model, PairFeatures};
use crate::textproc::{NormalizationConfig, Preprocessor, StemmerRules};
use crate::vectorize::{EmbeddingTable, FitOptions, FittedVectorizer, IdfMode, SgnsConfig, VectorizerSpec, GRID_ROWS};

/// Optional replacements for the built-in linguistic resources.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResourcePaths {
    pub gazetteer: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub stemmer_rules: Option<PathBuf>,
}

/// Experiment configuration, read from TOML.
///
/// Relative paths in a config file are resolved against the file's
/// directory. Unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Dataset to split, or the training set when `test_data` is given.
    pub data: Option<PathBuf>,
    /// Fixed test set; disables splitting.
    pub test_data: Option<PathBuf>,
    /// Defaults to the file extension.
    pub format: Option<DataFormat>,
    pub columns: ColumnMap,
    pub split_ratio: f64,
    pub stratified: bool,
    pub seed: u64,
    pub normalization: NormalizationConfig,
    pub resources: ResourcePaths,
    pub vectorizers: Vec<String>,
    pub classifiers: Vec<String>,
    pub idf: IdfMode,
    pub sgns: SgnsConfig,
    /// Pre-trained embeddings in word2vec text format.
    pub embeddings: Option<PathBuf>,
    pub hyperparams: Hyperparams,
    pub out: Option<PathBuf>,
    pub write_predictions: bool,
    pub exec: Exec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            data: None,
            test_data: None,
            format: None,
            columns: ColumnMap::default(),
            split_ratio: 0.8,
            stratified: false,
            seed: learn::DEFAULT_SEED,
            normalization: NormalizationConfig::default(),
            resources: ResourcePaths::default(),
            vectorizers: GRID_ROWS.iter().map(|s| s.to_string()).collect(),
            classifiers: Algorithm::ALL.iter().map(|a| a.name().to_string()).collect(),
            idf: IdfMode::default(),
            sgns: SgnsConfig::default(),
            embeddings: None,
            hyperparams: Hyperparams::default(),
            out: None,
            write_predictions: true,
            exec: Exec::default(),
        }
    }
}

fn resolve(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(path) = p {
        if path.is_relative() {
            *path = base.join(&*path);
        }
    }
}

fn require_file(what: &str, p: &Option<PathBuf>) -> Result<()> {
    match p {
        Some(path) if path.as_os_str().is_empty() => Err(Error::Config(format!("{what}: empty path"))),
        Some(path) if !path.is_file() => Err(Error::Config(format!("{what}: {} not found", path.display()))),
        _ => Ok(()),
    }
}

/// The grid after parsing and de-duplication.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub vectorizers: Vec<VectorizerSpec>,
    /// Always in report column order.
    pub classifiers: Vec<Algorithm>,
}

impl RunConfig {
    pub fn from_toml(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(base) = base_dir {
            for p in [
                &mut cfg.data,
                &mut cfg.test_data,
                &mut cfg.embeddings,
                &mut cfg.out,
                &mut cfg.resources.gazetteer,
                &mut cfg.resources.lexicon,
                &mut cfg.resources.stopwords,
                &mut cfg.resources.stemmer_rules,
            ] {
                resolve(base, p);
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text, path.parent())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks ranges, grid names and that every referenced file exists.
    pub fn validate(&self) -> Result<Grid> {
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::Config(format!("split_ratio {} not in (0, 1)", self.split_ratio)));
        }
        if self.data.is_none() {
            return Err(Error::Config("no dataset given (set `data` or pass --data)".into()));
        }
        require_file("data", &self.data)?;
        require_file("test_data", &self.test_data)?;
        require_file("embeddings", &self.embeddings)?;
        require_file("resources.gazetteer", &self.resources.gazetteer)?;
        require_file("resources.lexicon", &self.resources.lexicon)?;
        require_file("resources.stopwords", &self.resources.stopwords)?;
        require_file("resources.stemmer_rules", &self.resources.stemmer_rules)?;
        if self.vectorizers.is_empty() {
            return Err(Error::Config("vectorizer grid is empty".into()));
        }
        if self.classifiers.is_empty() {
            return Err(Error::Config("classifier grid is empty".into()));
        }
        let mut vectorizers: Vec<VectorizerSpec> = Vec::new();
        for v in &self.vectorizers {
            let spec: VectorizerSpec = v.parse()?;
            if !vectorizers.contains(&spec) {
                vectorizers.push(spec);
            }
        }
        let mut classifiers = self
            .classifiers
            .iter()
            .map(|c| c.parse::<Algorithm>())
            .collect::<Result<Vec<_>>>()?;
        classifiers.sort();
        classifiers.dedup();
        self.hyperparams.validate()?;
        Ok(Grid {
            vectorizers,
            classifiers,
        })
    }

    /// SHA-256 over the settings that influence results (not `out` or `exec`).
    pub fn config_hash(&self) -> String {
        let mut c = self.clone();
        c.out = None;
        c.exec = Exec::Sequential;
        let json = serde_json::to_string(&c).expect("config serializes");
        hex(&Sha256::digest(json.as_bytes()))
    }

    pub fn train_config(&self, algorithm: Algorithm) -> TrainConfig {
        TrainConfig {
            algorithm,
            seed: self.seed,
            hyperparams: self.hyperparams.clone(),
        }
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Data, resources and per-pair features shared by every grid cell.
pub struct Prepared {
    pub preprocessor: Preprocessor,
    pub resources: ContraResources,
    pub train: Vec<LabeledPair>,
    pub test: Vec<LabeledPair>,
    pub train_features: PairFeatures,
    pub test_features: PairFeatures,
    pub fit_options: FitOptions,
}

impl Prepared {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        let rules = match &cfg.resources.stemmer_rules {
            Some(p) => StemmerRules::load(p)?,
            None => StemmerRules::builtin().clone(),
        };
        let preprocessor = Preprocessor::new(cfg.normalization, rules);
        let r = &cfg.resources;
        let resources = ContraResources::load(
            &preprocessor,
            r.gazetteer.as_deref(),
            r.lexicon.as_deref(),
            r.stopwords.as_deref(),
        )?;
        let data = cfg.data.as_deref().ok_or_else(|| Error::Config("no dataset given".into()))?;
        let load = |p: &Path| {
            let format = cfg.format.unwrap_or_else(|| DataFormat::from_path(p));
            load_dataset_with(p, format, &cfg.columns)
        };
        let (train, test) = match &cfg.test_data {
            Some(t) => (load(data)?, load(t)?),
            None => {
                let all = load(data)?;
                let split = if cfg.stratified {
                    split_dataset_stratified(&all, cfg.split_ratio, cfg.seed)?
                } else {
                    split_dataset(&all, cfg.split_ratio, cfg.seed)?
                };
                (split.train, split.test)
            }
        };
        Self::from_pairs(cfg, preprocessor, resources, train, test)
    }

    pub fn from_pairs(
        cfg: &RunConfig,
        preprocessor: Preprocessor,
        resources: ContraResources,
        train: Vec<LabeledPair>,
        test: Vec<LabeledPair>,
    ) -> Result<Self> {
        if train.is_empty() || test.is_empty() {
            return Err(Error::InvalidInput("training and test sets must be non-empty".into()));
        }
        let embeddings = cfg.embeddings.as_deref().map(EmbeddingTable::load_text).transpose()?;
        let train_features = PairFeatures::from_dataset(&train, &preprocessor, &resources, cfg.exec);
        let test_features = PairFeatures::from_dataset(&test, &preprocessor, &resources, cfg.exec);
        Ok(Self {
            preprocessor,
            resources,
            train,
            test,
            train_features,
            test_features,
            fit_options: FitOptions {
                idf_mode: cfg.idf,
                sgns: cfg.sgns.clone(),
                embeddings,
            },
        })
    }

    pub fn train_labels(&self) -> Vec<Label> {
        self.train.iter().map(|p| p.label).collect()
    }

    pub fn test_labels(&self) -> Vec<Label> {
        self.test.iter().map(|p| p.label).collect()
    }
}

/// One held-out prediction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prediction {
    pub id: String,
    pub gold: Label,
    pub predicted: Label,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub vectorizer: VectorizerSpec,
    pub classifier: Algorithm,
    pub metrics: Metrics,
    pub predictions: Vec<Prediction>,
    /// Vectorizer fit and transform time, shared by the row's cells.
    pub vectorizer_seconds: f64,
    /// Classifier training plus prediction time.
    pub classifier_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunMetadata {
    pub version: String,
    pub seed: u64,
    pub config_hash: String,
    pub split_ratio: f64,
    pub stratified: bool,
    pub n_train: usize,
    pub n_test: usize,
    pub vectorizers: Vec<String>,
    pub classifiers: Vec<String>,
    pub idf: IdfMode,
    pub sgns: SgnsConfig,
    pub normalization: NormalizationConfig,
    pub hyperparams: Hyperparams,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub metadata: RunMetadata,
}

fn predictions_for(test: &[LabeledPair], predicted: &[Label]) -> Vec<Prediction> {
    test.iter()
        .zip(predicted)
        .map(|(p, &l)| Prediction {
            id: p.id.clone(),
            gold: p.label,
            predicted: l,
        })
        .collect()
}

/// Runs the grid on prepared data. Rows come out vectorizer-major in grid
/// order, classifiers in report column order.
pub fn run_grid(cfg: &RunConfig, grid: &Grid, prep: &Prepared) -> Result<ExperimentReport> {
    let exec = cfg.exec;
    let y_train = prep.train_labels();
    let y_test = prep.test_labels();
    let mut rows = Vec::with_capacity(grid.vectorizers.len() * grid.classifiers.len());
    for &spec in &grid.vectorizers {
        let t0 = Instant::now();
        let vectorizer = FittedVectorizer::fit(
            spec,
            &prep.train_features.analyzed,
            prep.resources.dimension(),
            &prep.fit_options,
        )?;
        let x_train = vectorizer.transform_pairs(&prep.train_features.analyzed, &prep.train_features.contra, exec)?;
        let x_test = vectorizer.transform_pairs(&prep.test_features.analyzed, &prep.test_features.contra, exec)?;
        let vectorizer_seconds = t0.elapsed().as_secs_f64();
        let dim = vectorizer.pair_dim();
        let cells = exec.map_slice(&grid.classifiers, |&alg| -> Result<ReportRow> {
            let t1 = Instant::now();
            let model = learn::train(&x_train, &y_train, &cfg.train_config(alg), exec)?;
            let predicted = model.predict(&x_test, dim, exec)?;
            let classifier_seconds = t1.elapsed().as_secs_f64();
            Ok(ReportRow {
                vectorizer: spec,
                classifier: alg,
                metrics: Metrics::compute(&y_test, &predicted)?,
                predictions: predictions_for(&prep.test, &predicted),
                vectorizer_seconds,
                classifier_seconds,
            })
        });
        for c in cells {
            rows.push(c?);
        }
    }
    Ok(ExperimentReport {
        rows,
        metadata: RunMetadata {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: cfg.seed,
            config_hash: cfg.config_hash(),
            split_ratio: cfg.split_ratio,
            stratified: cfg.stratified,
            n_train: prep.train.len(),
            n_test: prep.test.len(),
            vectorizers: grid.vectorizers.iter().map(|v| v.name()).collect(),
            classifiers: grid.classifiers.iter().map(|a| a.name().to_string()).collect(),
            idf: cfg.idf,
            sgns: cfg.sgns.clone(),
            normalization: cfg.normalization,
            hyperparams: cfg.hyperparams.clone(),
        },
    })
}

/// Validates, loads, runs and (if `out` is set) writes all outputs.
pub fn run_experiment(cfg: &RunConfig) -> Result<ExperimentReport> {
    let grid = cfg.validate()?;
    let prep = Prepared::new(cfg)?;
    let report = run_grid(cfg, &grid, &prep)?;
    if let Some(out) = &cfg.out {
        report.write(out, cfg.write_predictions)?;
    }
    Ok(report)
}

/// Trains one model on the configured split and scores it on the test part.
pub fn train_single(
    cfg: &RunConfig,
    spec: VectorizerSpec,
    algorithm: Algorithm,
) -> Result<(Model, Metrics, Vec<Prediction>)> {
    cfg.validate()?;
    let prep = Prepared::new(cfg)?;
    let model = Model::fit_features(
        &prep.preprocessor,
        &prep.resources,
        &prep.train_features,
        &prep.train_labels(),
        spec,
        &prep.fit_options,
        &cfg.train_config(algorithm),
        cfg.exec,
    )?;
    let predicted = model.predict_features(&prep.test_features, cfg.exec)?;
    let metrics = Metrics::compute(&prep.test_labels(), &predicted)?;
    Ok((model, metrics, predictions_for(&prep.test, &predicted)))
}

pub const REPORT_HEADER: &str = "vectorizer,classifier,accuracy,macro_f1,f1_contradiction,f1_entailment,f1_neutral,n_test";

impl ExperimentReport {
    pub fn row(&self, vectorizer: &str, classifier: Algorithm) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.vectorizer.name() == vectorizer && r.classifier == classifier)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(REPORT_HEADER);
        s.push('\n');
        for r in &self.rows {
            let m = &r.metrics;
            let _ = writeln!(
                s,
                "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
                r.vectorizer.name(),
                r.classifier.name(),
                m.accuracy,
                m.macro_f1,
                m.per_class[0].f1,
                m.per_class[1].f1,
                m.per_class[2].f1,
                m.total
            );
        }
        s
    }

    pub fn timings_csv(&self) -> String {
        let mut s = String::from("vectorizer,classifier,vectorizer_seconds,classifier_seconds\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{:.3},{:.3}",
                r.vectorizer.name(),
                r.classifier.name(),
                r.vectorizer_seconds,
                r.classifier_seconds
            );
        }
        s
    }

    /// Accuracy table with one row per vectorizer and classifier columns in
    /// the order SVM, SGD, DT, ADA, KNN, RF.
    pub fn to_markdown(&self) -> String {
        let mut vecs: Vec<VectorizerSpec> = Vec::new();
        let mut algs: Vec<Algorithm> = Vec::new();
        for r in &self.rows {
            if !vecs.contains(&r.vectorizer) {
                vecs.push(r.vectorizer);
            }
            if !algs.contains(&r.classifier) {
                algs.push(r.classifier);
            }
        }
        algs.sort();
        let mut s = String::from("| Vectorizer |");
        for a in &algs {
            let _ = write!(s, " {} |", a.short_name());
        }
        s.push_str("\n|---|");
        s.push_str(&"---|".repeat(algs.len()));
        s.push('\n');
        for v in &vecs {
            let _ = write!(s, "| {} |", v.display_label());
            for &a in &algs {
                match self.row(&v.name(), a) {
                    Some(r) => {
                        let _ = write!(s, " {:.3} |", r.metrics.accuracy);
                    }
                    None => s.push_str(" - |"),
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn metadata_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.metadata).expect("metadata serializes");
        s.push('\n');
        s
    }

    /// Writes `report.csv`, `report.md`, `metadata.json`, `timings.csv` and,
    /// when asked, `predictions/<vectorizer>__<classifier>.csv`.
    pub fn write(&self, dir: &Path, predictions: bool) -> Result<()> {
        let w = |name: &str, text: &str| -> Result<()> {
            let p = dir.join(name);
            fs::write(&p, text).map_err(|e| Error::io(p, e))
        };
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        w("report.csv", &self.to_csv())?;
        w("report.md", &self.to_markdown())?;
        w("metadata.json", &self.metadata_json())?;
        w("timings.csv", &self.timings_csv())?;
        if predictions {
            let pdir = dir.join("predictions");
            fs::create_dir_all(&pdir).map_err(|e| Error::io(&pdir, e))?;
            for r in &self.rows {
                let p = pdir.join(prediction_file_name(&r.vectorizer.name(), r.classifier));
                write_predictions(&p, &r.predictions)?;
            }
        }
        Ok(())
    }
}

pub fn prediction_file_name(vectorizer: &str, classifier: Algorithm) -> String {
    format!("{}__{}.csv", vectorizer.replace('+', "_"), classifier.name())
}

pub fn write_predictions(path: &Path, preds: &[Prediction]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["id", "gold", "predicted"])?;
    for p in preds {
        w.write_record([p.id.as_str(), p.gold.name(), p.predicted.name()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_predictions(path: &Path) -> Result<Vec<Prediction>> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["id", "gold", "predicted"] {
        return Err(Error::Schema(format!("expected header id,gold,predicted in {}", path.display())));
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let label = |k: usize| {
            rec[k].parse::<Label>().map_err(|e| Error::Row {
                line: i as u64 + 2,
                message: e.to_string(),
            })
        };
        out.push(Prediction {
            id: rec[0].to_string(),
            gold: label(1)?,
            predicted: label(2)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::write_dataset;
    use crate::synth;

    fn setup(n: usize) -> (tempfile::TempDir, RunConfig) {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("data.csv");
        let f = fs::File::create(&data).unwrap();
        write_dataset(&synth::generate(n, 3), f, DataFormat::Csv).unwrap();
        let mut cfg = RunConfig {
            data: Some(data),
            ..Default::default()
        };
        cfg.hyperparams.rf.trees = 10;
        cfg.hyperparams.adaboost.rounds = 10;
        cfg.sgns.dim = 16;
        cfg.sgns.epochs = 2;
        (dir, cfg)
    }

    #[test]
    fn config_parsing_and_validation() {
        let base = Path::new("/base");
        let c = RunConfig::from_toml(
            "data = \"d.csv\"\nvectorizers = [\"bow-char\"]\nclassifiers = [\"rf\", \"svm\"]\n[hyperparams.rf]\ntrees = 3\n",
            Some(base),
        )
        .unwrap();
        assert_eq!(c.data.as_deref(), Some(Path::new("/base/d.csv")));
        assert_eq!(c.hyperparams.rf.trees, 3);
        assert!(RunConfig::from_toml("dta = \"x\"\n", None).is_err());
        assert!(RunConfig::from_toml("[sgns]\ndims = 3\n", None).is_err());
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        assert!(matches!(RunConfig::default().validate(), Err(Error::Config(_))));
        let back = RunConfig::from_toml(&c.to_toml(), None).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn grid_validation() {
        let (_d, mut cfg) = setup(30);
        cfg.classifiers = vec!["rf".into(), "svm".into(), "rf".into()];
        let g = cfg.validate().unwrap();
        assert_eq!(g.classifiers, vec![Algorithm::SvmLinear, Algorithm::Rf]);
        assert_eq!(g.vectorizers.len(), 13);
        cfg.classifiers = vec!["svc".into()];
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        cfg.classifiers.clear();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn one_by_one_grid_and_outputs() {
        let (dir, mut cfg) = setup(80);
        cfg.vectorizers = vec!["bow-char".into()];
        cfg.classifiers = vec!["rf".into()];
        let out = dir.path().join("out");
        cfg.out = Some(out.clone());
        let rep = run_experiment(&cfg).unwrap();
        assert_eq!(rep.rows.len(), 1);
        assert_eq!(rep.metadata.n_train + rep.metadata.n_test, 80);
        let csv = fs::read_to_string(out.join("report.csv")).unwrap();
        assert_eq!(csv.lines().count(), 2);
        let preds = read_predictions(&out.join("predictions/bow-char__rf.csv")).unwrap();
        assert_eq!(preds, rep.rows[0].predictions);
        let md = fs::read_to_string(out.join("report.md")).unwrap();
        assert!(md.starts_with("| Vectorizer | RF |"));
    }

    #[test]
    fn markdown_column_order() {
        let (_d, mut cfg) = setup(60);
        cfg.vectorizers = vec!["bow-word".into()];
        cfg.classifiers = vec!["rf".into(), "knn".into(), "ada".into(), "dt".into(), "sgd".into(), "svm".into()];
        let rep = run_experiment(&cfg).unwrap();
        assert_eq!(rep.rows.len(), 6);
        let header = rep.to_markdown().lines().next().unwrap().to_string();
        assert_eq!(header, "| Vectorizer | SVM | SGD | DT | ADA | KNN | RF |");
    }
}
