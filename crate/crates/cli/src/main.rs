use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use arnli_core::corpus::{compute_stats, load_dataset_with, DataFormat};
use arnli_core::exec::Exec;
use arnli_core::experiment::{self, RunConfig};
use arnli_core::learn::Algorithm;
use arnli_core::textproc::{Preprocessor, StemmerRules};
use arnli_core::vectorize::VectorizerSpec;
use arnli_core::{load_model, save_model, Error};

/// Arabic sentence-pair inference with contradiction features and classical classifiers.
#[derive(Parser)]
#[command(name = "arnli", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Label counts and sentence length statistics of a dataset.
    Stats(StatsArgs),
    /// Show tokenization, punctuation removal and stemming for a sentence.
    Preprocess(PreprocessArgs),
    /// Train one vectorizer + classifier on the split and save the model.
    Train(TrainArgs),
    /// Run the vectorizer x classifier grid and write reports.
    Experiment(ExperimentArgs),
    /// Label one premise/hypothesis pair with a saved model.
    Predict(PredictArgs),
}

#[derive(Args, Clone, Default)]
struct NormArgs {
    /// Keep tatweel (U+0640).
    #[arg(long)]
    keep_tatweel: bool,
    /// Do not map alef variants to bare alef.
    #[arg(long)]
    keep_alef_variants: bool,
    /// Keep diacritics.
    #[arg(long)]
    keep_diacritics: bool,
    /// Do not map Arabic-Indic digits to ASCII.
    #[arg(long)]
    keep_arabic_digits: bool,
    /// Stemmer rule file replacing the built-in rules.
    #[arg(long, value_name = "FILE")]
    stemmer_rules: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    /// Dataset (CSV or TSV).
    #[arg(long, value_name = "FILE")]
    data: Option<PathBuf>,
    /// Config file supplying `data`, columns and normalization.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Print CSV instead of text.
    #[arg(long)]
    csv: bool,
    /// Also write the CSV to this file.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[command(flatten)]
    norm: NormArgs,
}

#[derive(Args)]
struct PreprocessArgs {
    /// Sentence to process.
    sentence: String,
    #[command(flatten)]
    norm: NormArgs,
}

#[derive(Args, Clone, Default)]
struct RunArgs {
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    data: Option<PathBuf>,
    /// Fixed test set instead of splitting `--data`.
    #[arg(long, value_name = "FILE")]
    test_data: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_name = "RATIO")]
    split_ratio: Option<f64>,
    #[arg(long)]
    stratified: bool,
    /// Number of forest trees.
    #[arg(long)]
    trees: Option<usize>,
    /// `parallel` or `sequential`.
    #[arg(long, value_parser = parse_exec)]
    exec: Option<Exec>,
    #[command(flatten)]
    norm: NormArgs,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Vectorizer row, e.g. `bow-char` (default: first of the config grid).
    #[arg(long)]
    vectorizer: Option<String>,
    /// dt, rf, knn, adaboost, svm_linear or sgd (default: first of the config grid).
    #[arg(long)]
    classifier: Option<String>,
    /// Model file to write.
    #[arg(long, value_name = "FILE", default_value = "model.bin")]
    out: PathBuf,
    /// Also write held-out predictions as `id,gold,predicted`.
    #[arg(long, value_name = "FILE")]
    predictions: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Restrict the vectorizer grid (repeatable).
    #[arg(long)]
    vectorizer: Vec<String>,
    /// Restrict the classifier grid (repeatable).
    #[arg(long)]
    classifier: Vec<String>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Skip the per-cell prediction files.
    #[arg(long)]
    no_predictions: bool,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    #[arg(long)]
    premise: String,
    #[arg(long)]
    hypothesis: String,
}

fn parse_exec(s: &str) -> Result<Exec, String> {
    match s {
        "parallel" => Ok(Exec::Parallel),
        "sequential" => Ok(Exec::Sequential),
        _ => Err(format!("expected `parallel` or `sequential`, got `{s}`")),
    }
}

/// Failure with its exit code: 2 for usage and configuration problems,
/// 1 for everything that goes wrong while running.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn usage(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 2,
        error: error.into(),
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = match error.downcast_ref::<Error>() {
            Some(Error::Config(_)) => 2,
            _ => 1,
        };
        Failure { code, error }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn require_file(what: &str, path: &Path) -> CliResult {
    if path.as_os_str().is_empty() {
        return Err(usage(anyhow!("{what}: empty path")));
    }
    if !path.is_file() {
        return Err(usage(anyhow!("{what}: {} not found", path.display())));
    }
    Ok(())
}

impl NormArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        let n = &mut cfg.normalization;
        n.strip_tatweel &= !self.keep_tatweel;
        n.unify_alef_variants &= !self.keep_alef_variants;
        n.strip_diacritics &= !self.keep_diacritics;
        n.map_arabic_indic_digits &= !self.keep_arabic_digits;
        if self.stemmer_rules.is_some() {
            cfg.resources.stemmer_rules = self.stemmer_rules.clone();
        }
    }
}

fn preprocessor(cfg: &RunConfig) -> CliResult<Preprocessor> {
    let rules = match &cfg.resources.stemmer_rules {
        Some(p) => {
            require_file("stemmer rules", p)?;
            StemmerRules::load(p).map_err(usage)?
        }
        None => StemmerRules::builtin().clone(),
    };
    Ok(Preprocessor::new(cfg.normalization, rules))
}

fn base_config(path: &Option<PathBuf>) -> CliResult<RunConfig> {
    match path {
        Some(p) => {
            require_file("config", p)?;
            Ok(RunConfig::load(p)?)
        }
        None => Ok(RunConfig::default()),
    }
}

impl RunArgs {
    /// Config file values with command-line overrides applied.
    fn config(&self) -> CliResult<RunConfig> {
        let mut cfg = base_config(&self.config)?;
        if let Some(d) = &self.data {
            cfg.data = Some(d.clone());
        }
        if let Some(t) = &self.test_data {
            cfg.test_data = Some(t.clone());
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(r) = self.split_ratio {
            cfg.split_ratio = r;
        }
        if self.stratified {
            cfg.stratified = true;
        }
        if let Some(t) = self.trees {
            cfg.hyperparams.rf.trees = t;
        }
        if let Some(e) = self.exec {
            cfg.exec = e;
        }
        self.norm.apply(&mut cfg);
        Ok(cfg)
    }
}

fn cmd_stats(a: &StatsArgs) -> CliResult {
    let mut cfg = base_config(&a.config)?;
    if let Some(d) = &a.data {
        cfg.data = Some(d.clone());
    }
    a.norm.apply(&mut cfg);
    let data = cfg.data.clone().ok_or_else(|| usage(anyhow!("no dataset given (use --data)")))?;
    require_file("data", &data)?;
    let pre = preprocessor(&cfg)?;
    let format = cfg.format.unwrap_or_else(|| DataFormat::from_path(&data));
    let pairs = load_dataset_with(&data, format, &cfg.columns)?;
    let stats = compute_stats(&pairs, &pre)?;
    if a.csv {
        print!("{}", stats.to_csv());
    } else {
        print!("{}", stats.to_text());
    }
    if let Some(out) = &a.out {
        fs::write(out, stats.to_csv()).with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(())
}

fn cmd_preprocess(a: &PreprocessArgs) -> CliResult {
    let mut cfg = RunConfig::default();
    a.norm.apply(&mut cfg);
    let pre = preprocessor(&cfg)?;
    let s = pre.analyze(&a.sentence);
    println!("tokenization: {}", s.tokens.join(" "));
    println!("punctuation removed: {}", s.clean.join(" "));
    println!("stemming: {}", s.stems.join(" "));
    Ok(())
}

fn cmd_train(a: &TrainArgs) -> CliResult {
    let mut cfg = a.run.config()?;
    let vectorizer = a.vectorizer.clone().or_else(|| cfg.vectorizers.first().cloned());
    let classifier = a.classifier.clone().or_else(|| cfg.classifiers.first().cloned());
    let spec: VectorizerSpec = vectorizer
        .ok_or_else(|| usage(anyhow!("no vectorizer given")))?
        .parse()
        .map_err(usage)?;
    let alg: Algorithm = classifier
        .ok_or_else(|| usage(anyhow!("no classifier given")))?
        .parse()
        .map_err(usage)?;
    if a.out.as_os_str().is_empty() {
        return Err(usage(anyhow!("--out: empty path")));
    }
    cfg.vectorizers = vec![spec.name()];
    cfg.classifiers = vec![alg.name().to_string()];
    cfg.validate()?;
    let (model, metrics, preds) = experiment::train_single(&cfg, spec, alg)?;
    save_model(&model, &a.out)?;
    if let Some(p) = &a.predictions {
        experiment::write_predictions(p, &preds)?;
    }
    println!("vectorizer  {}", spec.name());
    println!("classifier  {}", alg.name());
    println!("seed        {}", cfg.seed);
    println!("model       {}", a.out.display());
    print!("{}", metrics.to_text());
    Ok(())
}

fn cmd_experiment(a: &ExperimentArgs) -> CliResult {
    let mut cfg = a.run.config()?;
    if !a.vectorizer.is_empty() {
        cfg.vectorizers = a.vectorizer.clone();
    }
    if !a.classifier.is_empty() {
        cfg.classifiers = a.classifier.clone();
    }
    if let Some(o) = &a.out {
        cfg.out = Some(o.clone());
    }
    if cfg.out.is_none() {
        cfg.out = Some(PathBuf::from("results"));
    }
    if a.no_predictions {
        cfg.write_predictions = false;
    }
    let report = experiment::run_experiment(&cfg)?;
    print!("{}", report.to_markdown());
    eprintln!(
        "{} rows written to {}",
        report.rows.len(),
        cfg.out.as_deref().unwrap_or(Path::new(".")).display()
    );
    Ok(())
}

fn cmd_predict(a: &PredictArgs) -> CliResult {
    require_file("--model", &a.model)?;
    if a.premise.trim().is_empty() {
        return Err(usage(anyhow!("--premise must not be empty")));
    }
    if a.hypothesis.trim().is_empty() {
        return Err(usage(anyhow!("--hypothesis must not be empty")));
    }
    let model = load_model(&a.model)?;
    let (label, scores) = model.predict_pair(&a.premise, &a.hypothesis)?;
    println!("{}", label.name());
    for l in arnli_core::corpus::Label::ALL {
        println!("  {:<14} {:.6}", l.name(), scores[l.index()]);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Stats(a) => cmd_stats(a),
        Command::Preprocess(a) => cmd_preprocess(a),
        Command::Train(a) => cmd_train(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Predict(a) => cmd_predict(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
