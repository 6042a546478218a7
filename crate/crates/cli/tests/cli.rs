use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use arnli_core::corpus::{write_dataset, CorpusStats, DataFormat, Label};
use arnli_core::experiment::read_predictions;
use arnli_core::synth;

fn arnli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arnli"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_data(dir: &Path, n: usize) -> PathBuf {
    let p = dir.join("pairs.csv");
    write_dataset(&synth::generate(n, 11), fs::File::create(&p).unwrap(), DataFormat::Csv).unwrap();
    p
}

fn sorted_words(line: &str, prefix: &str) -> Vec<String> {
    let rest = line.strip_prefix(prefix).unwrap_or_else(|| panic!("{line:?} lacks {prefix:?}"));
    let mut v: Vec<String> = rest.split_whitespace().map(String::from).collect();
    v.sort();
    v
}

fn words(s: &str) -> Vec<String> {
    let mut v: Vec<String> = s.split_whitespace().map(String::from).collect();
    v.sort();
    v
}

#[test]
fn preprocess_stages() {
    let s = "عملنا في هذا البحث على فهم علاقات الاستدلال و استخراجها بين الجمل في جميع اللغات، وليس فقط اللغة العربية..";
    let o = arnli(&["preprocess", s]);
    assert!(o.status.success());
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(
        sorted_words(lines[0], "tokenization:"),
        words("علاقات فهم على البحث هذا في عملنا .. جميع في الجمل بين استخراجها و الاستدلال العربية اللغة فقط وليس اللغات")
    );
    assert_eq!(
        sorted_words(lines[1], "punctuation removed:"),
        words("علاقات فهم على البحث هذا في عملنا جميع في الجمل بين استخراجها و الاستدلال العربية اللغة فقط وليس اللغات")
    );
    assert_eq!(
        sorted_words(lines[2], "stemming:"),
        words("علاق فهم على بحث هذا في عمل جميع في جمل بين استخراج و استدلال عرب اللغ فقط ليس اللغ")
    );
    assert_eq!(stdout(&arnli(&["preprocess", s])), out);

    let empty = arnli(&["preprocess", ""]);
    assert!(empty.status.success());
    assert_eq!(stdout(&empty), "tokenization: \npunctuation removed: \nstemming: \n");
}

#[test]
fn stats_csv_round_trips_and_bad_paths_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path(), 50);
    let o = arnli(&["stats", "--data", data.to_str().unwrap(), "--csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stats = CorpusStats::from_csv(&stdout(&o)).unwrap();
    assert_eq!(stats.total(), 50);
    assert!(arnli(&["stats", "--data", data.to_str().unwrap()]).status.success());

    assert_eq!(arnli(&["stats", "--data", ""]).status.code(), Some(2));
    assert_eq!(arnli(&["stats", "--data", "/no/such/file.csv"]).status.code(), Some(2));
    assert_eq!(arnli(&["stats"]).status.code(), Some(2));
}

#[test]
fn train_predict_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path(), 120);
    let model = dir.path().join("m.bin");
    let preds = dir.path().join("p.csv");
    let args = [
        "train",
        "--data",
        data.to_str().unwrap(),
        "--vectorizer",
        "bow-char",
        "--classifier",
        "rf",
        "--trees",
        "10",
        "--seed",
        "42",
        "--out",
        model.to_str().unwrap(),
        "--predictions",
        preds.to_str().unwrap(),
    ];
    let first = arnli(&args);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    assert!(stdout(&first).contains("accuracy"));
    let bytes = fs::read(&model).unwrap();
    let second = arnli(&args);
    assert_eq!(stdout(&first), stdout(&second));
    assert_eq!(fs::read(&model).unwrap(), bytes);
    assert_eq!(read_predictions(&preds).unwrap().len(), 24);

    let p = ["predict", "--model", model.to_str().unwrap(), "--premise", "باريس عاصمة فرنسا", "--hypothesis", "ليون عاصمة فرنسا"];
    let a = arnli(&p);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let label = stdout(&a).lines().next().unwrap().to_string();
    assert!(label.parse::<Label>().is_ok(), "{label}");
    assert_eq!(stdout(&arnli(&p)), stdout(&a));

    let missing = arnli(&["predict", "--model", "/no/model.bin", "--premise", "أ", "--hypothesis", "ب"]);
    assert_eq!(missing.status.code(), Some(2));
    let empty = arnli(&["predict", "--model", model.to_str().unwrap(), "--premise", "", "--hypothesis", "ب"]);
    assert_eq!(empty.status.code(), Some(2));
    assert_eq!(arnli(&["predict", "--model", model.to_str().unwrap()]).status.code(), Some(2));

    let garbage = dir.path().join("garbage.bin");
    fs::write(&garbage, b"ARNLIMDL\x01\x00").unwrap();
    let bad = arnli(&["predict", "--model", garbage.to_str().unwrap(), "--premise", "أ", "--hypothesis", "ب"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn unknown_names_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path(), 20);
    let model = dir.path().join("never.bin");
    let o = arnli(&[
        "train",
        "--data",
        data.to_str().unwrap(),
        "--classifier",
        "svc",
        "--out",
        model.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!model.exists());
    let o = arnli(&["train", "--data", data.to_str().unwrap(), "--vectorizer", "tfidf-morpheme"]);
    assert_eq!(o.status.code(), Some(2));
    let o = arnli(&["experiment", "--data", data.to_str().unwrap(), "--classifier", "svc"]);
    assert_eq!(o.status.code(), Some(2));
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "colour = \"blue\"\n").unwrap();
    let o = arnli(&["experiment", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn experiment_is_deterministic_and_matches_predictions() {
    let dir = tempfile::tempdir().unwrap();
    write_data(dir.path(), 100);
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "data = \"pairs.csv\"\nvectorizers = [\"bow-char\", \"tfidf-word\"]\nclassifiers = [\"rf\", \"dt\", \"knn\"]\n\
         [hyperparams.rf]\ntrees = 8\n",
    )
    .unwrap();
    let run = |out: &Path, exec: &str| {
        let o = arnli(&[
            "experiment",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--exec",
            exec,
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        stdout(&o)
    };
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let md = run(&a, "parallel");
    run(&b, "sequential");
    assert!(md.starts_with("| Vectorizer | DT | KNN | RF |"));
    for f in ["report.csv", "report.md", "metadata.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }

    let report = fs::read_to_string(a.join("report.csv")).unwrap();
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(lines.len(), 1 + 2 * 3);
    for line in &lines[1..] {
        let f: Vec<&str> = line.split(',').collect();
        let preds = read_predictions(&a.join("predictions").join(format!("{}__{}.csv", f[0], f[1]))).unwrap();
        let correct = preds.iter().filter(|p| p.gold == p.predicted).count();
        let acc = correct as f64 / preds.len() as f64;
        assert_eq!(format!("{acc:.6}"), f[2], "{line}");
    }
}
