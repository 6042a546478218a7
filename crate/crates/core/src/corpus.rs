//! Labeled sentence-pair datasets: loading, validation, splitting and
//! summary statistics.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textproc::Preprocessor;

/// Three-way inference label.
///
/// The declaration order is the crate-wide tie-breaking order:
/// Contradiction < Entailment < Neutral.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    Contradiction,
    Entailment,
    Neutral,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Contradiction, Label::Entailment, Label::Neutral];
    pub const COUNT: usize = 3;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Label {
        Self::ALL[i]
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Contradiction => "Contradiction",
            Label::Entailment => "Entailment",
            Label::Neutral => "Neutral",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Label {
    type Err = Error;

    /// Case-insensitive English names only. Numeric codes go through
    /// [`ColumnMap::label_codes`].
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "contradiction" => Ok(Label::Contradiction),
            "entailment" => Ok(Label::Entailment),
            "neutral" => Ok(Label::Neutral),
            other => Err(Error::InvalidInput(format!("unknown label {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledPair {
    pub id: String,
    pub premise: String,
    pub hypothesis: String,
    pub label: Label,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    Csv,
    Tsv,
}

impl DataFormat {
    /// `.tsv`/`.tab` → TSV, anything else → CSV.
    pub fn from_path(path: &Path) -> DataFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("tsv") || e.eq_ignore_ascii_case("tab") => {
                DataFormat::Tsv
            }
            _ => DataFormat::Csv,
        }
    }

    fn delimiter(self) -> u8 {
        match self {
            DataFormat::Csv => b',',
            DataFormat::Tsv => b'\t',
        }
    }
}

/// Header names for the four dataset columns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ColumnMap {
    /// `None` means the file has no id column; ids become `row-<n>`.
    pub id: Option<String>,
    pub premise: String,
    pub hypothesis: String,
    pub label: String,
    /// Explicit label codes (e.g. `"1" → Entailment`). Consulted before
    /// the English names.
    pub label_codes: BTreeMap<String, Label>,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            id: Some("id".into()),
            premise: "sentence1".into(),
            hypothesis: "sentence2".into(),
            label: "label".into(),
            label_codes: BTreeMap::new(),
        }
    }
}

impl ColumnMap {
    fn parse_label(&self, raw: &str) -> Result<Label> {
        if let Some(l) = self.label_codes.get(raw.trim()) {
            return Ok(*l);
        }
        raw.parse()
    }
}

pub fn load_dataset(path: &Path, format: DataFormat) -> Result<Vec<LabeledPair>> {
    load_dataset_with(path, format, &ColumnMap::default())
}

pub fn load_dataset_with(
    path: &Path,
    format: DataFormat,
    columns: &ColumnMap,
) -> Result<Vec<LabeledPair>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(file, format, columns)
}

pub fn read_dataset<R: Read>(
    reader: R,
    format: DataFormat,
    columns: &ColumnMap,
) -> Result<Vec<LabeledPair>> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(format.delimiter())
        .has_headers(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim().trim_start_matches('\u{feff}') == name)
            .ok_or_else(|| Error::Schema(format!("missing column {name:?}")))
    };
    let id_col = columns.id.as_deref().map(find).transpose()?;
    let premise_col = find(&columns.premise)?;
    let hypothesis_col = find(&columns.hypothesis)?;
    let label_col = find(&columns.label)?;

    let mut seen = HashSet::new();
    let mut pairs = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(row as u64 + 2, |p| p.line());
        let field = |col: usize| record.get(col).unwrap_or("");
        let row_err = |message: String| Error::Row { line, message };

        let id = match id_col {
            Some(c) => field(c).trim().to_string(),
            None => format!("row-{}", row + 1),
        };
        let premise = field(premise_col).to_string();
        let hypothesis = field(hypothesis_col).to_string();
        if premise.trim().is_empty() {
            return Err(row_err("empty premise".into()));
        }
        if hypothesis.trim().is_empty() {
            return Err(row_err("empty hypothesis".into()));
        }
        let label = columns
            .parse_label(field(label_col))
            .map_err(|e| row_err(e.to_string()))?;
        if !seen.insert(id.clone()) {
            return Err(row_err(format!("duplicate id {id:?}")));
        }
        pairs.push(LabeledPair {
            id,
            premise,
            hypothesis,
            label,
        });
    }
    Ok(pairs)
}

/// Writes pairs with the default header (`id,sentence1,sentence2,label`).
pub fn write_dataset<W: Write>(pairs: &[LabeledPair], writer: W, format: DataFormat) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .delimiter(format.delimiter())
        .from_writer(writer);
    wtr.write_record(["id", "sentence1", "sentence2", "label"])?;
    for p in pairs {
        wtr.write_record([p.id.as_str(), &p.premise, &p.hypothesis, p.label.name()])?;
    }
    wtr.flush().map_err(|e| Error::io("<dataset writer>", e))?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<LabeledPair>,
    pub test: Vec<LabeledPair>,
    pub seed: u64,
    pub ratio: f64,
}

/// Number of training items for `n` items at `ratio`.
///
/// `floor(ratio·n)`, snapping to the nearest integer first when the product
/// is within 1e-9 of it, and clamped so both sides are non-empty. This is
/// the same as taking `ceil((1-ratio)·n)` test items, which gives
/// 5092/1274 for 6366 pairs at 0.8.
pub fn train_size(n: usize, ratio: f64) -> usize {
    let x = ratio * n as f64;
    let nearest = x.round();
    let k = if (x - nearest).abs() < 1e-9 { nearest } else { x.floor() };
    (k as usize).clamp(1, n.saturating_sub(1))
}

fn check_split_args(n: usize, ratio: f64) -> Result<()> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidInput(format!("split ratio {ratio} not in (0, 1)")));
    }
    if n < 2 {
        return Err(Error::InvalidInput(format!("cannot split {n} pairs; need at least 2")));
    }
    Ok(())
}

/// Seeded shuffle followed by a prefix split. Not stratified.
pub fn split_dataset(pairs: &[LabeledPair], ratio: f64, seed: u64) -> Result<DatasetSplit> {
    check_split_args(pairs.len(), ratio)?;
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let k = train_size(pairs.len(), ratio);
    Ok(DatasetSplit {
        train: order[..k].iter().map(|&i| pairs[i].clone()).collect(),
        test: order[k..].iter().map(|&i| pairs[i].clone()).collect(),
        seed,
        ratio,
    })
}

/// Per-label seeded split. Each label contributes `train_size(n_label)`
/// items to train (labels with a single item go to train), so the total can
/// differ from the unstratified split by a few items.
pub fn split_dataset_stratified(
    pairs: &[LabeledPair],
    ratio: f64,
    seed: u64,
) -> Result<DatasetSplit> {
    check_split_args(pairs.len(), ratio)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for label in Label::ALL {
        let mut idx: Vec<usize> = (0..pairs.len()).filter(|&i| pairs[i].label == label).collect();
        idx.shuffle(&mut rng);
        let k = if idx.len() < 2 { idx.len() } else { train_size(idx.len(), ratio) };
        train.extend(idx[..k].iter().copied());
        test.extend(idx[k..].iter().copied());
    }
    train.shuffle(&mut rng);
    test.shuffle(&mut rng);
    Ok(DatasetSplit {
        train: train.into_iter().map(|i| pairs[i].clone()).collect(),
        test: test.into_iter().map(|i| pairs[i].clone()).collect(),
        seed,
        ratio,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    /// Indexed by [`Label::index`].
    pub counts: [usize; 3],
    pub hypothesis_avg: f64,
    pub hypothesis_max: usize,
    pub premise_avg: f64,
    pub premise_max: usize,
}

/// Label counts and token-length statistics. Lengths are counted after
/// normalization, tokenization and punctuation removal.
pub fn compute_stats(pairs: &[LabeledPair], pre: &Preprocessor) -> Result<CorpusStats> {
    if pairs.is_empty() {
        return Err(Error::InvalidInput("cannot compute statistics of an empty dataset".into()));
    }
    let mut counts = [0usize; 3];
    let (mut h_sum, mut h_max, mut p_sum, mut p_max) = (0usize, 0usize, 0usize, 0usize);
    for p in pairs {
        counts[p.label.index()] += 1;
        let h = pre.analyze(&p.hypothesis).clean.len();
        let pr = pre.analyze(&p.premise).clean.len();
        h_sum += h;
        p_sum += pr;
        h_max = h_max.max(h);
        p_max = p_max.max(pr);
    }
    let n = pairs.len() as f64;
    Ok(CorpusStats {
        counts,
        hypothesis_avg: h_sum as f64 / n,
        hypothesis_max: h_max,
        premise_avg: p_sum as f64 / n,
        premise_max: p_max,
    })
}

impl CorpusStats {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    fn metrics(&self) -> [(&'static str, String); 5] {
        [
            ("pairs", self.total().to_string()),
            ("hypothesis_avg_tokens", format!("{:.3}", self.hypothesis_avg)),
            ("hypothesis_max_tokens", self.hypothesis_max.to_string()),
            ("premise_avg_tokens", format!("{:.3}", self.premise_avg)),
            ("premise_max_tokens", self.premise_max.to_string()),
        ]
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for l in Label::ALL {
            out.push_str(&format!("{:<24}{:>10}\n", l.name(), self.counts[l.index()]));
        }
        for (k, v) in self.metrics() {
            out.push_str(&format!("{k:<24}{v:>10}\n"));
        }
        out
    }

    /// `label,count` rows followed by `metric,value` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,count\n");
        for l in Label::ALL {
            out.push_str(&format!("{},{}\n", l.name(), self.counts[l.index()]));
        }
        out.push_str("metric,value\n");
        for (k, v) in self.metrics() {
            out.push_str(&format!("{k},{v}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::InvalidInput(format!("stats csv: {m}"));
        let mut counts = [0usize; 3];
        let mut metrics = BTreeMap::new();
        let mut in_metrics = false;
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line.split_once(',').ok_or_else(|| bad(line))?;
            match (k, v) {
                ("label", "count") => in_metrics = false,
                ("metric", "value") => in_metrics = true,
                _ if in_metrics => {
                    metrics.insert(k.to_string(), v.to_string());
                }
                _ => {
                    let l: Label = k.parse()?;
                    counts[l.index()] = v.parse().map_err(|_| bad(v))?;
                }
            }
        }
        let get = |k: &str| metrics.get(k).ok_or_else(|| bad(k));
        let f = |k: &str| -> Result<f64> { get(k)?.parse().map_err(|_| bad(k)) };
        let u = |k: &str| -> Result<usize> { get(k)?.parse().map_err(|_| bad(k)) };
        Ok(CorpusStats {
            counts,
            hypothesis_avg: f("hypothesis_avg_tokens")?,
            hypothesis_max: u("hypothesis_max_tokens")?,
            premise_avg: f("premise_avg_tokens")?,
            premise_max: u("premise_max_tokens")?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(id: &str, label: Label) -> LabeledPair {
        LabeledPair {
            id: id.into(),
            premise: "كتاب جديد".into(),
            hypothesis: "كتاب".into(),
            label,
        }
    }

    fn read(text: &str) -> Result<Vec<LabeledPair>> {
        read_dataset(text.as_bytes(), DataFormat::Csv, &ColumnMap::default())
    }

    #[test]
    fn label_parsing() {
        assert_eq!("contradiction".parse::<Label>().unwrap(), Label::Contradiction);
        assert_eq!("ENTAILMENT".parse::<Label>().unwrap(), Label::Entailment);
        assert_eq!(" Neutral ".parse::<Label>().unwrap(), Label::Neutral);
        assert!("1".parse::<Label>().is_err());
        assert!("contra".parse::<Label>().is_err());
    }

    #[test]
    fn header_only_is_empty() {
        assert!(read("id,sentence1,sentence2,label\n").unwrap().is_empty());
    }

    #[test]
    fn load_errors() {
        assert!(matches!(read("id,sentence1,label\n"), Err(Error::Schema(_))));
        let e = read("id,sentence1,sentence2,label\n1,a,b,neutral\n2,a,b,maybe\n").unwrap_err();
        assert!(matches!(e, Error::Row { line: 3, .. }), "{e}");
        let e = read("id,sentence1,sentence2,label\n1,a,  ,neutral\n").unwrap_err();
        assert!(matches!(e, Error::Row { line: 2, .. }));
        let e = read("id,sentence1,sentence2,label\n1,a,b,neutral\n1,c,d,neutral\n").unwrap_err();
        assert!(matches!(e, Error::Row { line: 3, .. }));
    }

    #[test]
    fn quoted_fields_and_column_mapping() {
        let text = "pair\tT\tH\tgold\n7\t\"باريس, عاصمة\"\tفرنسا\t-1\n";
        let mut cols = ColumnMap {
            id: Some("pair".into()),
            premise: "T".into(),
            hypothesis: "H".into(),
            label: "gold".into(),
            ..ColumnMap::default()
        };
        assert!(read_dataset(text.as_bytes(), DataFormat::Tsv, &cols).is_err());
        cols.label_codes.insert("-1".into(), Label::Contradiction);
        let pairs = read_dataset(text.as_bytes(), DataFormat::Tsv, &cols).unwrap();
        assert_eq!(pairs[0].premise, "باريس, عاصمة");
        assert_eq!(pairs[0].label, Label::Contradiction);

        let no_id = ColumnMap { id: None, ..ColumnMap::default() };
        let pairs = read_dataset("sentence1,sentence2,label\na,b,neutral\n".as_bytes(), DataFormat::Csv, &no_id).unwrap();
        assert_eq!(pairs[0].id, "row-1");
    }

    #[test]
    fn split_sizes() {
        assert_eq!(train_size(6366, 0.8), 5092);
        assert_eq!(train_size(10, 0.8), 8);
        assert_eq!(train_size(10, 0.7), 7);
        assert_eq!(train_size(2, 0.99), 1);
        let pairs: Vec<_> = (0..10).map(|i| pair(&i.to_string(), Label::Neutral)).collect();
        let s = split_dataset(&pairs, 0.8, 1).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (8, 2));
        assert_eq!(s, split_dataset(&pairs, 0.8, 1).unwrap());
        assert!(split_dataset(&pairs[..1], 0.8, 1).is_err());
        assert!(split_dataset(&pairs, 1.0, 1).is_err());
        assert!(split_dataset(&pairs, 0.0, 1).is_err());
    }

    #[test]
    fn stratified_keeps_label_shares() {
        let pairs: Vec<_> = (0..100)
            .map(|i| pair(&i.to_string(), Label::from_index(i % 3)))
            .collect();
        let s = split_dataset_stratified(&pairs, 0.8, 3).unwrap();
        let c = |v: &[LabeledPair], l| v.iter().filter(|p| p.label == l).count();
        assert_eq!(c(&s.train, Label::Contradiction), 27);
        assert_eq!(c(&s.test, Label::Contradiction), 7);
        assert_eq!(s.train.len() + s.test.len(), 100);
    }

    #[test]
    fn stats_single_pair() {
        let st = compute_stats(&[pair("1", Label::Entailment)], &Preprocessor::default()).unwrap();
        assert_eq!(st.hypothesis_avg, 1.0);
        assert_eq!(st.premise_avg, 2.0);
        assert_eq!(st.counts, [0, 1, 0]);
        assert!(compute_stats(&[], &Preprocessor::default()).is_err());
        assert_eq!(CorpusStats::from_csv(&st.to_csv()).unwrap(), st);
    }
}
