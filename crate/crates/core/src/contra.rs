//! The contradiction vector: named-entity agreement, lexical similarity
//! counts, special-stopword codes and quantity conflicts for a sentence pair.
//!
//! Layout of the default 15-dimensional vector:
//!
//! | slots  | feature                                                    |
//! |--------|------------------------------------------------------------|
//! | 0      | named-entity code (0 none, 1 different, 2 same)            |
//! | 1..4   | synonym, neutral, antonym cross-pair counts                |
//! | 4..10  | one code per special stopword (0 neither, 1 one, 2 both)   |
//! | 10..12 | confirmation flag for premise, hypothesis                  |
//! | 12..15 | number, date, time conflict flags                          |
//!
//! The tri-state codes are ordinal. The stopword block grows with the
//! configured stopword list; everything else is fixed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::textproc::{self, Analyzed, NormalizationConfig, Preprocessor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EntityClass {
    Per,
    Loc,
    Org,
    Misc,
}

impl FromStr for EntityClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "PER" => Ok(EntityClass::Per),
            "LOC" => Ok(EntityClass::Loc),
            "ORG" => Ok(EntityClass::Org),
            "MISC" => Ok(EntityClass::Misc),
            other => Err(Error::InvalidInput(format!("unknown entity class {other:?}"))),
        }
    }
}

fn read_resource(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn data_lines(text: &str) -> impl Iterator<Item = (u64, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i as u64 + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Surface form (1–3 tokens) → entity class, matched longest-first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gazetteer {
    entries: BTreeMap<Vec<String>, EntityClass>,
    max_len: usize,
}

pub type EntityMention = (String, EntityClass);

impl Gazetteer {
    /// Inserts tokens as given. Fails if the surface is already present with
    /// another class.
    pub fn insert(&mut self, surface: Vec<String>, class: EntityClass) -> Result<()> {
        if surface.is_empty() || surface.len() > 3 {
            return Err(Error::InvalidInput(format!(
                "gazetteer entries have 1 to 3 tokens, got {}",
                surface.len()
            )));
        }
        if let Some(prev) = self.entries.get(&surface) {
            if *prev != class {
                return Err(Error::InvalidInput(format!(
                    "{:?} listed as both {prev:?} and {class:?}",
                    surface.join(" ")
                )));
            }
        }
        self.max_len = self.max_len.max(surface.len());
        self.entries.insert(surface, class);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Parses `surface<TAB>class` lines, normalizing surfaces.
    pub fn parse(text: &str, norm: &NormalizationConfig) -> Result<Self> {
        let mut gaz = Gazetteer::default();
        for (line, l) in data_lines(text) {
            let row = |message: String| Error::Row { line, message };
            let (surface, class) = l
                .split_once('\t')
                .ok_or_else(|| row("expected surface<TAB>class".into()))?;
            let class: EntityClass = class.parse().map_err(|e: Error| row(e.to_string()))?;
            let tokens = textproc::remove_punctuation(&textproc::tokenize(&textproc::normalize(
                surface, norm,
            )));
            gaz.insert(tokens, class).map_err(|e| row(e.to_string()))?;
        }
        Ok(gaz)
    }

    pub fn load(path: &Path, norm: &NormalizationConfig) -> Result<Self> {
        Self::parse(&read_resource(path)?, norm)
    }

    pub fn builtin(norm: &NormalizationConfig) -> Self {
        Self::parse(include_str!("../resources/gazetteer.tsv"), norm)
            .expect("built-in gazetteer parses")
    }
}

/// Greedy left-to-right longest-match scan; matches never overlap.
pub fn extract_named_entities(tokens: &[String], gaz: &Gazetteer) -> BTreeSet<EntityMention> {
    let mut found = BTreeSet::new();
    let mut i = 0;
    while i < tokens.len() {
        let longest = (1..=gaz.max_len.min(tokens.len() - i))
            .rev()
            .find_map(|n| gaz.entries.get(&tokens[i..i + n]).map(|c| (n, *c)));
        match longest {
            Some((n, class)) => {
                found.insert((tokens[i..i + n].join(" "), class));
                i += n;
            }
            None => i += 1,
        }
    }
    found
}

/// 0 when neither sentence has an entity, 2 when both have the same
/// non-empty set, 1 otherwise (including one-sided presence).
pub fn ne_feature(a: &BTreeSet<EntityMention>, b: &BTreeSet<EntityMention>) -> u8 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => 0,
        (false, false) if a == b => 2,
        _ => 1,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Synonym,
    Antonym,
}

/// Symmetric word-pair relations.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lexicon {
    relations: BTreeMap<(String, String), Relation>,
}

fn ordered(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl Lexicon {
    pub fn insert(&mut self, a: &str, b: &str, rel: Relation) -> Result<()> {
        let key = ordered(a, b);
        match self.relations.get(&key) {
            Some(prev) if *prev != rel => Err(Error::InvalidInput(format!(
                "({a}, {b}) is both {prev:?} and {rel:?}"
            ))),
            _ => {
                self.relations.insert(key, rel);
                Ok(())
            }
        }
    }

    pub fn relation(&self, a: &str, b: &str) -> Option<Relation> {
        self.relations.get(&ordered(a, b)).copied()
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    /// Parses `word1<TAB>word2<TAB>SYN|ANT`. Words are passed through the
    /// full preprocessor so they compare against sentence stems.
    pub fn parse(text: &str, pre: &Preprocessor) -> Result<Self> {
        let mut lex = Lexicon::default();
        for (line, l) in data_lines(text) {
            let row = |message: String| Error::Row { line, message };
            let fields: Vec<&str> = l.split('\t').collect();
            let [a, b, rel] = fields[..] else {
                return Err(row("expected word1<TAB>word2<TAB>SYN|ANT".into()));
            };
            let rel = match rel.trim().to_ascii_uppercase().as_str() {
                "SYN" => Relation::Synonym,
                "ANT" => Relation::Antonym,
                other => return Err(row(format!("unknown relation {other:?}"))),
            };
            let key = |w: &str| {
                let s = pre.preprocess(w);
                if s.len() == 1 {
                    Ok(s.into_iter().next().unwrap())
                } else {
                    Err(row(format!("{w:?} is not a single word")))
                }
            };
            lex.insert(&key(a)?, &key(b)?, rel).map_err(|e| row(e.to_string()))?;
        }
        Ok(lex)
    }

    pub fn load(path: &Path, pre: &Preprocessor) -> Result<Self> {
        Self::parse(&read_resource(path)?, pre)
    }

    pub fn builtin(pre: &Preprocessor) -> Self {
        Self::parse(include_str!("../resources/lexicon.tsv"), pre).expect("built-in lexicon parses")
    }
}

/// Counts synonym, neutral and antonym pairs over the full cross product of
/// the two stem lists. Equal stems count as synonyms.
pub fn similarity_counts(t1: &[String], t2: &[String], lex: &Lexicon) -> (u32, u32, u32) {
    let (mut syn, mut neutral, mut ant) = (0, 0, 0);
    for a in t1 {
        for b in t2 {
            if a == b {
                syn += 1;
                continue;
            }
            match lex.relation(a, b) {
                Some(Relation::Synonym) => syn += 1,
                Some(Relation::Antonym) => ant += 1,
                None => neutral += 1,
            }
        }
    }
    (syn, neutral, ant)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopwordConfig {
    pub negations: Vec<String>,
    pub exceptions: Vec<String>,
    /// (negation, exception) that together signal confirmation.
    pub confirmation: (String, String),
}

impl StopwordConfig {
    /// Negations then exceptions, in file order. One code slot each.
    pub fn words(&self) -> impl Iterator<Item = &String> {
        self.negations.iter().chain(self.exceptions.iter())
    }

    pub fn len(&self) -> usize {
        self.negations.len() + self.exceptions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn validate(self) -> Result<Self> {
        let all: Vec<&String> = self.words().collect();
        let set: BTreeSet<&String> = all.iter().copied().collect();
        if set.len() != all.len() {
            return Err(Error::Config("stopword lists must be disjoint".into()));
        }
        let single = |w: &String| !w.is_empty() && !w.chars().any(char::is_whitespace);
        if !all.iter().all(|w| single(w)) || !single(&self.confirmation.0) || !single(&self.confirmation.1) {
            return Err(Error::Config("stopwords must be single tokens".into()));
        }
        Ok(self)
    }

    /// Section-tagged TSV: `[negation]`, `[exception]`, `[confirmation]`.
    pub fn parse(text: &str, norm: &NormalizationConfig) -> Result<Self> {
        let mut section = "";
        let mut negations = Vec::new();
        let mut exceptions = Vec::new();
        let mut confirmation = None;
        for (line, l) in data_lines(text) {
            let n = |w: &str| textproc::normalize(w.trim(), norm);
            match l {
                "[negation]" | "[exception]" | "[confirmation]" => section = l,
                _ => match section {
                    "[negation]" => negations.push(n(l)),
                    "[exception]" => exceptions.push(n(l)),
                    "[confirmation]" => {
                        let (a, b) = l.split_once('\t').ok_or_else(|| Error::Row {
                            line,
                            message: "expected negation<TAB>exception".into(),
                        })?;
                        confirmation = Some((n(a), n(b)));
                    }
                    _ => {
                        return Err(Error::Row {
                            line,
                            message: "entry outside of a section".into(),
                        })
                    }
                },
            }
        }
        let confirmation =
            confirmation.ok_or_else(|| Error::Config("stopword file has no [confirmation] pair".into()))?;
        StopwordConfig {
            negations,
            exceptions,
            confirmation,
        }
        .validate()
    }

    pub fn load(path: &Path, norm: &NormalizationConfig) -> Result<Self> {
        Self::parse(&read_resource(path)?, norm)
    }

    pub fn builtin(norm: &NormalizationConfig) -> Self {
        Self::parse(include_str!("../resources/stopwords.tsv"), norm)
            .expect("built-in stopwords parse")
    }
}

/// Per-stopword codes and per-sentence confirmation flags.
pub fn stopword_features(t1: &[String], t2: &[String], cfg: &StopwordConfig) -> (Vec<u8>, [u8; 2]) {
    let has = |t: &[String], w: &str| t.iter().any(|x| x == w);
    let codes = cfg
        .words()
        .map(|w| has(t1, w) as u8 + has(t2, w) as u8)
        .collect();
    let (neg, exc) = (&cfg.confirmation.0, &cfg.confirmation.1);
    let confirm = |t: &[String]| (has(t, neg) && has(t, exc)) as u8;
    (codes, [confirm(t1), confirm(t2)])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QuantityKind {
    Number,
    Date,
    Time,
}

impl QuantityKind {
    pub const ALL: [QuantityKind; 3] = [QuantityKind::Number, QuantityKind::Date, QuantityKind::Time];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparator {
    Exact,
    MoreThan,
    LessThan,
    About,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantityMention {
    pub kind: QuantityKind,
    /// Years for dates, minutes since midnight for times.
    pub value: f64,
    pub comparator: Comparator,
}

impl fmt::Display for QuantityMention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} {:?} {}", self.kind, self.comparator, self.value)
    }
}

/// Cue words (normalized) that mark a 4-digit number as a year.
const YEAR_CUES: [&str; 6] = ["عام", "العام", "سنة", "السنة", "عاما", "سنه"];

/// Comparator phrases (normalized), checked in the three words before a number.
const COMPARATOR_CUES: [(&[&str], Comparator); 8] = [
    (&["يزيد", "عن"], Comparator::MoreThan),
    (&["اكثر", "من"], Comparator::MoreThan),
    (&["يقل", "عن"], Comparator::LessThan),
    (&["اقل", "من"], Comparator::LessThan),
    (&["ينقص"], Comparator::LessThan),
    (&["حوالي"], Comparator::About),
    (&["نحو"], Comparator::About),
    (&["قرابة"], Comparator::About),
];

fn quantity_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"(?P<date>\b\d{1,2}/\d{1,2}/(?P<year>\d{4})\b)|(?P<time>\b(?P<h>[01]?\d|2[0-3]):(?P<m>[0-5]\d)\b)|(?P<num>\d+(?:\.\d+)?)",
        )
        .unwrap()
    })
}

fn words(text: &str) -> Vec<String> {
    textproc::remove_punctuation(&textproc::tokenize(text))
}

fn comparator_before(prev: &[String]) -> Comparator {
    let window = &prev[prev.len().saturating_sub(3)..];
    for (phrase, cmp) in COMPARATOR_CUES {
        if window.windows(phrase.len()).any(|w| w.iter().zip(phrase).all(|(a, b)| a == b)) {
            return cmp;
        }
    }
    Comparator::Exact
}

/// Regex-based number, date and time detection over normalized text
/// (ASCII digits).
pub fn extract_quantities(text: &str) -> Vec<QuantityMention> {
    let mut out = Vec::new();
    for caps in quantity_regex().captures_iter(text) {
        let m = caps.get(0).unwrap();
        let prev = words(&text[..m.start()]);
        let comparator = comparator_before(&prev);
        let (kind, value) = if let Some(y) = caps.name("year") {
            let year: f64 = y.as_str().parse().unwrap();
            if !(1000.0..=2999.0).contains(&year) {
                continue;
            }
            (QuantityKind::Date, year)
        } else if caps.name("time").is_some() {
            let h: u32 = caps["h"].parse().unwrap();
            let mi: u32 = caps["m"].parse().unwrap();
            (QuantityKind::Time, f64::from(h * 60 + mi))
        } else {
            let value: f64 = caps["num"].parse().unwrap();
            if !value.is_finite() {
                continue;
            }
            let next = words(&text[m.end()..]);
            let near = prev[prev.len().saturating_sub(2)..]
                .iter()
                .chain(next.iter().take(2))
                .any(|w| YEAR_CUES.contains(&w.as_str()));
            let is_year = value.fract() == 0.0 && (1000.0..=2999.0).contains(&value) && near;
            if is_year {
                (QuantityKind::Date, value)
            } else {
                (QuantityKind::Number, value)
            }
        };
        out.push(QuantityMention {
            kind,
            value,
            comparator,
        });
    }
    out
}

/// Closed/open interval a mention admits: (lo, hi, lo_inclusive, hi_inclusive).
fn interval(q: &QuantityMention) -> (f64, f64, bool, bool) {
    match q.comparator {
        Comparator::Exact => (q.value, q.value, true, true),
        Comparator::MoreThan => (q.value, f64::INFINITY, false, false),
        Comparator::LessThan => (f64::NEG_INFINITY, q.value, false, false),
        Comparator::About => {
            let tol = f64::max(1.0, 0.1 * q.value.abs());
            (q.value - tol, q.value + tol, true, true)
        }
    }
}

/// Two mentions are compatible when the value sets they admit intersect.
/// Exact/Exact reduces to equality, Exact x vs MoreThan y to x > y, and
/// Exact x vs About y to |x − y| ≤ max(1, 0.1·y).
pub fn compatible(a: &QuantityMention, b: &QuantityMention) -> bool {
    let (alo, ahi, alo_in, ahi_in) = interval(a);
    let (blo, bhi, blo_in, bhi_in) = interval(b);
    let (lo, lo_in) = if alo > blo {
        (alo, alo_in)
    } else if blo > alo {
        (blo, blo_in)
    } else {
        (alo, alo_in && blo_in)
    };
    let (hi, hi_in) = if ahi < bhi {
        (ahi, ahi_in)
    } else if bhi < ahi {
        (bhi, bhi_in)
    } else {
        (ahi, ahi_in && bhi_in)
    };
    lo < hi || (lo == hi && lo_in && hi_in)
}

/// 1 iff both sides mention `kind` and no cross pair is compatible.
pub fn quantity_conflict(q1: &[QuantityMention], q2: &[QuantityMention], kind: QuantityKind) -> u8 {
    let a: Vec<_> = q1.iter().filter(|q| q.kind == kind).collect();
    let b: Vec<_> = q2.iter().filter(|q| q.kind == kind).collect();
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let any_compatible = a.iter().any(|x| b.iter().any(|y| compatible(x, y)));
    (!any_compatible) as u8
}

/// Everything the extractor needs, loaded once and shared read-only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContraResources {
    pub gazetteer: Gazetteer,
    pub lexicon: Lexicon,
    pub stopwords: StopwordConfig,
}

impl ContraResources {
    pub fn builtin(pre: &Preprocessor) -> Self {
        Self {
            gazetteer: Gazetteer::builtin(&pre.normalization),
            lexicon: Lexicon::builtin(pre),
            stopwords: StopwordConfig::builtin(&pre.normalization),
        }
    }

    /// Loads each resource from its path when given, else the built-in one.
    /// Any missing file is reported here, before extraction starts.
    pub fn load(
        pre: &Preprocessor,
        gazetteer: Option<&Path>,
        lexicon: Option<&Path>,
        stopwords: Option<&Path>,
    ) -> Result<Self> {
        let cfg_err = |what: &str, e: Error| Error::Config(format!("{what}: {e}"));
        Ok(Self {
            gazetteer: match gazetteer {
                Some(p) => Gazetteer::load(p, &pre.normalization).map_err(|e| cfg_err("gazetteer", e))?,
                None => Gazetteer::builtin(&pre.normalization),
            },
            lexicon: match lexicon {
                Some(p) => Lexicon::load(p, pre).map_err(|e| cfg_err("lexicon", e))?,
                None => Lexicon::builtin(pre),
            },
            stopwords: match stopwords {
                Some(p) => StopwordConfig::load(p, &pre.normalization).map_err(|e| cfg_err("stopwords", e))?,
                None => StopwordConfig::builtin(&pre.normalization),
            },
        })
    }

    pub fn dimension(&self) -> usize {
        1 + 3 + self.stopwords.len() + 2 + 3
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContraVector {
    pub ne_code: u8,
    pub syn_count: u32,
    pub neutral_count: u32,
    pub ant_count: u32,
    pub stopword_codes: Vec<u8>,
    pub confirm_flags: [u8; 2],
    /// Number, date, time.
    pub quantity_conflicts: [u8; 3],
}

impl ContraVector {
    pub fn dimension(&self) -> usize {
        1 + 3 + self.stopword_codes.len() + 2 + 3
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dimension());
        v.push(f64::from(self.ne_code));
        v.extend([self.syn_count, self.neutral_count, self.ant_count].map(f64::from));
        v.extend(self.stopword_codes.iter().map(|&c| f64::from(c)));
        v.extend(self.confirm_flags.map(f64::from));
        v.extend(self.quantity_conflicts.map(f64::from));
        v
    }

    /// Slot names in layout order, for reports and debugging.
    pub fn slot_names(res: &ContraResources) -> Vec<String> {
        let mut names = vec!["ne".to_string(), "syn".into(), "neutral".into(), "ant".into()];
        names.extend(res.stopwords.words().map(|w| format!("stop:{w}")));
        names.extend(["confirm:premise".into(), "confirm:hypothesis".into()]);
        names.extend(["conflict:number".into(), "conflict:date".into(), "conflict:time".into()]);
        names
    }
}

pub fn build_contra_vector(premise: &Analyzed, hypothesis: &Analyzed, res: &ContraResources) -> ContraVector {
    let ne1 = extract_named_entities(&premise.clean, &res.gazetteer);
    let ne2 = extract_named_entities(&hypothesis.clean, &res.gazetteer);
    let (syn_count, neutral_count, ant_count) =
        similarity_counts(&premise.stems, &hypothesis.stems, &res.lexicon);
    let (stopword_codes, confirm_flags) =
        stopword_features(&premise.clean, &hypothesis.clean, &res.stopwords);
    let q1 = extract_quantities(&premise.normalized);
    let q2 = extract_quantities(&hypothesis.normalized);
    ContraVector {
        ne_code: ne_feature(&ne1, &ne2),
        syn_count,
        neutral_count,
        ant_count,
        stopword_codes,
        confirm_flags,
        quantity_conflicts: QuantityKind::ALL.map(|k| quantity_conflict(&q1, &q2, k)),
    }
}

/// Builds contradiction vectors for many analyzed pairs.
pub fn build_contra_batch(
    pairs: &[(Analyzed, Analyzed)],
    res: &ContraResources,
    exec: Exec,
) -> Vec<ContraVector> {
    exec.map_slice(pairs, |(p, h)| build_contra_vector(p, h, res))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn mention(kind: QuantityKind, value: f64, comparator: Comparator) -> QuantityMention {
        QuantityMention {
            kind,
            value,
            comparator,
        }
    }

    fn gaz(entries: &[(&str, EntityClass)]) -> Gazetteer {
        let mut g = Gazetteer::default();
        for (s, c) in entries {
            g.insert(s.split(' ').map(String::from).collect(), *c).unwrap();
        }
        g
    }

    #[test]
    fn named_entities() {
        let g = gaz(&[("باريس", EntityClass::Loc), ("ليون", EntityClass::Loc), ("فرنسا", EntityClass::Loc)]);
        let found = extract_named_entities(&toks(&["باريس", "عاصمة", "فرنسا"]), &g);
        let surfaces: Vec<_> = found.iter().map(|(s, _)| s.as_str()).collect();
        assert_eq!(surfaces, ["باريس", "فرنسا"]);
        assert!(extract_named_entities(&toks(&["كتاب", "جديد"]), &g).is_empty());
    }

    /// Brute force: every maximal non-overlapping greedy scan must agree with
    /// checking each start position for all lengths.
    #[test]
    fn longest_match_beats_unigram() {
        let g = gaz(&[("عبد الله", EntityClass::Per), ("عبد", EntityClass::Per), ("الله", EntityClass::Misc)]);
        let tokens = toks(&["قال", "عبد", "الله", "و", "عبد"]);
        let found = extract_named_entities(&tokens, &g);
        let mut expected = BTreeSet::new();
        let mut i = 0;
        while i < tokens.len() {
            let mut best = None;
            for n in 1..=3.min(tokens.len() - i) {
                if let Some(c) = g.entries.get(&tokens[i..i + n]) {
                    best = Some((n, *c));
                }
            }
            match best {
                Some((n, c)) => {
                    expected.insert((tokens[i..i + n].join(" "), c));
                    i += n;
                }
                None => i += 1,
            }
        }
        assert_eq!(found, expected);
        assert!(found.contains(&("عبد الله".to_string(), EntityClass::Per)));
        assert!(!found.contains(&("الله".to_string(), EntityClass::Misc)));
    }

    #[test]
    fn ne_codes() {
        let s = |v: &[&str]| -> BTreeSet<EntityMention> {
            v.iter().map(|x| (x.to_string(), EntityClass::Loc)).collect()
        };
        assert_eq!(ne_feature(&s(&["باريس", "فرنسا"]), &s(&["ليون", "فرنسا"])), 1);
        assert_eq!(ne_feature(&s(&[]), &s(&[])), 0);
        assert_eq!(ne_feature(&s(&["باريس"]), &s(&["باريس"])), 2);
        assert_eq!(ne_feature(&s(&["باريس"]), &s(&[])), 1);
    }

    #[test]
    fn similarity_examples() {
        let mut lex = Lexicon::default();
        lex.insert("أفل", "أشرق", Relation::Antonym).unwrap();
        // Cross pairs: (أفل,أشرق)=ant, (أفل,شمس), (قمر,أشرق), (قمر,شمس) neutral.
        assert_eq!(similarity_counts(&toks(&["أفل", "قمر"]), &toks(&["أشرق", "شمس"]), &lex), (0, 3, 1));
        assert_eq!(similarity_counts(&toks(&["قمر"]), &toks(&["قمر"]), &Lexicon::default()), (1, 0, 0));
        assert_eq!(
            similarity_counts(&toks(&["ا", "ب"]), &toks(&["ج", "د", "ه"]), &Lexicon::default()),
            (0, 6, 0)
        );
        assert_eq!(lex.relation("أشرق", "أفل"), Some(Relation::Antonym));
        assert!(lex.insert("أشرق", "أفل", Relation::Synonym).is_err());
    }

    #[test]
    fn builtin_resources_load() {
        let pre = Preprocessor::default();
        let res = ContraResources::builtin(&pre);
        assert!(res.gazetteer.len() >= 190, "{}", res.gazetteer.len());
        assert!(res.lexicon.len() >= 90);
        assert_eq!(res.stopwords.len(), 6);
        assert_eq!(res.dimension(), 15);
        assert_eq!(res.stopwords.confirmation, ("لا".to_string(), "الا".to_string()));
    }

    #[test]
    fn stopword_example() {
        let pre = Preprocessor::default();
        let cfg = StopwordConfig::builtin(&pre.normalization);
        let a = pre.analyze("لا إله");
        let b = pre.analyze("لا إله إلا الله");
        let (codes, confirm) = stopword_features(&a.clean, &b.clean, &cfg);
        // ما لا ليس الا سوى عدا
        assert_eq!(codes, vec![0, 2, 0, 1, 0, 0]);
        assert_eq!(confirm, [0, 1]);
        let (codes, confirm) = stopword_features(&toks(&["كتاب"]), &toks(&["قلم"]), &cfg);
        assert_eq!(codes, vec![0; 6]);
        assert_eq!(confirm, [0, 0]);
    }

    #[test]
    fn stopword_file_validation() {
        let n = NormalizationConfig::default();
        assert!(StopwordConfig::parse("[negation]\nلا\n[exception]\nلا\n[confirmation]\nلا\tلا\n", &n).is_err());
        assert!(StopwordConfig::parse("[negation]\nلا\n", &n).is_err());
        assert!(StopwordConfig::parse("لا\n", &n).is_err());
    }

    #[test]
    fn quantities() {
        let pre = Preprocessor::default();
        let q = |s: &str| extract_quantities(&pre.normalize(s));
        assert_eq!(q("ولد خالد عام 1987"), vec![mention(QuantityKind::Date, 1987.0, Comparator::Exact)]);
        assert_eq!(q("وما يزيد عن 50 قتيلاً"), vec![mention(QuantityKind::Number, 50.0, Comparator::MoreThan)]);
        assert!(q("لا أرقام هنا").is_empty());
        assert_eq!(q("أقل من 7"), vec![mention(QuantityKind::Number, 7.0, Comparator::LessThan)]);
        assert_eq!(q("حوالي 3.5 كيلو"), vec![mention(QuantityKind::Number, 3.5, Comparator::About)]);
        assert_eq!(q("في الساعة 10:30"), vec![mention(QuantityKind::Time, 630.0, Comparator::Exact)]);
        assert_eq!(q("بتاريخ 12/5/1990"), vec![mention(QuantityKind::Date, 1990.0, Comparator::Exact)]);
        assert_eq!(q("ولد عام ١٩٨٧"), vec![mention(QuantityKind::Date, 1987.0, Comparator::Exact)]);
        assert_eq!(q("باع 1987 كتابا"), vec![mention(QuantityKind::Number, 1987.0, Comparator::Exact)]);
        assert_eq!(q("25:99").len(), 2);
    }

    #[test]
    fn conflicts() {
        use Comparator::*;
        use QuantityKind::*;
        assert_eq!(quantity_conflict(&[mention(Date, 1987.0, Exact)], &[mention(Date, 1990.0, Exact)], Date), 1);
        assert_eq!(quantity_conflict(&[mention(Number, 60.0, Exact)], &[mention(Number, 50.0, MoreThan)], Number), 0);
        assert_eq!(quantity_conflict(&[mention(Number, 60.0, Exact)], &[mention(Number, 50.0, LessThan)], Number), 1);
        assert_eq!(quantity_conflict(&[mention(Number, 60.0, Exact)], &[], Number), 0);
        assert_eq!(quantity_conflict(&[mention(Number, 60.0, Exact)], &[mention(Date, 60.0, Exact)], Number), 0);
        assert_eq!(quantity_conflict(&[mention(Number, 95.0, Exact)], &[mention(Number, 100.0, About)], Number), 0);
        assert_eq!(quantity_conflict(&[mention(Number, 89.0, Exact)], &[mention(Number, 100.0, About)], Number), 1);
        assert_eq!(quantity_conflict(&[mention(Number, 3.0, Exact)], &[mention(Number, 2.0, About)], Number), 0);
        assert_eq!(quantity_conflict(&[mention(Number, 50.0, MoreThan)], &[mention(Number, 50.0, LessThan)], Number), 1);
        assert_eq!(quantity_conflict(&[mention(Number, 50.0, Exact)], &[mention(Number, 50.0, MoreThan)], Number), 1);
    }

    #[test]
    fn vector_layout() {
        let pre = Preprocessor::default();
        let res = ContraResources::builtin(&pre);
        let a = pre.analyze("لا أحد يعرف الطريق");
        let v = build_contra_vector(&a, &a, &res);
        assert_eq!(v.ne_code, 0);
        assert_eq!(v.ant_count, 0);
        assert_eq!(v.stopword_codes[1], 2);
        assert_eq!(v.quantity_conflicts, [0, 0, 0]);
        assert_eq!(v.to_vec().len(), 15);
        assert_eq!(ContraVector::slot_names(&res).len(), 15);
        let n = a.stems.len() as u32;
        assert_eq!(v.syn_count + v.neutral_count + v.ant_count, n * n);
    }

    #[test]
    fn missing_resource_is_config_error() {
        let pre = Preprocessor::default();
        let e = ContraResources::load(&pre, Some(Path::new("/nonexistent/gaz.tsv")), None, None).unwrap_err();
        assert!(matches!(e, Error::Config(_)));
    }
}
