//! Arabic text preprocessing: normalization, tokenization, punctuation
//! removal and light stemming.
//!
//! The pipeline order is normalize → tokenize → remove punctuation → stem.
//! Contradiction features need the intermediate stages too, so
//! [`Preprocessor::analyze`] returns all of them at once.

use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TATWEEL: char = '\u{0640}';

/// Clause separators. They delimit tokens but are not emitted as tokens.
const SEPARATORS: [char; 4] = ['\u{060C}', '\u{061B}', ',', ';'];

/// Arabic punctuation marks treated as punctuation regardless of category.
const ARABIC_MARKS: [char; 3] = ['\u{060C}', '\u{061B}', '\u{061F}'];

pub type TokenList = Vec<String>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalizationConfig {
    pub strip_tatweel: bool,
    pub unify_alef_variants: bool,
    pub strip_diacritics: bool,
    pub map_arabic_indic_digits: bool,
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        Self {
            strip_tatweel: true,
            unify_alef_variants: true,
            strip_diacritics: true,
            map_arabic_indic_digits: true,
        }
    }
}

/// Applies the enabled normalization steps. Idempotent for every config.
pub fn normalize(text: &str, cfg: &NormalizationConfig) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        if cfg.strip_tatweel && c == TATWEEL {
            continue;
        }
        if cfg.strip_diacritics && ('\u{064B}'..='\u{0652}').contains(&c) {
            continue;
        }
        let c = match c {
            '\u{0622}' | '\u{0623}' | '\u{0625}' if cfg.unify_alef_variants => '\u{0627}',
            '\u{0660}'..='\u{0669}' if cfg.map_arabic_indic_digits => {
                char::from(b'0' + (c as u32 - 0x0660) as u8)
            }
            '\u{06F0}'..='\u{06F9}' if cfg.map_arabic_indic_digits => {
                char::from(b'0' + (c as u32 - 0x06F0) as u8)
            }
            other => other,
        };
        out.push(c);
    }
    out
}

fn token_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[\p{P}\p{S}]+|[^\s\p{P}\p{S}]+").unwrap())
}

pub fn is_punctuation_char(c: char) -> bool {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"^[\p{P}\p{S}]$").unwrap());
    if ARABIC_MARKS.contains(&c) {
        return true;
    }
    let mut buf = [0u8; 4];
    re.is_match(c.encode_utf8(&mut buf))
}

/// True when the token is non-empty and made only of punctuation/symbols.
pub fn is_punctuation_token(token: &str) -> bool {
    !token.is_empty() && token.chars().all(is_punctuation_char)
}

/// Splits on whitespace and splits runs of punctuation off as their own
/// tokens (`"العربية.."` → `["العربية", ".."]`). Clause separators
/// (Arabic comma and semicolon, and their ASCII forms) only delimit.
pub fn tokenize(text: &str) -> TokenList {
    let mut tokens = Vec::new();
    for m in token_regex().find_iter(text) {
        let s = m.as_str();
        if s.chars().next().is_some_and(is_punctuation_char) {
            let kept: String = s.chars().filter(|c| !SEPARATORS.contains(c)).collect();
            if !kept.is_empty() {
                tokens.push(kept);
            }
        } else {
            tokens.push(s.to_string());
        }
    }
    tokens
}

pub fn remove_punctuation(tokens: &[String]) -> TokenList {
    tokens
        .iter()
        .filter(|t| !is_punctuation_token(t))
        .cloned()
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct Affix {
    text: Vec<char>,
    min_residual: usize,
}

/// Prefix and suffix tables for the light stemmer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StemmerRules {
    prefixes: Vec<Affix>,
    suffixes: Vec<Affix>,
}

pub const DEFAULT_MIN_RESIDUAL: usize = 2;

impl StemmerRules {
    /// Parses the rule-file format: `[prefixes]` / `[suffixes]` sections,
    /// one affix per line with an optional minimum residual length.
    pub fn parse(text: &str) -> Result<Self> {
        #[derive(PartialEq)]
        enum Section {
            None,
            Prefixes,
            Suffixes,
        }
        let mut section = Section::None;
        let mut prefixes = Vec::new();
        let mut suffixes = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match line {
                "[prefixes]" => section = Section::Prefixes,
                "[suffixes]" => section = Section::Suffixes,
                _ => {
                    let mut fields = line.split_whitespace();
                    let affix: Vec<char> = fields.next().unwrap_or_default().chars().collect();
                    let min_residual = match fields.next() {
                        Some(v) => v.parse::<usize>().map_err(|_| Error::Row {
                            line: i as u64 + 1,
                            message: format!("bad minimum length {v:?}"),
                        })?,
                        None => DEFAULT_MIN_RESIDUAL,
                    };
                    if fields.next().is_some() {
                        return Err(Error::Row {
                            line: i as u64 + 1,
                            message: "expected `affix [min_residual]`".into(),
                        });
                    }
                    let entry = Affix {
                        text: affix,
                        min_residual: min_residual.max(1),
                    };
                    match section {
                        Section::Prefixes => prefixes.push(entry),
                        Section::Suffixes => suffixes.push(entry),
                        Section::None => {
                            return Err(Error::Row {
                                line: i as u64 + 1,
                                message: "affix outside of a [prefixes]/[suffixes] section".into(),
                            })
                        }
                    }
                }
            }
        }
        // Longest match first; stable so file order breaks ties.
        prefixes.sort_by_key(|a| std::cmp::Reverse(a.text.len()));
        suffixes.sort_by_key(|a| std::cmp::Reverse(a.text.len()));
        Ok(Self { prefixes, suffixes })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn builtin() -> &'static StemmerRules {
        static RULES: OnceLock<StemmerRules> = OnceLock::new();
        RULES.get_or_init(|| {
            StemmerRules::parse(include_str!("../resources/stemmer_rules.txt"))
                .expect("built-in stemmer rules parse")
        })
    }

    /// Light-stems one normalized token. Tokens shorter than three letters
    /// and tokens containing anything other than Arabic letters are
    /// returned unchanged.
    pub fn stem(&self, token: &str) -> String {
        let mut chars: Vec<char> = token.chars().collect();
        if chars.len() < 3 || !chars.iter().all(|c| ('\u{0621}'..='\u{064A}').contains(c)) {
            return token.to_string();
        }
        if let Some(a) = self
            .suffixes
            .iter()
            .find(|a| chars.ends_with(&a.text) && chars.len() - a.text.len() >= a.min_residual)
        {
            chars.truncate(chars.len() - a.text.len());
        }
        if let Some(a) = self
            .prefixes
            .iter()
            .find(|a| chars.starts_with(&a.text) && chars.len() - a.text.len() >= a.min_residual)
        {
            chars.drain(..a.text.len());
        }
        chars.into_iter().collect()
    }
}

impl Default for StemmerRules {
    fn default() -> Self {
        Self::builtin().clone()
    }
}

/// Stems with the built-in rule table.
pub fn stem(token: &str) -> String {
    StemmerRules::builtin().stem(token)
}

/// Every stage of the pipeline for one sentence.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Analyzed {
    pub normalized: String,
    pub tokens: TokenList,
    /// Punctuation-free, unstemmed tokens.
    pub clean: TokenList,
    pub stems: TokenList,
}

impl Analyzed {
    /// The punctuation-free unstemmed sentence joined with single spaces,
    /// which is what char-level analyzers consume.
    pub fn clean_text(&self) -> String {
        self.clean.join(" ")
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Preprocessor {
    pub normalization: NormalizationConfig,
    pub rules: StemmerRules,
}

impl Preprocessor {
    pub fn new(normalization: NormalizationConfig, rules: StemmerRules) -> Self {
        Self {
            normalization,
            rules,
        }
    }

    pub fn normalize(&self, text: &str) -> String {
        normalize(text, &self.normalization)
    }

    pub fn analyze(&self, text: &str) -> Analyzed {
        let normalized = self.normalize(text);
        let tokens = tokenize(&normalized);
        let clean = remove_punctuation(&tokens);
        let stems = clean.iter().map(|t| self.rules.stem(t)).collect();
        Analyzed {
            normalized,
            tokens,
            clean,
            stems,
        }
    }

    pub fn preprocess(&self, text: &str) -> TokenList {
        self.analyze(text).stems
    }
}

/// Full pipeline with the given normalization and the built-in rules.
pub fn preprocess(text: &str, cfg: &NormalizationConfig) -> TokenList {
    Preprocessor::new(*cfg, StemmerRules::builtin().clone()).preprocess(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn strips_diacritics_and_maps_digits() {
        let cfg = NormalizationConfig::default();
        assert_eq!(normalize("كِتَاب", &cfg), "كتاب");
        assert_eq!(normalize("٥٠", &cfg), "50");
        assert_eq!(normalize("إلا أن آدم", &cfg), "الا ان ادم");
        assert_eq!(normalize("كـــتاب", &cfg), "كتاب");
    }

    #[test]
    fn disabled_flags_leave_text_alone() {
        let cfg = NormalizationConfig {
            strip_tatweel: false,
            unify_alef_variants: false,
            strip_diacritics: false,
            map_arabic_indic_digits: false,
        };
        let s = "كـِتاب إلا ٥";
        assert_eq!(normalize(s, &cfg), s);
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("عملنا في هذا البحث"), toks(&["عملنا", "في", "هذا", "البحث"]));
        assert!(tokenize("").is_empty());
        assert!(tokenize("   \t\n").is_empty());
        assert_eq!(tokenize("اللغات !"), toks(&["اللغات", "!"]));
        assert_eq!(tokenize("العربية.."), toks(&["العربية", ".."]));
        assert_eq!(tokenize("اللغات، وليس"), toks(&["اللغات", "وليس"]));
        assert_eq!(tokenize("لماذا؟"), toks(&["لماذا", "؟"]));
    }

    #[test]
    fn punctuation_removal() {
        let t = toks(&["عملنا", "اللغات", "!"]);
        assert_eq!(remove_punctuation(&t), toks(&["عملنا", "اللغات"]));
        assert!(remove_punctuation(&toks(&["..", ".."])).is_empty());
        let plain = toks(&["كتاب", "جديد"]);
        assert_eq!(remove_punctuation(&plain), plain);
        assert!(is_punctuation_token("؟"));
        assert!(is_punctuation_token("%$"));
        assert!(!is_punctuation_token("50%"));
    }

    #[test]
    fn stem_examples() {
        assert_eq!(stem("عملنا"), "عمل");
        assert_eq!(stem("العربية"), "عرب");
        assert_eq!(stem("الاستدلال"), "استدلال");
        assert_eq!(stem("فهم"), "فهم");
        assert_eq!(stem("1987"), "1987");
        assert_eq!(stem("في"), "في");
        assert_eq!(stem("لا"), "لا");
        assert_eq!(stem("والكتاب"), "كتاب");
        assert_eq!(stem("المعلمون"), "معلم");
    }

    #[test]
    fn rule_file_errors() {
        assert!(StemmerRules::parse("ال\n").is_err());
        assert!(StemmerRules::parse("[prefixes]\nال x\n").is_err());
        assert!(StemmerRules::parse("[prefixes]\nال 2 3\n").is_err());
        let r = StemmerRules::parse("[suffixes]\nات\n").unwrap();
        assert_eq!(r.stem("علاقات"), "علاق");
        assert_eq!(r.stem("كتاب"), "كتاب");
    }

    #[test]
    fn preprocess_empty() {
        assert!(preprocess("", &NormalizationConfig::default()).is_empty());
    }

    proptest! {
        #[test]
        fn normalize_idempotent(s in "[\u{0600}-\u{06FF} a-z0-9.!،]{0,40}") {
            let cfg = NormalizationConfig::default();
            let once = normalize(&s, &cfg);
            prop_assert_eq!(normalize(&once, &cfg), once);
        }

        #[test]
        fn tokens_never_contain_whitespace(s in "[\u{0621}-\u{064A} .!?،\t\n0-9]{0,60}") {
            for t in tokenize(&s) {
                prop_assert!(!t.is_empty());
                prop_assert!(!t.chars().any(char::is_whitespace));
            }
        }

        #[test]
        fn preprocess_has_no_punctuation(s in "[\u{0621}-\u{064A} .!?؟،:%]{0,60}") {
            let p = preprocess(&s, &NormalizationConfig::default());
            prop_assert!(p.iter().all(|t| !is_punctuation_token(t)));
            prop_assert!(p.len() <= tokenize(&normalize(&s, &NormalizationConfig::default())).len());
        }
    }
}
