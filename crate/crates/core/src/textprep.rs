//! Text normalization: a raw case description becomes a sequence of
//! lowercase tokens.
//!
//! Stage order is fixed: tokenize, expand contractions, numbers to words,
//! stopword removal, lemmatization. Every stage except tokenization can be
//! switched off through [`PipelineConfig`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};
use crate::fingerprint;

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");
const DEFAULT_CONTRACTIONS: &str = include_str!("../data/contractions.tsv");

/// Bumped whenever the built-in lemmatizer tables or rules change.
const LEMMATIZER_VERSION: u32 = 1;

/// Output of [`Pipeline::preprocess`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedDocument {
    pub source_id: String,
    pub tokens: Vec<String>,
    pub pipeline_fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub stopword_list: BTreeSet<String>,
    /// Contraction table: `don't` -> `[do, not]`.
    pub contractions: BTreeMap<String, Vec<String>>,
    pub expand_contractions: bool,
    pub numbers_to_words: bool,
    pub preserve_section_refs: bool,
    pub lemmatize: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            stopword_list: parse_stopwords(DEFAULT_STOPWORDS),
            contractions: parse_contractions(DEFAULT_CONTRACTIONS)
                .expect("built-in contraction table is well-formed"),
            expand_contractions: true,
            numbers_to_words: true,
            preserve_section_refs: true,
            lemmatize: true,
        }
    }
}

impl PipelineConfig {
    /// Tokenization only.
    pub fn tokenize_only() -> Self {
        PipelineConfig {
            stopword_list: BTreeSet::new(),
            expand_contractions: false,
            numbers_to_words: false,
            preserve_section_refs: false,
            lemmatize: false,
            ..Default::default()
        }
    }

    pub fn load_stopwords(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.stopword_list = parse_stopwords(&text);
        Ok(())
    }

    pub fn load_contractions(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.contractions =
            parse_contractions(&text).map_err(|msg| Error::artifact(path, msg))?;
        Ok(())
    }

    /// Stable hash of every option that affects output.
    pub fn fingerprint(&self) -> String {
        #[derive(Serialize)]
        struct Keyed<'a> {
            config: &'a PipelineConfig,
            lemmatizer_version: u32,
        }
        fingerprint::of_json(&Keyed {
            config: self,
            lemmatizer_version: LEMMATIZER_VERSION,
        })
    }
}

/// One lowercase entry per line; `#` starts a comment line.
pub fn parse_stopwords(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

/// `word<TAB>expansion words` per line.
pub fn parse_contractions(text: &str) -> std::result::Result<BTreeMap<String, Vec<String>>, String> {
    let mut table = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (word, expansion) = line
            .split_once('\t')
            .ok_or_else(|| format!("line {}: expected `word<TAB>expansion`", i + 1))?;
        let words: Vec<String> = expansion.split_whitespace().map(str::to_lowercase).collect();
        if words.is_empty() {
            return Err(format!("line {}: empty expansion", i + 1));
        }
        table.insert(normalize_apostrophes(&word.trim().to_lowercase()), words);
    }
    Ok(table)
}

fn normalize_apostrophes(s: &str) -> String {
    s.replace(['\u{2019}', '\u{2018}', '`'], "'")
}

fn section_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"(?x)
            §+\s*(?P<sign>[0-9]+)
            | \b(?P<word>section|article)\s+(?P<num>[0-9]+)\b
            | (?P<abbr>\p{L}(?:\.\p{L})+\.?)
            | (?P<tok>[\p{L}\p{N}]+(?:'[\p{L}\p{N}]+)*)",
        )
        .unwrap()
    })
}

fn plain_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"(?x)
            (?P<abbr>\p{L}(?:\.\p{L})+\.?)
            | (?P<tok>[\p{L}\p{N}]+(?:'[\p{L}\p{N}]+)*)",
        )
        .unwrap()
    })
}

/// Split text into lowercase tokens.
///
/// Punctuation is dropped except for the dots inside dotted abbreviations
/// (`u.s.c.`) and apostrophes inside words. With `preserve_section_refs`,
/// `§ 1983` becomes `§1983` and `section 5` becomes `section5`.
pub fn tokenize(text: &str, preserve_section_refs: bool) -> Vec<String> {
    let normalized: String = normalize_apostrophes(&text.nfkc().collect::<String>()).to_lowercase();
    let re = if preserve_section_refs {
        section_regex()
    } else {
        plain_regex()
    };
    re.captures_iter(&normalized)
        .map(|caps| {
            if let Some(n) = caps.name("sign") {
                format!("§{}", n.as_str())
            } else if let (Some(w), Some(n)) = (caps.name("word"), caps.name("num")) {
                format!("{}{}", w.as_str(), n.as_str())
            } else {
                caps.get(0).unwrap().as_str().to_string()
            }
        })
        .collect()
}

/// True for tokens produced by section-reference fusion.
pub fn is_section_ref(token: &str) -> bool {
    if let Some(rest) = token.strip_prefix('§') {
        return !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit());
    }
    ["section", "article"].iter().any(|w| {
        token
            .strip_prefix(w)
            .is_some_and(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
    })
}

/// Expand table contractions; strip possessive `'s`; pass anything else through.
pub fn expand_contractions(tokens: &[String], table: &BTreeMap<String, Vec<String>>) -> Vec<String> {
    let mut out = Vec::with_capacity(tokens.len());
    for tok in tokens {
        if let Some(expansion) = table.get(tok.as_str()) {
            out.extend(expansion.iter().cloned());
        } else if let Some(stem) = tok.strip_suffix("'s").filter(|s| !s.is_empty()) {
            out.push(stem.to_string());
        } else {
            out.push(tok.clone());
        }
    }
    out
}

pub fn remove_stopwords(tokens: &[String], stopwords: &BTreeSet<String>) -> Vec<String> {
    tokens
        .iter()
        .filter(|t| !stopwords.contains(t.as_str()))
        .cloned()
        .collect()
}

const ONES: [&str; 20] = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
    "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen",
    "nineteen",
];
const TENS: [&str; 10] = [
    "", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety",
];

/// Numbers above this are spelled digit by digit.
pub const MAX_SPELLED_NUMBER: u64 = 1_000_000;

fn below_thousand(n: u64, out: &mut Vec<&'static str>) {
    debug_assert!(n < 1000);
    if n >= 100 {
        out.push(ONES[(n / 100) as usize]);
        out.push("hundred");
    }
    let rest = n % 100;
    if rest == 0 {
        return;
    }
    if rest < 20 {
        out.push(ONES[rest as usize]);
    } else {
        out.push(TENS[(rest / 10) as usize]);
        if rest % 10 != 0 {
            out.push(ONES[(rest % 10) as usize]);
        }
    }
}

/// English words for an unsigned integer, one word per token.
pub fn spell_number(digits: &str) -> Vec<&'static str> {
    let value = digits.parse::<u64>().ok().filter(|&v| v <= MAX_SPELLED_NUMBER);
    let Some(n) = value else {
        return digits.bytes().map(|b| ONES[(b - b'0') as usize]).collect();
    };
    if n == 0 {
        return vec!["zero"];
    }
    let mut out = Vec::new();
    if n == MAX_SPELLED_NUMBER {
        return vec!["one", "million"];
    }
    if n >= 1000 {
        below_thousand(n / 1000, &mut out);
        out.push("thousand");
    }
    below_thousand(n % 1000, &mut out);
    out
}

/// Replace bare integer tokens with English words. Section references are
/// left alone when `preserve_section_refs` is set.
pub fn number_to_words(tokens: &[String], preserve_section_refs: bool) -> Vec<String> {
    let mut out = Vec::with_capacity(tokens.len());
    for tok in tokens {
        let bare = !tok.is_empty() && tok.bytes().all(|b| b.is_ascii_digit());
        if bare && !(preserve_section_refs && is_section_ref(tok)) {
            out.extend(spell_number(tok).into_iter().map(String::from));
        } else {
            out.push(tok.clone());
        }
    }
    out
}

const IRREGULAR: &[(&str, &str)] = &[
    ("am", "be"), ("are", "be"), ("is", "be"), ("was", "be"), ("were", "be"), ("been", "be"),
    ("being", "be"), ("did", "do"), ("does", "do"), ("done", "do"), ("doing", "do"),
    ("has", "have"), ("had", "have"), ("having", "have"), ("held", "hold"), ("made", "make"),
    ("found", "find"), ("brought", "bring"), ("sought", "seek"), ("taken", "take"),
    ("took", "take"), ("given", "give"), ("gave", "give"), ("went", "go"), ("gone", "go"),
    ("children", "child"), ("men", "man"), ("women", "woman"), ("felt", "feel"),
    ("paid", "pay"), ("said", "say"), ("told", "tell"), ("thought", "think"), ("kept", "keep"),
    ("led", "lead"), ("heard", "hear"), ("chose", "choose"), ("chosen", "choose"),
    ("wrote", "write"), ("written", "write"), ("began", "begin"), ("begun", "begin"),
    ("knew", "know"), ("known", "know"), ("saw", "see"), ("seen", "see"), ("stood", "stand"),
    ("understood", "understand"), ("meant", "mean"), ("got", "get"), ("won", "win"),
    ("lost", "lose"), ("struck", "strike"), ("bound", "bind"), ("laid", "lay"),
    ("sold", "sell"), ("sent", "send"), ("spent", "spend"), ("built", "build"),
    ("caught", "catch"), ("taught", "teach"), ("fought", "fight"), ("overruled", "overrule"),
    ("judgments", "judgment"), ("this", "this"), ("thus", "thus"), ("status", "status"),
    ("during", "during"), ("nothing", "nothing"), ("something", "something"),
    ("anything", "anything"), ("everything", "everything"), ("thing", "thing"),
    ("things", "thing"), ("bring", "bring"), ("string", "string"), ("morning", "morning"),
    ("evening", "evening"), ("king", "king"), ("ring", "ring"), ("sing", "sing"),
    ("spring", "spring"), ("ruling", "ruling"), ("rulings", "ruling"), ("hearing", "hearing"),
    ("hearings", "hearing"), ("proceeding", "proceeding"), ("proceedings", "proceeding"),
];

/// Verbs whose base form ends in a silent `e` that suffix stripping would lose.
const SILENT_E_BASES: &[&str] = &[
    "decide", "rule", "argue", "file", "reverse", "vacate", "state", "require", "provide",
    "involve", "conclude", "issue", "use", "base", "receive", "believe", "date", "note",
    "charge", "prove", "cause", "raise", "serve", "pursue", "violate", "challenge", "dissolve",
    "enforce", "execute", "indicate", "induce", "introduce", "judge", "license", "oppose",
    "produce", "purchase", "release", "remove", "resolve", "reverse", "seize", "separate",
    "terminate", "waive", "write", "continue", "define", "describe", "determine", "dispose",
    "emphasize", "establish", "evidence", "force", "impose", "include", "interfere",
    "litigate", "merge", "mandate", "negotiate", "practice", "prescribe",
    "prosecute", "regulate", "relate", "rescue", "retire", "sentence", "settle", "subpoena",
    "suppose", "tolerate", "trade", "vote",
];

fn exceptions() -> &'static HashMap<String, String> {
    static TABLE: OnceLock<HashMap<String, String>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table: HashMap<String, String> = IRREGULAR
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        for base in SILENT_E_BASES {
            let stem = &base[..base.len() - 1];
            for suffix in ["ed", "ing", "es", "s"] {
                let form = if suffix == "s" {
                    format!("{base}s")
                } else {
                    format!("{stem}{suffix}")
                };
                table.entry(form).or_insert_with(|| base.to_string());
            }
            table.entry(base.to_string()).or_insert_with(|| base.to_string());
        }
        table
    })
}

fn has_vowel(s: &str) -> bool {
    s.bytes().any(|b| matches!(b, b'a' | b'e' | b'i' | b'o' | b'u' | b'y'))
}

fn undouble(stem: &str) -> &str {
    let b = stem.as_bytes();
    let n = b.len();
    if n >= 4 && b[n - 1] == b[n - 2] && !matches!(b[n - 1], b'l' | b's' | b'z') && !has_vowel(&stem[n - 1..])
    {
        &stem[..n - 1]
    } else {
        stem
    }
}

fn lemma_step(tok: &str) -> Option<String> {
    if let Some(lemma) = exceptions().get(tok) {
        return (lemma != tok).then(|| lemma.clone());
    }
    if !tok.bytes().all(|b| b.is_ascii_lowercase()) {
        return None;
    }
    let n = tok.len();
    if tok.ends_with("sses") {
        return Some(tok[..n - 2].to_string());
    }
    if n > 4 && tok.ends_with("ies") {
        return Some(format!("{}y", &tok[..n - 3]));
    }
    if let Some(stem) = tok.strip_suffix("ing") {
        if stem.len() >= 3 && has_vowel(stem) {
            return Some(undouble(stem).to_string());
        }
        return None;
    }
    if let Some(stem) = tok.strip_suffix("ed") {
        if stem.len() >= 3 && has_vowel(stem) && !stem.ends_with('e') {
            return Some(undouble(stem).to_string());
        }
        return None;
    }
    if let Some(stem) = tok.strip_suffix('s') {
        if stem.len() >= 3 && !stem.ends_with(['s', 'u', 'i']) {
            return Some(stem.to_string());
        }
    }
    None
}

/// Map a token to its lemma: exception dictionary, then suffix rules, applied
/// until nothing changes. Tokens with non-letter characters are untouched.
pub fn lemmatize_token(tok: &str) -> String {
    let mut current = tok.to_string();
    // Every rule shortens the token or maps to a fixed point, so this ends.
    while let Some(next) = lemma_step(&current) {
        if next.is_empty() || next == current {
            break;
        }
        current = next;
    }
    current
}

pub fn lemmatize(tokens: &[String]) -> Vec<String> {
    tokens.iter().map(|t| lemmatize_token(t)).collect()
}

/// A configured preprocessing pipeline with its fingerprint computed once.
#[derive(Debug, Clone)]
pub struct Pipeline {
    config: PipelineConfig,
    fingerprint: String,
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Self {
        let fingerprint = config.fingerprint();
        Pipeline {
            config,
            fingerprint,
        }
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn tokens(&self, text: &str) -> Vec<String> {
        let c = &self.config;
        let mut tokens = tokenize(text, c.preserve_section_refs);
        if c.expand_contractions {
            tokens = expand_contractions(&tokens, &c.contractions);
        }
        if c.numbers_to_words {
            tokens = number_to_words(&tokens, c.preserve_section_refs);
        }
        if !c.stopword_list.is_empty() {
            tokens = remove_stopwords(&tokens, &c.stopword_list);
        }
        if c.lemmatize {
            tokens = lemmatize(&tokens);
        }
        tokens
    }

    pub fn preprocess(&self, text: &str) -> TokenizedDocument {
        self.preprocess_doc("", text)
    }

    pub fn preprocess_doc(&self, source_id: &str, text: &str) -> TokenizedDocument {
        TokenizedDocument {
            source_id: source_id.to_string(),
            tokens: self.tokens(text),
            pipeline_fingerprint: self.fingerprint.clone(),
        }
    }
}

/// Run the full pipeline once. Build a [`Pipeline`] when processing many texts.
pub fn preprocess(text: &str, config: &PipelineConfig) -> TokenizedDocument {
    Pipeline::new(config.clone()).preprocess(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn tokenize_basic() {
        assert_eq!(tokenize("The Court held.", false), s(&["the", "court", "held"]));
        assert!(tokenize("", true).is_empty());
        assert!(tokenize(" ,.;! ", true).is_empty());
    }

    #[test]
    fn tokenize_section_refs() {
        let toks = tokenize("42 U.S.C. § 1983", true);
        assert_eq!(toks, s(&["42", "u.s.c.", "§1983"]));
        assert_eq!(
            number_to_words(&toks, true),
            s(&["forty", "two", "u.s.c.", "§1983"])
        );
        assert_eq!(tokenize("42 U.S.C. § 1983", false), s(&["42", "u.s.c.", "1983"]));
        assert_eq!(tokenize("Section 5 and article 3", true), s(&["section5", "and", "article3"]));
        assert_eq!(tokenize("subsection 5", true), s(&["subsection", "5"]));
    }

    #[test]
    fn tokenize_unicode_and_apostrophes() {
        assert_eq!(tokenize("Don\u{2019}t ÉCOLE", false), s(&["don't", "école"]));
        // NFKC folds the ligature.
        assert_eq!(tokenize("\u{FB01}le", false), s(&["file"]));
    }

    #[test]
    fn contractions() {
        let table = PipelineConfig::default().contractions;
        assert_eq!(expand_contractions(&s(&["don't"]), &table), s(&["do", "not"]));
        assert_eq!(expand_contractions(&s(&["court"]), &table), s(&["court"]));
        assert_eq!(expand_contractions(&s(&["plaintiff's"]), &table), s(&["plaintiff"]));
        assert_eq!(expand_contractions(&s(&["it's"]), &table), s(&["it", "is"]));
        assert_eq!(expand_contractions(&s(&["o'connor"]), &table), s(&["o'connor"]));
    }

    #[test]
    fn stopwords() {
        let list: BTreeSet<String> = ["the".to_string()].into();
        assert_eq!(remove_stopwords(&s(&["the", "court", "held"]), &list), s(&["court", "held"]));
        assert_eq!(remove_stopwords(&s(&["a", "b"]), &BTreeSet::new()), s(&["a", "b"]));
        assert!(remove_stopwords(&s(&["the", "the"]), &list).is_empty());
        let defaults = PipelineConfig::default().stopword_list;
        assert!(defaults.len() >= 170);
        assert!(!defaults.contains("not") && !defaults.contains("do"));
        assert!(defaults.iter().all(|w| w.to_lowercase() == *w));
    }

    #[test]
    fn numbers() {
        assert_eq!(number_to_words(&s(&["5"]), true), s(&["five"]));
        assert_eq!(number_to_words(&s(&["0"]), true), s(&["zero"]));
        assert_eq!(number_to_words(&s(&["§1983"]), true), s(&["§1983"]));
        assert_eq!(
            number_to_words(&s(&["1985"]), false),
            s(&["one", "thousand", "nine", "hundred", "eighty", "five"])
        );
        assert_eq!(spell_number("1000000"), vec!["one", "million"]);
        assert_eq!(spell_number("1000001"), vec!["one", "zero", "zero", "zero", "zero", "zero", "one"]);
        assert_eq!(spell_number("110"), vec!["one", "hundred", "ten"]);
        assert_eq!(spell_number("007"), vec!["seven"]);
        assert_eq!(
            spell_number("999999"),
            vec!["nine", "hundred", "ninety", "nine", "thousand", "nine", "hundred", "ninety", "nine"]
        );
    }

    #[test]
    fn lemmas() {
        assert_eq!(lemmatize(&s(&["courts"])), s(&["court"]));
        assert_eq!(lemmatize(&s(&["held"])), s(&["hold"]));
        assert_eq!(lemmatize(&s(&["court"])), s(&["court"]));
        assert_eq!(lemmatize_token("parties"), "party");
        assert_eq!(lemmatize_token("witnesses"), "witness");
        assert_eq!(lemmatize_token("decided"), "decide");
        assert_eq!(lemmatize_token("committed"), "commit");
        assert_eq!(lemmatize_token("granted"), "grant");
        assert_eq!(lemmatize_token("added"), "add");
        assert_eq!(lemmatize_token("proceed"), "proceed");
        assert_eq!(lemmatize_token("§1983"), "§1983");
        assert_eq!(lemmatize_token("u.s.c."), "u.s.c.");
        assert_eq!(lemmatize_token("its"), "its");
    }

    #[test]
    fn exception_targets_are_fixed_points() {
        for lemma in exceptions().values() {
            assert_eq!(&lemmatize_token(lemma), lemma, "{lemma} is not a fixed point");
        }
    }

    #[test]
    fn full_pipeline_example() {
        let doc = preprocess("The courts don't decide § 1983 claims.", &PipelineConfig::default());
        assert_eq!(doc.tokens, s(&["court", "do", "not", "decide", "§1983", "claim"]));
    }

    #[test]
    fn flags_off_is_tokenize_only() {
        let text = "The courts don't decide 5 claims.";
        let doc = preprocess(text, &PipelineConfig::tokenize_only());
        assert_eq!(doc.tokens, tokenize(text, false));
    }

    #[test]
    fn fingerprint_tracks_options() {
        let base = PipelineConfig::default();
        let a = preprocess("x", &base);
        let b = preprocess("x", &base);
        assert_eq!(a, b);
        let mut changed = base.clone();
        changed.lemmatize = false;
        assert_ne!(changed.fingerprint(), base.fingerprint());
        let mut changed = base.clone();
        changed.stopword_list.insert("court".into());
        assert_ne!(changed.fingerprint(), base.fingerprint());
    }

    #[test]
    fn contraction_file_errors() {
        assert!(parse_contractions("no tab here\n").is_err());
        assert!(parse_contractions("x\t \n").is_err());
        let t = parse_contractions("# c\nwon't\twill not\n").unwrap();
        assert_eq!(t["won't"], s(&["will", "not"]));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn lemmatize_idempotent(word in "[a-z]{1,14}") {
                let once = lemmatize_token(&word);
                prop_assert!(!once.is_empty());
                prop_assert_eq!(lemmatize_token(&once), once);
            }

            #[test]
            fn token_invariants(text in "\\PC{0,200}") {
                let pipeline = Pipeline::new(PipelineConfig::default());
                let doc = pipeline.preprocess(&text);
                for t in &doc.tokens {
                    prop_assert!(!t.is_empty());
                    prop_assert!(!t.chars().any(char::is_whitespace));
                    prop_assert_eq!(t.to_lowercase(), t.clone());
                    prop_assert!(!pipeline.config().stopword_list.contains(t));
                }
                prop_assert_eq!(pipeline.preprocess(&text), doc);
            }

            #[test]
            fn no_bare_integers_survive(nums in prop::collection::vec("[0-9]{1,9}", 0..6), preserve in any::<bool>()) {
                let tokens: Vec<String> = nums.into_iter().chain(["§12".to_string()]).collect();
                for t in number_to_words(&tokens, preserve) {
                    prop_assert!(!t.bytes().all(|b| b.is_ascii_digit()) || is_section_ref(&t));
                }
            }
        }
    }
}
