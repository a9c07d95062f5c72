//! Case corpus: the canonical record model, loaders and the filters applied
//! before preprocessing.
//!
//! JSONL is the canonical on-disk format (one record per line). CSV import
//! is supported for spreadsheets exported from other tools; quoted fields may
//! contain commas and newlines.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// One corpus row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub id: String,
    #[serde(default)]
    pub case_name: String,
    #[serde(default)]
    pub justice: String,
    pub year: i32,
    /// Opinion category, e.g. `majority` or `dissenting`.
    #[serde(default)]
    pub category: String,
    #[serde(rename = "url", default)]
    pub source_url: String,
    #[serde(default)]
    pub scdb_id: String,
    /// Full opinion text.
    pub description: String,
    /// Keys not part of the schema, carried through unchanged.
    #[serde(flatten)]
    pub metadata: BTreeMap<String, Value>,
}

impl CaseRecord {
    /// Minimal record with empty metadata fields.
    pub fn new(id: impl Into<String>, year: i32, description: impl Into<String>) -> Self {
        CaseRecord {
            id: id.into(),
            case_name: String::new(),
            justice: String::new(),
            year,
            category: String::new(),
            source_url: String::new(),
            scdb_id: String::new(),
            description: description.into(),
            metadata: BTreeMap::new(),
        }
    }

    /// Number of whitespace-separated tokens in the description.
    pub fn token_count(&self) -> usize {
        self.description.split_whitespace().count()
    }

    fn validate(&self, row: usize) -> Result<()> {
        if self.id.trim().is_empty() {
            return Err(malformed(row, "id", "must be non-empty"));
        }
        if self.description.trim().is_empty() {
            return Err(malformed(row, "description", "must be non-empty"));
        }
        if self.year <= 0 {
            return Err(malformed(row, "year", "must be a positive integer"));
        }
        Ok(())
    }
}

/// Supported input formats for [`load_corpus`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Jsonl,
    Csv,
}

impl CorpusFormat {
    /// Guess from a file extension; anything other than `.csv` is JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => CorpusFormat::Csv,
            _ => CorpusFormat::Jsonl,
        }
    }
}

/// One entry of the provenance log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterLogEntry {
    pub step: String,
    pub params: BTreeMap<String, Value>,
    pub before: usize,
    pub removed: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: Option<String>,
    pub log: Vec<FilterLogEntry>,
}

/// An ordered, validated collection of case records.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    records: Vec<CaseRecord>,
    provenance: Provenance,
}

impl Corpus {
    /// Build a corpus from in-memory records, checking every record invariant.
    pub fn from_records(records: Vec<CaseRecord>) -> Result<Self> {
        check_records(&records)?;
        let n = records.len();
        Ok(Corpus {
            records,
            provenance: Provenance {
                source: None,
                log: vec![FilterLogEntry {
                    step: "load".into(),
                    params: BTreeMap::new(),
                    before: n,
                    removed: 0,
                }],
            },
        })
    }

    pub fn records(&self) -> &[CaseRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<CaseRecord> {
        self.records
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&CaseRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    /// Keep only records for which `keep` holds, logging the step.
    pub fn retain_logged(
        &self,
        step: &str,
        params: BTreeMap<String, Value>,
        keep: impl Fn(&CaseRecord) -> bool,
    ) -> Corpus {
        let before = self.records.len();
        let records: Vec<CaseRecord> = self.records.iter().filter(|r| keep(r)).cloned().collect();
        let mut provenance = self.provenance.clone();
        provenance.log.push(FilterLogEntry {
            step: step.into(),
            params,
            before,
            removed: before - records.len(),
        });
        Corpus {
            records,
            provenance,
        }
    }

    /// Write records as JSONL.
    pub fn save_jsonl(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        for record in &self.records {
            serde_json::to_writer(&mut out, record)?;
            out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }

    /// Attach a provenance log, e.g. one read back from disk next to the records.
    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }
}

fn malformed(row: usize, field: &str, message: impl Into<String>) -> Error {
    Error::MalformedRow {
        row,
        field: field.into(),
        message: message.into(),
    }
}

fn check_records(records: &[CaseRecord]) -> Result<()> {
    let mut seen = HashSet::with_capacity(records.len());
    for (i, record) in records.iter().enumerate() {
        record.validate(i + 1)?;
        if !seen.insert(record.id.as_str()) {
            return Err(Error::DuplicateId(record.id.clone()));
        }
    }
    Ok(())
}

/// Load a corpus file. Rows are numbered from 1 in diagnostics; for CSV the
/// header is row 0.
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Corpus> {
    let records = match format {
        CorpusFormat::Jsonl => read_jsonl(path)?,
        CorpusFormat::Csv => read_csv(path)?,
    };
    check_records(&records)?;
    let n = records.len();
    let mut params = BTreeMap::new();
    params.insert(
        "format".to_string(),
        Value::String(format!("{format:?}").to_lowercase()),
    );
    Ok(Corpus {
        records,
        provenance: Provenance {
            source: Some(path.display().to_string()),
            log: vec![FilterLogEntry {
                step: "load".into(),
                params,
                before: n,
                removed: 0,
            }],
        },
    })
}

fn read_jsonl(path: &Path) -> Result<Vec<CaseRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let row = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line)
            .map_err(|e| malformed(row, "<line>", format!("invalid JSON: {e}")))?;
        let Value::Object(map) = value else {
            return Err(malformed(row, "<line>", "expected a JSON object"));
        };
        records.push(record_from_map(row, map)?);
    }
    Ok(records)
}

fn read_csv(path: &Path) -> Result<Vec<CaseRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(false)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 1;
        let row = row.map_err(|e| malformed(row_no, "<row>", e.to_string()))?;
        let map: Map<String, Value> = headers
            .iter()
            .zip(row.iter())
            .map(|(k, v)| (k.trim().to_string(), Value::String(v.to_string())))
            .collect();
        records.push(record_from_map(row_no, map)?);
    }
    Ok(records)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::artifact(path, format!("{other:?}")),
    }
}

fn take_string(row: usize, map: &mut Map<String, Value>, key: &str, required: bool) -> Result<String> {
    match map.remove(key) {
        None | Some(Value::Null) if required => Err(malformed(row, key, "missing")),
        None | Some(Value::Null) => Ok(String::new()),
        Some(Value::String(s)) => Ok(s),
        Some(Value::Number(n)) => Ok(n.to_string()),
        Some(other) => Err(malformed(row, key, format!("expected a string, got {other}"))),
    }
}

fn take_year(row: usize, map: &mut Map<String, Value>) -> Result<i32> {
    let parsed = match map.remove("year") {
        None | Some(Value::Null) => return Err(malformed(row, "year", "missing")),
        Some(Value::Number(n)) => n.as_i64(),
        Some(Value::String(s)) => s.trim().parse::<i64>().ok(),
        Some(_) => None,
    };
    match parsed {
        Some(y) if y > 0 && y <= i32::MAX as i64 => Ok(y as i32),
        Some(_) => Err(malformed(row, "year", "must be a positive integer")),
        None => Err(malformed(row, "year", "not an integer")),
    }
}

fn record_from_map(row: usize, mut map: Map<String, Value>) -> Result<CaseRecord> {
    let id = take_string(row, &mut map, "id", true)?;
    let year = take_year(row, &mut map)?;
    let description = take_string(row, &mut map, "description", true)?;
    let record = CaseRecord {
        id,
        case_name: take_string(row, &mut map, "case_name", false)?,
        justice: take_string(row, &mut map, "justice", false)?,
        year,
        category: take_string(row, &mut map, "category", false)?,
        source_url: take_string(row, &mut map, "url", false)?,
        scdb_id: take_string(row, &mut map, "scdb_id", false)?,
        description,
        metadata: map.into_iter().collect(),
    };
    record.validate(row)?;
    Ok(record)
}

/// Keep records filed in `min_year` or later.
pub fn filter_by_min_year(corpus: &Corpus, min_year: i32) -> Corpus {
    let mut params = BTreeMap::new();
    params.insert("min_year".into(), Value::from(min_year));
    corpus.retain_logged("filter_by_min_year", params, |r| r.year >= min_year)
}

/// Drop records whose description has fewer than `min_tokens` whitespace
/// tokens. A record with exactly `min_tokens` tokens is kept.
pub fn drop_short_descriptions(corpus: &Corpus, min_tokens: usize) -> Result<Corpus> {
    if min_tokens == 0 {
        return Err(Error::param("min_tokens", "must be at least 1"));
    }
    let mut params = BTreeMap::new();
    params.insert("min_tokens".into(), Value::from(min_tokens));
    Ok(corpus.retain_logged("drop_short_descriptions", params, |r| {
        r.token_count() >= min_tokens
    }))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TokenLengthSummary {
    pub min: usize,
    pub max: usize,
    pub mean: f64,
    pub median: f64,
    /// Counts per power-of-two bucket: key `b` covers lengths in `[2^b, 2^(b+1))`.
    pub histogram: BTreeMap<u32, usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub record_count: usize,
    pub per_year: BTreeMap<i32, usize>,
    pub per_justice: BTreeMap<String, usize>,
    pub token_lengths: TokenLengthSummary,
}

pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    let mut stats = CorpusStats {
        record_count: corpus.len(),
        ..Default::default()
    };
    let mut lengths = Vec::with_capacity(corpus.len());
    for r in corpus.records() {
        *stats.per_year.entry(r.year).or_default() += 1;
        *stats.per_justice.entry(r.justice.clone()).or_default() += 1;
        lengths.push(r.token_count());
    }
    if lengths.is_empty() {
        return stats;
    }
    lengths.sort_unstable();
    let n = lengths.len();
    let median = if n % 2 == 1 {
        lengths[n / 2] as f64
    } else {
        (lengths[n / 2 - 1] + lengths[n / 2]) as f64 / 2.0
    };
    let mut histogram = BTreeMap::new();
    for &len in &lengths {
        *histogram.entry(len.max(1).ilog2()).or_default() += 1;
    }
    stats.token_lengths = TokenLengthSummary {
        min: lengths[0],
        max: lengths[n - 1],
        mean: lengths.iter().sum::<usize>() as f64 / n as f64,
        median,
        histogram,
    };
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(contents: &str, suffix: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(suffix).tempfile().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    fn corpus_with_years(years: &[i32]) -> Corpus {
        let records = years
            .iter()
            .enumerate()
            .map(|(i, &y)| CaseRecord::new(format!("c{i}"), y, "some words here"))
            .collect();
        Corpus::from_records(records).unwrap()
    }

    #[test]
    fn loads_well_formed_jsonl() {
        let f = write_tmp(
            concat!(
                r#"{"id":"1","case_name":"A v. B","justice":"x","year":1990,"category":"majority","url":"u","scdb_id":"s1","description":"text one"}"#,
                "\n",
                r#"{"id":"2","year":1991,"description":"text two","votes":9}"#,
                "\n\n",
                r#"{"id":3,"year":"1992","description":"text three"}"#,
                "\n"
            ),
            ".jsonl",
        );
        let corpus = load_corpus(f.path(), CorpusFormat::Jsonl).unwrap();
        assert_eq!(corpus.len(), 3);
        assert_eq!(corpus.provenance().log.len(), 1);
        assert_eq!(corpus.provenance().log[0].step, "load");
        assert_eq!(corpus.records()[0].source_url, "u");
        assert_eq!(corpus.records()[1].metadata["votes"], Value::from(9));
        assert_eq!(corpus.records()[2].id, "3");
        assert_eq!(corpus.records()[2].year, 1992);
    }

    #[test]
    fn empty_description_names_row_and_field() {
        let f = write_tmp(
            "{\"id\":\"1\",\"year\":1990,\"description\":\"ok\"}\n{\"id\":\"2\",\"year\":1990,\"description\":\"   \"}\n",
            ".jsonl",
        );
        let err = load_corpus(f.path(), CorpusFormat::Jsonl).unwrap_err();
        match err {
            Error::MalformedRow { row, field, .. } => {
                assert_eq!(row, 2);
                assert_eq!(field, "description");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let f = write_tmp(
            "{\"id\":\"1\",\"year\":1990,\"description\":\"a\"}\n{\"id\":\"1\",\"year\":1991,\"description\":\"b\"}\n",
            ".jsonl",
        );
        assert!(matches!(
            load_corpus(f.path(), CorpusFormat::Jsonl),
            Err(Error::DuplicateId(id)) if id == "1"
        ));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_corpus(Path::new("/nonexistent/corpus.jsonl"), CorpusFormat::Jsonl);
        assert!(matches!(err, Err(Error::Io { .. })));
    }

    #[test]
    fn bad_year_is_reported() {
        let f = write_tmp("{\"id\":\"1\",\"year\":\"soon\",\"description\":\"a\"}\n", ".jsonl");
        assert!(matches!(
            load_corpus(f.path(), CorpusFormat::Jsonl),
            Err(Error::MalformedRow { field, .. }) if field == "year"
        ));
    }

    #[test]
    fn csv_with_quoted_newlines() {
        let f = write_tmp(
            "id,year,case_name,description,extra\n1,1999,\"Roe, et al.\",\"line one,\nline two\",x\n",
            ".csv",
        );
        assert_eq!(CorpusFormat::from_path(f.path()), CorpusFormat::Csv);
        let corpus = load_corpus(f.path(), CorpusFormat::Csv).unwrap();
        assert_eq!(corpus.len(), 1);
        let r = &corpus.records()[0];
        assert_eq!(r.case_name, "Roe, et al.");
        assert_eq!(r.description, "line one,\nline two");
        assert_eq!(r.metadata["extra"], Value::from("x"));
    }

    #[test]
    fn year_filter_keeps_recent() {
        let c = corpus_with_years(&[1700, 1985, 2001]);
        let f = filter_by_min_year(&c, 1985);
        let years: Vec<i32> = f.records().iter().map(|r| r.year).collect();
        assert_eq!(years, vec![1985, 2001]);
        let last = f.provenance().log.last().unwrap();
        assert_eq!(last.step, "filter_by_min_year");
        assert_eq!(last.removed, 1);
        assert_eq!(last.params["min_year"], Value::from(1985));
    }

    #[test]
    fn year_filter_vacuous_and_total() {
        let c = corpus_with_years(&[1700, 1800]);
        assert_eq!(filter_by_min_year(&c, 0).records(), c.records());
        let all = filter_by_min_year(&c, 1985);
        assert!(all.is_empty());
        assert_eq!(all.provenance().log.last().unwrap().removed, 2);
    }

    #[test]
    fn short_descriptions_dropped_inclusive_threshold() {
        let records = vec![
            CaseRecord::new("a", 1990, "one two three"),
            CaseRecord::new("b", 1990, "w ".repeat(50)),
            CaseRecord::new("c", 1990, "w ".repeat(49)),
        ];
        let c = Corpus::from_records(records).unwrap();
        let kept: Vec<_> = drop_short_descriptions(&c, 50)
            .unwrap()
            .records()
            .iter()
            .map(|r| r.id.clone())
            .collect();
        assert_eq!(kept, vec!["b"]);
        assert_eq!(drop_short_descriptions(&c, 1).unwrap().len(), 3);
        assert!(drop_short_descriptions(&c, 0).is_err());
    }

    #[test]
    fn stats_counts() {
        assert_eq!(corpus_stats(&Corpus::default()).record_count, 0);
        let c = corpus_with_years(&[1990, 1990]);
        let s = corpus_stats(&c);
        assert_eq!(s.per_year.len(), 1);
        assert_eq!(s.per_year[&1990], 2);
        assert_eq!(s.token_lengths.min, 3);
        assert_eq!(s.token_lengths.median, 3.0);
    }

    #[test]
    fn save_load_round_trip() {
        let mut r = CaseRecord::new("x", 2000, "a \"quoted\", multi\nline text");
        r.metadata.insert("votes".into(), Value::from(5));
        r.case_name = "X v. Y".into();
        let c = Corpus::from_records(vec![r, CaseRecord::new("y", 2001, "b")]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.jsonl");
        c.save_jsonl(&p).unwrap();
        let back = load_corpus(&p, CorpusFormat::Jsonl).unwrap();
        assert_eq!(back.records(), c.records());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_corpus() -> impl Strategy<Value = Corpus> {
            prop::collection::vec((1900i32..2020, 1usize..20), 0..30).prop_map(|rows| {
                let records = rows
                    .into_iter()
                    .enumerate()
                    .map(|(i, (y, n))| CaseRecord::new(format!("r{i}"), y, "t ".repeat(n)))
                    .collect();
                Corpus::from_records(records).unwrap()
            })
        }

        fn ids(c: &Corpus) -> Vec<String> {
            c.records().iter().map(|r| r.id.clone()).collect()
        }

        proptest! {
            #[test]
            fn filters_idempotent(c in arb_corpus(), y in 1900i32..2020, t in 1usize..20) {
                let once = filter_by_min_year(&c, y);
                let twice = filter_by_min_year(&once, y);
                prop_assert_eq!(twice.records(), once.records());
                let once = drop_short_descriptions(&c, t).unwrap();
                let twice = drop_short_descriptions(&once, t).unwrap();
                prop_assert_eq!(twice.records(), once.records());
            }

            #[test]
            fn filter_order_commutes(c in arb_corpus(), y in 1900i32..2020, t in 1usize..20) {
                let a = drop_short_descriptions(&filter_by_min_year(&c, y), t).unwrap();
                let b = filter_by_min_year(&drop_short_descriptions(&c, t).unwrap(), y);
                prop_assert_eq!(ids(&a), ids(&b));
            }

            #[test]
            fn per_year_sums_to_count(c in arb_corpus()) {
                let s = corpus_stats(&c);
                prop_assert_eq!(s.per_year.values().sum::<usize>(), s.record_count);
            }
        }
    }
}
