use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textprep::TokenizedDocument;
use crate::vector::SparseVector;

/// Term index plus document frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    term_to_index: HashMap<String, usize>,
    document_frequency: Vec<usize>,
    corpus_size: usize,
}

#[derive(Serialize, Deserialize)]
struct VocabularyLine {
    index: usize,
    term: String,
    df: usize,
}

impl Vocabulary {
    /// Terms must be distinct; `df[i]` belongs to `terms[i]`.
    pub fn new(terms: Vec<String>, document_frequency: Vec<usize>, corpus_size: usize) -> Result<Self> {
        if terms.len() != document_frequency.len() {
            return Err(Error::param("vocabulary", "terms and frequencies differ in length"));
        }
        let mut term_to_index = HashMap::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            if term_to_index.insert(t.clone(), i).is_some() {
                return Err(Error::param("vocabulary", format!("duplicate term `{t}`")));
            }
            let df = document_frequency[i];
            if df == 0 || df > corpus_size {
                return Err(Error::param(
                    "vocabulary",
                    format!("df({t}) = {df} outside 1..={corpus_size}"),
                ));
            }
        }
        Ok(Vocabulary {
            terms,
            term_to_index,
            document_frequency,
            corpus_size,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.term_to_index.get(term).copied()
    }

    pub fn term(&self, index: usize) -> &str {
        &self.terms[index]
    }

    pub fn document_frequency(&self, index: usize) -> usize {
        self.document_frequency[index]
    }

    pub fn corpus_size(&self) -> usize {
        self.corpus_size
    }

    /// Smoothed idf for every term, in index order.
    pub fn idf(&self) -> Vec<f64> {
        self.document_frequency
            .iter()
            .map(|&df| idf_weight(self.corpus_size, df))
            .collect()
    }

    pub fn save_jsonl(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        for (index, term) in self.terms.iter().enumerate() {
            let line = VocabularyLine {
                index,
                term: term.clone(),
                df: self.document_frequency[index],
            };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load_jsonl(path: &Path, corpus_size: usize) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut terms = Vec::new();
        let mut dfs = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: VocabularyLine = serde_json::from_str(&line)
                .map_err(|e| Error::artifact(path, format!("line {}: {e}", i + 1)))?;
            if entry.index != terms.len() {
                return Err(Error::artifact(path, format!("line {}: index out of order", i + 1)));
            }
            terms.push(entry.term);
            dfs.push(entry.df);
        }
        Vocabulary::new(terms, dfs, corpus_size).map_err(|e| Error::artifact(path, e.to_string()))
    }
}

/// `ln((1 + n) / (1 + df)) + 1`
pub fn idf_weight(corpus_size: usize, df: usize) -> f64 {
    ((1.0 + corpus_size as f64) / (1.0 + df as f64)).ln() + 1.0
}

/// Raw-count TF times idf, L2-normalized. Out-of-vocabulary tokens are
/// skipped; the second value counts them.
pub fn tfidf_vector(vocab: &Vocabulary, idf: &[f64], tokens: &[String]) -> (SparseVector, usize) {
    let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
    let mut oov = 0;
    for t in tokens {
        match vocab.index_of(t) {
            Some(i) => *counts.entry(i).or_default() += 1.0,
            None => oov += 1,
        }
    }
    let mut entries: Vec<(usize, f64)> = counts.into_iter().map(|(i, c)| (i, c * idf[i])).collect();
    let norm = entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
    if norm > 0.0 {
        for (_, w) in &mut entries {
            *w /= norm;
        }
    }
    (
        SparseVector {
            dimension: vocab.len(),
            entries,
        },
        oov,
    )
}

/// Fitted TF-IDF: vocabulary, idf weights and the training matrix rows.
#[derive(Debug, Clone)]
pub struct TfidfFit {
    pub vocabulary: Vocabulary,
    pub idf: Vec<f64>,
    pub vectors: Vec<SparseVector>,
}

/// Vocabulary is sorted lexicographically so indices do not depend on
/// document order.
pub fn fit_tfidf(docs: &[TokenizedDocument]) -> Result<TfidfFit> {
    if docs.iter().all(|d| d.tokens.is_empty()) {
        return Err(Error::EmptyCorpus);
    }
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in docs {
        let mut seen: Vec<&str> = doc.tokens.iter().map(String::as_str).collect();
        seen.sort_unstable();
        seen.dedup();
        for t in seen {
            *df.entry(t).or_default() += 1;
        }
    }
    let (terms, dfs): (Vec<String>, Vec<usize>) =
        df.into_iter().map(|(t, c)| (t.to_string(), c)).unzip();
    let vocabulary = Vocabulary::new(terms, dfs, docs.len())?;
    let idf = vocabulary.idf();
    let vectors = docs
        .iter()
        .map(|d| tfidf_vector(&vocabulary, &idf, &d.tokens).0)
        .collect();
    Ok(TfidfFit {
        vocabulary,
        idf,
        vectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(tokens: &[&str]) -> TokenizedDocument {
        TokenizedDocument {
            source_id: String::new(),
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
            pipeline_fingerprint: String::new(),
        }
    }

    #[test]
    fn hand_computed_weights() {
        let fit = fit_tfidf(&[doc(&["a", "b"]), doc(&["a", "c"])]).unwrap();
        assert_eq!(fit.vocabulary.len(), 3);
        assert_eq!(fit.idf[0], 1.0);
        let idf_b = (1.5f64).ln() + 1.0;
        assert!((fit.idf[1] - idf_b).abs() < 1e-15);
        assert!((idf_b - 1.4055).abs() < 1e-4);
        let norm = (1.0 + idf_b * idf_b).sqrt();
        let dense = fit.vectors[0].to_dense();
        assert!((dense[0] - 1.0 / norm).abs() < 1e-15);
        assert!((dense[1] - idf_b / norm).abs() < 1e-15);
        assert_eq!(dense[2], 0.0);
        assert!((dense[0] - 0.5797).abs() < 1e-4 && (dense[1] - 0.8148).abs() < 1e-4);
    }

    #[test]
    fn single_document() {
        let fit = fit_tfidf(&[doc(&["a"])]).unwrap();
        assert_eq!(fit.vectors[0].entries, vec![(0, 1.0)]);
    }

    #[test]
    fn all_empty_is_error() {
        assert!(matches!(fit_tfidf(&[doc(&[]), doc(&[])]), Err(Error::EmptyCorpus)));
        assert!(matches!(fit_tfidf(&[]), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn unit_norm_and_df_bounds() {
        let docs = [doc(&["x", "y", "y"]), doc(&[]), doc(&["y", "z", "w", "x"])];
        let fit = fit_tfidf(&docs).unwrap();
        for (i, v) in fit.vectors.iter().enumerate() {
            if docs[i].tokens.is_empty() {
                assert_eq!(v.nnz(), 0);
            } else {
                assert!((v.norm() - 1.0).abs() < 1e-12);
            }
        }
        for i in 0..fit.vocabulary.len() {
            let df = fit.vocabulary.document_frequency(i);
            assert!(df >= 1 && df <= 3);
        }
    }

    #[test]
    fn vocabulary_round_trip() {
        let fit = fit_tfidf(&[doc(&["b", "a"]), doc(&["a", "c"])]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("vocabulary.jsonl");
        fit.vocabulary.save_jsonl(&p).unwrap();
        let back = Vocabulary::load_jsonl(&p, 2).unwrap();
        assert_eq!(back, fit.vocabulary);
    }
}
