//! In-browser demo over a synthetic planted-topic corpus.
//!
//! Three operations are exported: [`preprocess`] shows what the text
//! pipeline does to a description, [`Demo::scan`] fits k-means over a range
//! of k, and [`Demo::query`] runs two-track retrieval. Results cross the
//! boundary as JSON strings.

use std::sync::Arc;

use citegraph_core::classify::{fit_model, LabeledDataset, MlpParams, ModelSpec};
use citegraph_core::cluster::{kmeans_fit, pca_2d, scan_k_both, KMeansParams};
use citegraph_core::retrieve::{build_index, RetrievalIndex};
use citegraph_core::synthetic::{synthetic_corpus, SyntheticSpec, TOPICS};
use citegraph_core::textprep::{Pipeline, PipelineConfig};
use citegraph_core::vectorize::{fit_lsa, fit_tfidf, LsaParams, LsaProvider};
use citegraph_core::DenseVector;
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("plain data serializes")
}

/// Tokens produced by the default preprocessing pipeline, as a JSON array.
#[wasm_bindgen]
pub fn preprocess(text: &str) -> String {
    to_json(&Pipeline::new(PipelineConfig::default()).tokens(text))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Citation {
    pub id: String,
    pub case_name: String,
    pub justice: String,
    pub year: i32,
    pub topic: String,
    pub track: String,
    pub relevance_pct: u8,
    pub excerpt: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub k: usize,
    pub wcss: f64,
    pub silhouette: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub cluster: i32,
    pub id: String,
}

/// A small index built in the page: TF-IDF + LSA, k-means, MLP.
#[wasm_bindgen]
pub struct Demo {
    index: RetrievalIndex,
    vectors: Vec<DenseVector>,
    topics: Vec<usize>,
    seed: u64,
}

#[wasm_bindgen]
impl Demo {
    /// `topics` must lie in 2..=8; `k` is the number of clusters.
    #[wasm_bindgen(constructor)]
    pub fn new(documents: usize, topics: usize, k: usize, seed: u64) -> Result<Demo, JsError> {
        Demo::build(documents, topics, k, seed).map_err(js_err)
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    /// Description of document `i`, handy as a starting query.
    pub fn description(&self, i: usize) -> Option<String> {
        (i < self.index.len()).then(|| self.index.record(i).description.clone())
    }

    /// Five citations for `text` as a JSON array of [`Citation`].
    pub fn query(&self, text: &str) -> Result<String, JsError> {
        self.citations(text).map(|c| to_json(&c)).map_err(js_err)
    }

    /// WCSS and silhouette for every k in `k_min..=k_max`, as JSON rows.
    pub fn scan(&self, k_min: usize, k_max: usize) -> Result<String, JsError> {
        self.scan_rows(k_min, k_max).map(|r| to_json(&r)).map_err(js_err)
    }

    /// Two-dimensional PCA of the document vectors with cluster labels.
    pub fn projection(&self) -> Result<String, JsError> {
        self.points().map(|p| to_json(&p)).map_err(js_err)
    }
}

impl Demo {
    pub fn build(documents: usize, topics: usize, k: usize, seed: u64) -> citegraph_core::Result<Demo> {
        let synth = synthetic_corpus(&SyntheticSpec {
            documents,
            topics,
            seed,
            ..Default::default()
        })?;
        let pipeline = Pipeline::new(PipelineConfig::default());
        let docs: Vec<_> = synth
            .corpus
            .records()
            .iter()
            .map(|r| pipeline.preprocess_doc(&r.id, &r.description))
            .collect();
        let tfidf = fit_tfidf(&docs)?;
        let r = 12.min(documents).min(tfidf.vocabulary.len());
        let model = Arc::new(fit_lsa(&tfidf, &LsaParams { r, seed, ..Default::default() })?);
        let vectors = model.doc_vectors().to_vec();
        let clusters = kmeans_fit(&vectors, &KMeansParams { k, seed, ..Default::default() })?;
        let ds = LabeledDataset::from_cluster_labels(&vectors, &clusters.labels, k)?;
        let clf = fit_model(
            &ds,
            &ModelSpec::Mlp(MlpParams {
                hidden: 16,
                epochs: 60,
                seed,
                ..Default::default()
            }),
        )?;
        let provider = Arc::new(LsaProvider::new(pipeline, model));
        let index = build_index(&synth.corpus, vectors.clone(), provider, clusters, clf)?;
        Ok(Demo {
            index,
            vectors,
            topics: synth.topics,
            seed,
        })
    }

    pub fn citations(&self, text: &str) -> citegraph_core::Result<Vec<Citation>> {
        Ok(self
            .index
            .retrieve_citations(text)?
            .into_iter()
            .map(|c| {
                let r = self.index.record(c.position);
                Citation {
                    id: c.id,
                    case_name: r.case_name.clone(),
                    justice: r.justice.clone(),
                    year: r.year,
                    topic: TOPICS[self.topics[c.position]].0.to_string(),
                    track: c.track.as_str().to_string(),
                    relevance_pct: c.relevance_pct,
                    excerpt: r.description.chars().take(140).collect(),
                }
            })
            .collect())
    }

    pub fn scan_rows(&self, k_min: usize, k_max: usize) -> citegraph_core::Result<Vec<ScanRow>> {
        let base = KMeansParams {
            seed: self.seed,
            restarts: 3,
            ..Default::default()
        };
        let (wcss, sil) = scan_k_both(&self.vectors, k_min, k_max, &base, 500)?;
        Ok(wcss
            .points
            .iter()
            .zip(&sil.points)
            .map(|(&(k, w), &(_, s))| ScanRow { k, wcss: w, silhouette: s })
            .collect())
    }

    pub fn points(&self) -> citegraph_core::Result<Vec<Point>> {
        let xy = pca_2d(&self.vectors, self.seed)?;
        Ok(xy
            .into_iter()
            .zip(self.index.cluster_labels())
            .zip(self.index.records())
            .map(|(((x, y), &cluster), r)| Point {
                x,
                y,
                cluster,
                id: r.id.clone(),
            })
            .collect())
    }
}
