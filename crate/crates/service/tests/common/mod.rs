#![allow(dead_code)]

pub mod pdf_check;

use std::path::Path;
use std::sync::Arc;

use citegraph_core::classify::{fit_model, LabeledDataset, MlpParams, ModelSpec};
use citegraph_core::cluster::{kmeans_fit, KMeansParams};
use citegraph_core::retrieve::{build_index, RetrievalIndex};
use citegraph_core::synthetic::{synthetic_corpus, SyntheticSpec};
use citegraph_core::textprep::{Pipeline, PipelineConfig};
use citegraph_core::vectorize::{fit_lsa, fit_tfidf, LsaParams, LsaProvider};
use citegraph_service::{HashingConfig, ServiceConfig};

/// A small planted-topic index using the LSA vectorizer.
pub fn fixture_index(documents: usize, topics: usize) -> RetrievalIndex {
    let synth = synthetic_corpus(&SyntheticSpec {
        documents,
        topics,
        seed: 21,
        ..Default::default()
    })
    .unwrap();
    let pipeline = Pipeline::new(PipelineConfig::default());
    let docs: Vec<_> = synth
        .corpus
        .records()
        .iter()
        .map(|r| pipeline.preprocess_doc(&r.id, &r.description))
        .collect();
    let tfidf = fit_tfidf(&docs).unwrap();
    let model = Arc::new(fit_lsa(&tfidf, &LsaParams { r: 8, seed: 4, ..Default::default() }).unwrap());
    let vectors = model.doc_vectors().to_vec();
    let clusters = kmeans_fit(&vectors, &KMeansParams { k: topics, seed: 2, ..Default::default() }).unwrap();
    let ds = LabeledDataset::from_cluster_labels(&vectors, &clusters.labels, topics).unwrap();
    let clf = fit_model(
        &ds,
        &ModelSpec::Mlp(MlpParams { hidden: 16, epochs: 50, seed: 1, ..Default::default() }),
    )
    .unwrap();
    let provider = Arc::new(LsaProvider::new(pipeline, model));
    build_index(&synth.corpus, vectors, provider, clusters, clf).unwrap()
}

pub fn test_config(dir: &Path) -> ServiceConfig {
    ServiceConfig {
        accounts_path: dir.join("accounts.jsonl"),
        request_log: Some(dir.join("requests.jsonl")),
        allowed_domains: vec!["court.example".into()],
        hashing: HashingConfig {
            memory_kib: 256,
            iterations: 1,
            parallelism: 1,
        },
        ..Default::default()
    }
}
