//! Two-track citation retrieval over an immutable index.
//!
//! A query gets the corpus document with the highest cosine similarity,
//! followed by the Euclidean-nearest members of the cluster the classifier
//! predicts for it.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::artifact::{self, Shape};
use crate::classify::Classifier;
use crate::cluster::ClusterModel;
use crate::corpus::{load_corpus, CaseRecord, Corpus, CorpusFormat};
use crate::error::{Error, Result};
use crate::fingerprint::Hasher;
use crate::vector::{distance, dot, norm, DenseVector};
use crate::vectorize::{embed_query, EmbeddingProvider};

/// Number of citations returned per query.
pub const CITATIONS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Track {
    CosineTop1,
    ClusterNeighbor,
    /// Filled from the global cosine ranking when the predicted cluster has
    /// too few members.
    CosineBackfill,
}

impl Track {
    pub fn as_str(self) -> &'static str {
        match self {
            Track::CosineTop1 => "cosine_top1",
            Track::ClusterNeighbor => "cluster_neighbor",
            Track::CosineBackfill => "cosine_backfill",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CitationResult {
    /// Row of the record in the index.
    pub position: usize,
    pub id: String,
    pub track: Track,
    /// Cosine similarity for the cosine tracks, Euclidean distance otherwise.
    pub raw_score: f64,
    pub relevance_pct: u8,
}

/// `round(100 * max(0, cos))`.
pub fn cosine_relevance(cos: f64) -> u8 {
    (100.0 * cos.clamp(0.0, 1.0)).round() as u8
}

/// `round(100 * exp(-d / median))`. A zero median maps distance 0 to 100
/// and anything else to 0.
pub fn distance_relevance(d: f64, median: f64) -> u8 {
    if median <= 0.0 {
        return if d == 0.0 { 100 } else { 0 };
    }
    (100.0 * (-d / median).exp()).round() as u8
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        (xs[m - 1] + xs[m]) / 2.0
    }
}

/// Everything a query needs, bound together and checked for consistency.
pub struct RetrievalIndex {
    vectors: Vec<DenseVector>,
    norms: Vec<f64>,
    records: Vec<CaseRecord>,
    cluster: ClusterModel,
    classifier: Classifier,
    vectorizer: Arc<dyn EmbeddingProvider>,
    /// Median member-to-centroid distance per cluster.
    median_distance: Vec<f64>,
    fingerprint: String,
}

impl fmt::Debug for RetrievalIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RetrievalIndex")
            .field("len", &self.len())
            .field("dimension", &self.dimension())
            .field("clusters", &self.cluster.k)
            .field("classifier", &self.classifier.family())
            .field("vectorizer", &self.vectorizer.tag())
            .field("fingerprint", &self.fingerprint)
            .finish()
    }
}

/// Bind document vectors (parallel to the corpus), the clustering of those
/// vectors and a classifier trained on its labels.
pub fn build_index(
    corpus: &Corpus,
    vectors: Vec<DenseVector>,
    vectorizer: Arc<dyn EmbeddingProvider>,
    cluster: ClusterModel,
    classifier: Classifier,
) -> Result<RetrievalIndex> {
    let n = corpus.len();
    if n == 0 {
        return Err(Error::EmptyCorpus);
    }
    let mismatch = |what: &str, expected: usize, actual: usize| Error::Inconsistent(format!(
        "{what}: expected {expected}, found {actual}"
    ));
    if vectors.len() != n {
        return Err(mismatch("document vectors vs corpus records", n, vectors.len()));
    }
    if cluster.labels.len() != n {
        return Err(mismatch("cluster labels vs corpus records", n, cluster.labels.len()));
    }
    let d = vectorizer.dimension();
    if let Some((i, v)) = vectors.iter().enumerate().find(|(_, v)| v.dim() != d) {
        return Err(mismatch(&format!("dimension of document vector {i} vs vectorizer"), d, v.dim()));
    }
    if classifier.dim() != d {
        return Err(mismatch("classifier input dimension vs vectorizer", d, classifier.dim()));
    }
    if classifier.class_count() != cluster.k {
        return Err(mismatch("classifier classes vs cluster count", cluster.k, classifier.class_count()));
    }
    if cluster.centroids.len() != cluster.k {
        return Err(mismatch("cluster centroids vs cluster count", cluster.k, cluster.centroids.len()));
    }
    if let Some(&bad) = cluster.labels.iter().find(|&&l| l < -1 || l >= cluster.k as i32) {
        return Err(Error::Inconsistent(format!(
            "cluster label {bad} outside -1..{}",
            cluster.k
        )));
    }
    if vectors.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("document vectors".into()));
    }

    let mut per_cluster: Vec<Vec<f64>> = vec![Vec::new(); cluster.k];
    for (v, &l) in vectors.iter().zip(&cluster.labels) {
        if l >= 0 {
            let c = l as usize;
            per_cluster[c].push(distance(&v.0, &cluster.centroids[c].0));
        }
    }
    let median_distance = per_cluster.into_iter().map(median).collect();
    let norms = vectors.iter().map(|v| norm(&v.0)).collect();
    let records = corpus.records().to_vec();
    let fingerprint = index_fingerprint(&vectors, &records, &cluster, &classifier, vectorizer.as_ref());
    Ok(RetrievalIndex {
        vectors,
        norms,
        records,
        cluster,
        classifier,
        vectorizer,
        median_distance,
        fingerprint,
    })
}

fn index_fingerprint(
    vectors: &[DenseVector],
    records: &[CaseRecord],
    cluster: &ClusterModel,
    classifier: &Classifier,
    vectorizer: &dyn EmbeddingProvider,
) -> String {
    let mut h = Hasher::new();
    for v in vectors {
        h.f64s("vector", &v.0);
    }
    for r in records {
        h.part("record", serde_json::to_string(r).expect("record serializes").as_bytes());
    }
    h.part("cluster", cluster.fingerprint().as_bytes());
    h.part("classifier", classifier.fingerprint().as_bytes());
    h.part("vectorizer", vectorizer.tag().as_bytes());
    h.finish()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct IndexManifest {
    fingerprint: String,
    vectorizer: String,
    cluster_fingerprint: String,
    classifier_fingerprint: String,
    records: usize,
    dimension: usize,
}

impl RetrievalIndex {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.vectorizer.dimension()
    }

    pub fn records(&self) -> &[CaseRecord] {
        &self.records
    }

    pub fn record(&self, position: usize) -> &CaseRecord {
        &self.records[position]
    }

    pub fn position_of(&self, id: &str) -> Option<usize> {
        self.records.iter().position(|r| r.id == id)
    }

    pub fn vectors(&self) -> &[DenseVector] {
        &self.vectors
    }

    pub fn cluster_labels(&self) -> &[i32] {
        &self.cluster.labels
    }

    pub fn cluster_model(&self) -> &ClusterModel {
        &self.cluster
    }

    pub fn classifier(&self) -> &Classifier {
        &self.classifier
    }

    pub fn vectorizer(&self) -> &Arc<dyn EmbeddingProvider> {
        &self.vectorizer
    }

    pub fn median_distances(&self) -> &[f64] {
        &self.median_distance
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    fn check_query(&self, q: &DenseVector) -> Result<()> {
        if q.dim() != self.dimension() {
            return Err(Error::DimensionMismatch {
                context: "query vector".into(),
                expected: self.dimension(),
                actual: q.dim(),
            });
        }
        Ok(())
    }

    /// Cosine similarity of `q` against every document, `None` for
    /// zero-norm documents.
    fn cosines(&self, q: &DenseVector) -> Result<Vec<Option<f64>>> {
        self.check_query(q)?;
        let qn = norm(&q.0);
        if qn == 0.0 {
            return Err(Error::param("query", "vector has zero norm"));
        }
        Ok(self
            .vectors
            .iter()
            .zip(&self.norms)
            .map(|(v, &n)| (n > 0.0).then(|| dot(&q.0, &v.0) / (qn * n)))
            .collect())
    }

    /// Document with the largest cosine similarity; ties go to the lowest
    /// position.
    pub fn cosine_top1(&self, q: &DenseVector) -> Result<CitationResult> {
        let cos = self.cosines(q)?;
        let mut best: Option<(usize, f64)> = None;
        for (i, c) in cos.iter().enumerate() {
            if let Some(c) = *c {
                if best.is_none_or(|(_, b)| c > b) {
                    best = Some((i, c));
                }
            }
        }
        let (position, c) = best.ok_or_else(|| Error::Inconsistent("every document vector has zero norm".into()))?;
        Ok(CitationResult {
            position,
            id: self.records[position].id.clone(),
            track: Track::CosineTop1,
            raw_score: c,
            relevance_pct: cosine_relevance(c),
        })
    }

    /// Cluster label the classifier assigns to `q`.
    pub fn predict_cluster(&self, q: &DenseVector) -> Result<usize> {
        self.check_query(q)?;
        self.classifier.predict(q)
    }

    /// Members of cluster `c` by ascending distance to `q` (ties by position).
    fn ranked_members(&self, q: &DenseVector, c: usize) -> Result<Vec<(usize, f64)>> {
        let mut members: Vec<(usize, f64)> = self
            .cluster
            .labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == c as i32)
            .map(|(i, _)| (i, distance(&q.0, &self.vectors[i].0)))
            .collect();
        if members.is_empty() {
            return Err(Error::EmptyCluster(c));
        }
        members.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        Ok(members)
    }

    fn neighbor_result(&self, c: usize, (position, d): (usize, f64)) -> CitationResult {
        CitationResult {
            position,
            id: self.records[position].id.clone(),
            track: Track::ClusterNeighbor,
            raw_score: d,
            relevance_pct: distance_relevance(d, self.median_distance[c]),
        }
    }

    /// The `n` members of the predicted cluster nearest to `q`, ascending.
    pub fn cluster_neighbors(&self, q: &DenseVector, n: usize) -> Result<Vec<CitationResult>> {
        let c = self.predict_cluster(q)?;
        let members = self.ranked_members(q, c)?;
        Ok(members
            .into_iter()
            .take(n)
            .map(|m| self.neighbor_result(c, m))
            .collect())
    }

    /// Five distinct citations for a query vector: the cosine winner, then
    /// the nearest members of the predicted cluster other than the winner,
    /// then, if the cluster runs out, the best remaining documents by cosine.
    pub fn retrieve_vector(&self, q: &DenseVector) -> Result<Vec<CitationResult>> {
        let want = CITATIONS.min(self.len());
        let top = self.cosine_top1(q)?;
        let c = self.predict_cluster(q)?;
        let mut out = vec![top.clone()];
        for m in self.ranked_members(q, c)? {
            if out.len() == want {
                break;
            }
            if m.0 != top.position {
                out.push(self.neighbor_result(c, m));
            }
        }
        if out.len() < want {
            let cos = self.cosines(q)?;
            let mut ranked: Vec<usize> = (0..self.len()).collect();
            // Zero-norm documents rank after every real similarity.
            let key = |i: usize| cos[i].unwrap_or(f64::NEG_INFINITY);
            ranked.sort_by(|&a, &b| key(b).total_cmp(&key(a)).then(a.cmp(&b)));
            for i in ranked {
                if out.len() == want {
                    break;
                }
                if out.iter().any(|r| r.position == i) {
                    continue;
                }
                let s = cos[i].unwrap_or(0.0);
                out.push(CitationResult {
                    position: i,
                    id: self.records[i].id.clone(),
                    track: Track::CosineBackfill,
                    raw_score: s,
                    relevance_pct: cosine_relevance(s),
                });
            }
        }
        Ok(out)
    }

    /// Vectorize free text with the index's provider and retrieve.
    pub fn retrieve_citations(&self, raw_text: &str) -> Result<Vec<CitationResult>> {
        let q = embed_query(self.vectorizer.as_ref(), raw_text, self.dimension())?;
        self.retrieve_vector(&q)
    }

    /// Directory layout: `vectors.f64le` with `vectors.shape.json`,
    /// `records.jsonl`, `labels.json`, `manifest.json`, plus `cluster/` and
    /// `classifier/` subdirectories.
    pub fn save(&self, dir: &Path) -> Result<()> {
        artifact::create_dir(dir)?;
        let shape = Shape {
            rows: self.len(),
            cols: self.dimension(),
        };
        let flat: Vec<f64> = self.vectors.iter().flat_map(|v| v.0.iter().copied()).collect();
        artifact::write_f64le(&dir.join("vectors.f64le"), &flat)?;
        artifact::write_json(&dir.join("vectors.shape.json"), &shape)?;
        Corpus::from_records(self.records.clone())?.save_jsonl(&dir.join("records.jsonl"))?;
        artifact::write_json(&dir.join("labels.json"), &self.cluster.labels)?;
        self.cluster.save(&dir.join("cluster"))?;
        self.classifier.save(&dir.join("classifier"))?;
        artifact::write_json(
            &dir.join("manifest.json"),
            &IndexManifest {
                fingerprint: self.fingerprint.clone(),
                vectorizer: self.vectorizer.tag(),
                cluster_fingerprint: self.cluster.fingerprint(),
                classifier_fingerprint: self.classifier.fingerprint(),
                records: self.len(),
                dimension: self.dimension(),
            },
        )
    }

    /// Load a saved index. The provider must be the one the index was built
    /// with; the rebuilt fingerprint must match the stored one.
    pub fn load(dir: &Path, vectorizer: Arc<dyn EmbeddingProvider>) -> Result<Self> {
        let manifest_path = dir.join("manifest.json");
        let manifest: IndexManifest = artifact::read_json(&manifest_path)?;
        if manifest.vectorizer != vectorizer.tag() {
            return Err(Error::Inconsistent(format!(
                "index was built with vectorizer `{}`, but `{}` was supplied",
                manifest.vectorizer,
                vectorizer.tag()
            )));
        }
        let shape: Shape = artifact::read_json(&dir.join("vectors.shape.json"))?;
        let flat = artifact::read_matrix(&dir.join("vectors.f64le"), shape)?;
        let vectors = if shape.cols == 0 {
            vec![DenseVector(Vec::new()); shape.rows]
        } else {
            flat.chunks(shape.cols).map(|c| DenseVector(c.to_vec())).collect()
        };
        let corpus = load_corpus(&dir.join("records.jsonl"), CorpusFormat::Jsonl)?;
        let cluster = ClusterModel::load(&dir.join("cluster"))?;
        let labels: Vec<i32> = artifact::read_json(&dir.join("labels.json"))?;
        if labels != cluster.labels {
            return Err(Error::artifact(dir.join("labels.json"), "labels differ from the cluster model"));
        }
        let classifier = Classifier::load(&dir.join("classifier"))?;
        let index = build_index(&corpus, vectors, vectorizer, cluster, classifier)?;
        if index.fingerprint != manifest.fingerprint {
            return Err(Error::artifact(
                manifest_path,
                format!(
                    "stored fingerprint {} does not match rebuilt {}",
                    manifest.fingerprint, index.fingerprint
                ),
            ));
        }
        Ok(index)
    }
}
