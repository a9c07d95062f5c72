use std::collections::HashMap;
use std::sync::Arc;

use super::lsa::{lsa_transform, LsaModel};
use crate::error::{Error, Result};
use crate::textprep::Pipeline;
use crate::vector::DenseVector;

/// Turns query text into a vector comparable with the indexed documents.
pub trait EmbeddingProvider: Send + Sync {
    fn dimension(&self) -> usize;

    /// Identifies the provider and its configuration; part of index fingerprints.
    fn tag(&self) -> String;

    fn embed(&self, text: &str) -> Result<DenseVector>;
}

/// Embed `text` and check the result against the active index dimension.
pub fn embed_query(provider: &dyn EmbeddingProvider, text: &str, expected_dim: usize) -> Result<DenseVector> {
    if text.trim().is_empty() {
        return Err(Error::EmptyQuery);
    }
    let v = provider.embed(text)?;
    if v.dim() != expected_dim {
        return Err(Error::DimensionMismatch {
            context: format!("query embedding from `{}`", provider.tag()),
            expected: expected_dim,
            actual: v.dim(),
        });
    }
    if !v.is_finite() {
        return Err(Error::NonFinite("query embedding".into()));
    }
    Ok(v)
}

/// Preprocess then project with a fitted LSA model.
#[derive(Debug, Clone)]
pub struct LsaProvider {
    pipeline: Pipeline,
    model: Arc<LsaModel>,
    tag: String,
}

impl LsaProvider {
    pub fn new(pipeline: Pipeline, model: Arc<LsaModel>) -> Self {
        let tag = format!("lsa:{}:{}", pipeline.fingerprint(), model.fingerprint());
        LsaProvider {
            pipeline,
            model,
            tag,
        }
    }

    pub fn model(&self) -> &LsaModel {
        &self.model
    }
}

impl EmbeddingProvider for LsaProvider {
    fn dimension(&self) -> usize {
        self.model.r()
    }

    fn tag(&self) -> String {
        self.tag.clone()
    }

    fn embed(&self, text: &str) -> Result<DenseVector> {
        if text.trim().is_empty() {
            return Err(Error::EmptyQuery);
        }
        let doc = self.pipeline.preprocess(text);
        lsa_transform(&self.model, &doc)
    }
}

/// Exact-text lookup table, for embeddings computed offline.
#[derive(Debug, Clone)]
pub struct LookupProvider {
    dimension: usize,
    table: HashMap<String, DenseVector>,
    tag: String,
}

impl LookupProvider {
    pub fn new(tag: impl Into<String>, dimension: usize) -> Self {
        LookupProvider {
            dimension,
            table: HashMap::new(),
            tag: tag.into(),
        }
    }

    pub fn insert(&mut self, text: &str, vector: DenseVector) -> Result<()> {
        if vector.dim() != self.dimension {
            return Err(Error::DimensionMismatch {
                context: "lookup table entry".into(),
                expected: self.dimension,
                actual: vector.dim(),
            });
        }
        self.table.insert(text.trim().to_string(), vector);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

impl EmbeddingProvider for LookupProvider {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn tag(&self) -> String {
        self.tag.clone()
    }

    fn embed(&self, text: &str) -> Result<DenseVector> {
        let key = text.trim();
        if key.is_empty() {
            return Err(Error::EmptyQuery);
        }
        self.table
            .get(key)
            .cloned()
            .ok_or_else(|| Error::Provider("no precomputed embedding for this text".into()))
    }
}
