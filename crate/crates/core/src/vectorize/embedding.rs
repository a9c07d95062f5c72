use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::DenseVector;

#[derive(Serialize, Deserialize)]
struct EmbeddingLine {
    id: String,
    vector: Vec<f64>,
}

/// Fixed-width vectors keyed by source id, kept in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    dimension: usize,
    ids: Vec<String>,
    vectors: Vec<DenseVector>,
    index: HashMap<String, usize>,
    provider_tag: String,
}

impl EmbeddingStore {
    pub fn new(provider_tag: impl Into<String>, entries: Vec<(String, DenseVector)>) -> Result<Self> {
        let dimension = entries.first().map_or(0, |(_, v)| v.dim());
        let mut store = EmbeddingStore {
            dimension,
            ids: Vec::with_capacity(entries.len()),
            vectors: Vec::with_capacity(entries.len()),
            index: HashMap::with_capacity(entries.len()),
            provider_tag: provider_tag.into(),
        };
        for (row, (id, v)) in entries.into_iter().enumerate() {
            store.push(row + 1, id, v)?;
        }
        Ok(store)
    }

    fn push(&mut self, row: usize, id: String, v: DenseVector) -> Result<()> {
        if v.dim() != self.dimension {
            return Err(Error::DimensionMismatch {
                context: format!("embedding row {row} (`{id}`)"),
                expected: self.dimension,
                actual: v.dim(),
            });
        }
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("embedding row {row} (`{id}`)")));
        }
        if self.index.insert(id.clone(), self.ids.len()).is_some() {
            return Err(Error::DuplicateId(id));
        }
        self.ids.push(id);
        self.vectors.push(v);
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn provider_tag(&self) -> &str {
        &self.provider_tag
    }

    pub fn get(&self, id: &str) -> Option<&DenseVector> {
        self.index.get(id).map(|&i| &self.vectors[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &DenseVector)> {
        self.ids.iter().map(String::as_str).zip(&self.vectors)
    }
}

/// Read the JSONL exchange format: `{"id": "...", "vector": [...]}` per line.
pub fn load_embeddings(path: &Path) -> Result<EmbeddingStore> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut store: Option<EmbeddingStore> = None;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let row = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: EmbeddingLine = serde_json::from_str(&line).map_err(|e| Error::MalformedRow {
            row,
            field: "<line>".into(),
            message: e.to_string(),
        })?;
        let store = store.get_or_insert_with(|| EmbeddingStore {
            dimension: entry.vector.len(),
            ids: Vec::new(),
            vectors: Vec::new(),
            index: HashMap::new(),
            provider_tag: format!("file:{}", path.display()),
        });
        store.push(row, entry.id, DenseVector(entry.vector))?;
    }
    store.ok_or_else(|| Error::artifact(path, "no embeddings in file"))
}

pub fn save_embeddings(path: &Path, store: &EmbeddingStore) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for (id, v) in store.iter() {
        serde_json::to_writer(
            &mut out,
            &EmbeddingLine {
                id: id.to_string(),
                vector: v.0.clone(),
            },
        )?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}
