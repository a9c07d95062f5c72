//! Regenerates the bundled 60-document fixture in `fixtures/`.
//!
//! `cargo run -p citegraph-cli --example make_fixture`

use std::path::Path;

use citegraph_core::synthetic::{planted_embeddings, synthetic_corpus, SyntheticSpec};
use citegraph_core::vectorize::{save_embeddings, EmbeddingStore};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    std::fs::create_dir_all(&dir)?;
    let synth = synthetic_corpus(&SyntheticSpec {
        documents: 60,
        topics: 4,
        seed: 2024,
        ..Default::default()
    })?;
    synth.corpus.save_jsonl(&dir.join("corpus.jsonl"))?;

    let vectors = planted_embeddings(&synth.topics, 32, 0.3, 77);
    let entries = synth
        .corpus
        .records()
        .iter()
        .map(|r| r.id.clone())
        .zip(vectors)
        .collect();
    save_embeddings(&dir.join("embeddings.jsonl"), &EmbeddingStore::new("planted-32", entries)?)?;

    // A fresh description drawn from the first topic.
    let probe = synthetic_corpus(&SyntheticSpec {
        documents: 1,
        topics: 4,
        seed: 99,
        ..Default::default()
    })?;
    std::fs::write(dir.join("query.txt"), format!("{}\n", probe.corpus.records()[0].description))?;
    println!("wrote fixture to {}", dir.display());
    Ok(())
}
