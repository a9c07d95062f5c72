//! Document vectors: TF-IDF + LSA fitted in-process, or sentence embeddings
//! supplied from outside.

mod embedding;
mod lsa;
mod provider;
mod tfidf;

pub use embedding::{load_embeddings, save_embeddings, EmbeddingStore};
pub use lsa::{fit_lsa, fit_lsa_matrix, lsa_transform, LsaBasis, LsaModel, LsaParams};
pub use provider::{embed_query, EmbeddingProvider, LookupProvider, LsaProvider};
pub use tfidf::{fit_tfidf, idf_weight, tfidf_vector, TfidfFit, Vocabulary};
