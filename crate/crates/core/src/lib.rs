//! Citation retrieval for legal case descriptions.
//!
//! The pipeline: [`corpus`] records are normalized by [`textprep`], turned
//! into vectors by [`vectorize`] (TF-IDF + LSA, or externally supplied
//! sentence embeddings), labelled without supervision by [`cluster`],
//! and the labels are learned by the [`classify`] models. [`retrieve`] binds
//! everything into an immutable index answering a query with five citations:
//! the global cosine winner plus the nearest members of the predicted
//! cluster.

pub mod artifact;
pub mod classify;
pub mod cluster;
pub mod corpus;
pub mod error;
pub mod fingerprint;
pub mod linalg;
pub mod retrieve;
pub mod synthetic;
pub mod textprep;
pub mod vector;
pub mod vectorize;

pub use error::{Error, Result};
pub use vector::{DenseVector, SparseVector};
