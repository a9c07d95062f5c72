//! Embedding provider backed by an HTTP endpoint.
//!
//! Protocol: `POST <endpoint>` with `{"text": "..."}`, answered by
//! `{"vector": [f1, ..., fd]}`.

use std::time::Duration;

use citegraph_core::vector::DenseVector;
use citegraph_core::vectorize::EmbeddingProvider;
use citegraph_core::Error;
use serde::{Deserialize, Serialize};

#[derive(Serialize)]
struct EmbedRequest<'a> {
    text: &'a str,
}

#[derive(Deserialize)]
struct EmbedResponse {
    vector: Vec<f64>,
}

pub struct RemoteProvider {
    endpoint: String,
    dimension: usize,
    tag: String,
    agent: ureq::Agent,
}

impl RemoteProvider {
    /// `tag` should name the model behind the endpoint; it becomes part of
    /// index fingerprints.
    pub fn new(endpoint: impl Into<String>, dimension: usize, tag: impl Into<String>, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .into();
        RemoteProvider {
            endpoint: endpoint.into(),
            dimension,
            tag: tag.into(),
            agent,
        }
    }
}

impl EmbeddingProvider for RemoteProvider {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn tag(&self) -> String {
        format!("remote:{}", self.tag)
    }

    fn embed(&self, text: &str) -> citegraph_core::Result<DenseVector> {
        let unreachable = |e: ureq::Error| Error::Provider(format!("{}: {e}", self.endpoint));
        let response: EmbedResponse = self
            .agent
            .post(&self.endpoint)
            .send_json(EmbedRequest { text })
            .map_err(unreachable)?
            .body_mut()
            .read_json()
            .map_err(unreachable)?;
        Ok(DenseVector(response.vector))
    }
}
