use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::artifact::{self, Shape};
use crate::error::{Error, Result};
use crate::fingerprint::Hasher;
use crate::vector::DenseVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterAlgorithm {
    Kmeans,
    Dbscan,
}

/// A fitted clustering.
///
/// For DBSCAN the centroids are member means and noise points carry label
/// `-1`; they do not contribute to `wcss`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    pub algorithm: ClusterAlgorithm,
    pub k: usize,
    pub centroids: Vec<DenseVector>,
    pub labels: Vec<i32>,
    pub wcss: f64,
    pub iterations_run: usize,
    pub seed: u64,
    /// WCSS after every Lloyd iteration of the winning restart.
    pub wcss_trace: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ClusterMeta {
    algorithm: ClusterAlgorithm,
    k: usize,
    dimension: usize,
    wcss: f64,
    iterations_run: usize,
    seed: u64,
    wcss_trace: Vec<f64>,
}

impl ClusterModel {
    pub fn label_of(&self, i: usize) -> Option<usize> {
        usize::try_from(self.labels[i]).ok()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            if l >= 0 {
                sizes[l as usize] += 1;
            }
        }
        sizes
    }

    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l < 0).count()
    }

    pub fn fingerprint(&self) -> String {
        let mut h = Hasher::new();
        let labels: Vec<u8> = self.labels.iter().flat_map(|l| l.to_le_bytes()).collect();
        h.part("labels", &labels);
        for c in &self.centroids {
            h.f64s("centroid", &c.0);
        }
        h.finish()
    }

    /// `cluster.json`, `labels.json` and row-major `centroids.f64le`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        artifact::create_dir(dir)?;
        let dimension = self.centroids.first().map_or(0, DenseVector::dim);
        artifact::write_json(
            &dir.join("cluster.json"),
            &ClusterMeta {
                algorithm: self.algorithm,
                k: self.k,
                dimension,
                wcss: self.wcss,
                iterations_run: self.iterations_run,
                seed: self.seed,
                wcss_trace: self.wcss_trace.clone(),
            },
        )?;
        artifact::write_json(&dir.join("labels.json"), &self.labels)?;
        let flat: Vec<f64> = self.centroids.iter().flat_map(|c| c.0.iter().copied()).collect();
        artifact::write_f64le(&dir.join("centroids.f64le"), &flat)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let meta: ClusterMeta = artifact::read_json(&dir.join("cluster.json"))?;
        let labels: Vec<i32> = artifact::read_json(&dir.join("labels.json"))?;
        let flat = artifact::read_matrix(
            &dir.join("centroids.f64le"),
            Shape {
                rows: meta.k,
                cols: meta.dimension,
            },
        )?;
        let centroids = if meta.dimension == 0 {
            vec![DenseVector(Vec::new()); meta.k]
        } else {
            flat.chunks(meta.dimension).map(|c| DenseVector(c.to_vec())).collect()
        };
        if labels.iter().any(|&l| l < -1 || l >= meta.k as i32) {
            return Err(Error::artifact(dir, "label outside 0..k"));
        }
        Ok(ClusterModel {
            algorithm: meta.algorithm,
            k: meta.k,
            centroids,
            labels,
            wcss: meta.wcss,
            iterations_run: meta.iterations_run,
            seed: meta.seed,
            wcss_trace: meta.wcss_trace,
        })
    }
}
