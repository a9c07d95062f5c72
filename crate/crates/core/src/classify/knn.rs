use serde::{Deserialize, Serialize};

use super::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::vector::{squared_distance, DenseVector};

/// Majority vote among the k Euclidean-nearest stored points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub class_count: usize,
    pub vectors: Vec<DenseVector>,
    pub labels: Vec<usize>,
}

impl KnnModel {
    pub fn fit(train: &LabeledDataset, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("k", "must be at least 1"));
        }
        Ok(KnnModel {
            k,
            class_count: train.class_count(),
            vectors: train.vectors().to_vec(),
            labels: train.labels().to_vec(),
        })
    }

    pub fn dim(&self) -> usize {
        self.vectors.first().map_or(0, DenseVector::dim)
    }

    /// Ties in the vote go to the label with the smaller mean distance among
    /// the neighbours, then to the smaller label. Equal distances at the
    /// k-th place are resolved by storage order.
    pub fn predict(&self, x: &DenseVector) -> Result<usize> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "knn query".into(),
                expected: self.dim(),
                actual: x.dim(),
            });
        }
        let mut dists: Vec<(f64, usize)> = self
            .vectors
            .iter()
            .enumerate()
            .map(|(i, v)| (squared_distance(&x.0, &v.0), i))
            .collect();
        let k = self.k.min(dists.len());
        dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut votes = vec![0usize; self.class_count];
        let mut dist_sum = vec![0.0f64; self.class_count];
        for &(d2, i) in &dists[..k] {
            let l = self.labels[i];
            votes[l] += 1;
            dist_sum[l] += d2.sqrt();
        }
        let best = (0..self.class_count)
            .filter(|&l| votes[l] > 0)
            .min_by(|&a, &b| {
                votes[b]
                    .cmp(&votes[a])
                    .then((dist_sum[a] / votes[a] as f64).total_cmp(&(dist_sum[b] / votes[b] as f64)))
                    .then(a.cmp(&b))
            })
            .expect("k >= 1 neighbours");
        Ok(best)
    }
}
