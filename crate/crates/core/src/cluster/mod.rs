//! Unsupervised labelling of document vectors and the diagnostics used to
//! choose the cluster count.

mod dbscan;
mod kmeans;
mod metrics;
mod model;
mod pca;
mod scan;

pub use dbscan::{dbscan_fit, k_distance_curve, NOISE};
pub use kmeans::{kmeans_fit, KMeansParams};
pub use metrics::{silhouette, silhouette_sampled, wcss};
pub use model::{ClusterAlgorithm, ClusterModel};
pub use pca::{pca_2d, write_projection_csv};
pub use scan::{scan_k, scan_k_both, ScanCurve, ScanMetric};

use crate::error::{Error, Result};
use crate::vector::DenseVector;

/// Common dimension of `x`, checking uniformity.
pub(crate) fn uniform_dim(x: &[DenseVector]) -> Result<usize> {
    let d = x.first().map_or(0, DenseVector::dim);
    for (i, v) in x.iter().enumerate() {
        if v.dim() != d {
            return Err(Error::DimensionMismatch {
                context: format!("point {i}"),
                expected: d,
                actual: v.dim(),
            });
        }
    }
    Ok(d)
}
