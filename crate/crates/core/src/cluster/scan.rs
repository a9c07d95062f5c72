use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::kmeans::{kmeans_fit, KMeansParams};
use super::metrics::silhouette_sampled;
use crate::error::{Error, Result};
use crate::vector::DenseVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanMetric {
    Wcss,
    Silhouette,
}

/// Metric value per cluster count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanCurve {
    pub metric: ScanMetric,
    pub points: Vec<(usize, f64)>,
    /// Subsample cap used for silhouette, if any.
    pub sample_cap: Option<usize>,
}

impl ScanCurve {
    /// The k with the highest score (silhouette) or `None` for WCSS curves,
    /// whose elbow is read by eye.
    pub fn best_k(&self) -> Option<usize> {
        if self.metric != ScanMetric::Silhouette {
            return None;
        }
        self.points
            .iter()
            .fold(None::<(usize, f64)>, |best, &(k, s)| match best {
                Some((_, bs)) if bs >= s => best,
                _ => Some((k, s)),
            })
            .map(|(k, _)| k)
    }

    /// `k,score` CSV with a header row.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut text = Vec::new();
        writeln!(text, "k,score").unwrap();
        for (k, s) in &self.points {
            writeln!(text, "{k},{s}").unwrap();
        }
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Seed for the fit at cluster count `k`.
pub fn seed_for_k(seed: u64, k: usize) -> u64 {
    seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Fit k-means for every k in `k_min..=k_max` and record both curves.
pub fn scan_k_both(
    x: &[DenseVector],
    k_min: usize,
    k_max: usize,
    base: &KMeansParams,
    silhouette_cap: usize,
) -> Result<(ScanCurve, ScanCurve)> {
    if k_min < 2 || k_min > k_max || k_max > x.len() {
        return Err(Error::param(
            "k range",
            format!("need 2 <= k_min <= k_max <= {}, got {k_min}..={k_max}", x.len()),
        ));
    }
    let mut wcss = Vec::new();
    let mut sil = Vec::new();
    for k in k_min..=k_max {
        let params = KMeansParams {
            k,
            seed: seed_for_k(base.seed, k),
            ..*base
        };
        let model = kmeans_fit(x, &params)?;
        wcss.push((k, model.wcss));
        let s = match silhouette_sampled(x, &model.labels, silhouette_cap, params.seed) {
            Ok(s) => s,
            // Every point identical: all clusters collapse to one location.
            Err(Error::TooFewClusters(_)) => 0.0,
            Err(e) => return Err(e),
        };
        sil.push((k, s));
    }
    let capped = (x.len() > silhouette_cap).then_some(silhouette_cap);
    Ok((
        ScanCurve {
            metric: ScanMetric::Wcss,
            points: wcss,
            sample_cap: None,
        },
        ScanCurve {
            metric: ScanMetric::Silhouette,
            points: sil,
            sample_cap: capped,
        },
    ))
}

pub fn scan_k(
    x: &[DenseVector],
    k_min: usize,
    k_max: usize,
    metric: ScanMetric,
    base: &KMeansParams,
    silhouette_cap: usize,
) -> Result<ScanCurve> {
    let (w, s) = scan_k_both(x, k_min, k_max, base, silhouette_cap)?;
    Ok(match metric {
        ScanMetric::Wcss => w,
        ScanMetric::Silhouette => s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn blobs(centers: &[[f64; 2]], per: usize, sd: f64, seed: u64) -> Vec<DenseVector> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, sd).unwrap();
        centers
            .iter()
            .flat_map(|c| (0..per).map(|_| *c).collect::<Vec<_>>())
            .map(|c| DenseVector(vec![c[0] + noise.sample(&mut rng), c[1] + noise.sample(&mut rng)]))
            .collect()
    }

    #[test]
    fn planted_three_blobs() {
        let x = blobs(&[[0.0, 0.0], [10.0, 0.0], [5.0, 9.0]], 20, 0.7, 3);
        let base = KMeansParams { seed: 11, ..Default::default() };
        let curve = scan_k(&x, 2, 8, ScanMetric::Silhouette, &base, 2000).unwrap();
        assert_eq!(curve.best_k(), Some(3));
        assert_eq!(curve.points.len(), 7);
        assert!(curve.points.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn wcss_reaches_zero_at_n() {
        let x = blobs(&[[0.0, 0.0]], 6, 1.0, 1);
        let curve = scan_k(&x, 2, 6, ScanMetric::Wcss, &KMeansParams::default(), 2000).unwrap();
        assert_eq!(curve.points.last().unwrap(), &(6, 0.0));
        assert!(curve.best_k().is_none());
    }

    #[test]
    fn range_validation() {
        let x = blobs(&[[0.0, 0.0]], 4, 1.0, 1);
        let p = KMeansParams::default();
        assert!(scan_k(&x, 1, 3, ScanMetric::Wcss, &p, 10).is_err());
        assert!(scan_k(&x, 3, 2, ScanMetric::Wcss, &p, 10).is_err());
        assert!(scan_k(&x, 2, 5, ScanMetric::Wcss, &p, 10).is_err());
    }

    #[test]
    fn csv_export() {
        let curve = ScanCurve {
            metric: ScanMetric::Wcss,
            points: vec![(2, 1.5), (3, 0.25)],
            sample_cap: None,
        };
        let f = tempfile::NamedTempFile::new().unwrap();
        curve.write_csv(f.path()).unwrap();
        assert_eq!(std::fs::read_to_string(f.path()).unwrap(), "k,score\n2,1.5\n3,0.25\n");
    }
}
