use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::vector::{distance, squared_distance, DenseVector};

/// Sum of squared distances from each non-noise point to its centroid.
pub fn wcss(x: &[DenseVector], labels: &[i32], centroids: &[DenseVector]) -> f64 {
    x.iter()
        .zip(labels)
        .filter(|(_, &l)| l >= 0)
        .map(|(p, &l)| squared_distance(&p.0, &centroids[l as usize].0))
        .sum()
}

/// Mean silhouette over non-noise points. Singleton clusters score 0.
pub fn silhouette(x: &[DenseVector], labels: &[i32]) -> Result<f64> {
    if x.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            context: "silhouette labels".into(),
            expected: x.len(),
            actual: labels.len(),
        });
    }
    let mut members: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        if l >= 0 {
            members.entry(l).or_default().push(i);
        }
    }
    if members.len() < 2 {
        return Err(Error::TooFewClusters(members.len()));
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for (&own, own_members) in &members {
        for &i in own_members {
            count += 1;
            if own_members.len() == 1 {
                continue;
            }
            let mean_to = |group: &[usize]| {
                let sum: f64 = group.iter().map(|&j| distance(&x[i].0, &x[j].0)).sum();
                sum / group.len() as f64
            };
            let a = own_members
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| distance(&x[i].0, &x[j].0))
                .sum::<f64>()
                / (own_members.len() - 1) as f64;
            let b = members
                .iter()
                .filter(|(&l, _)| l != own)
                .map(|(_, g)| mean_to(g))
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            if denom > 0.0 {
                total += (b - a) / denom;
            }
        }
    }
    Ok(total / count as f64)
}

/// Silhouette on a seeded uniform subsample of at most `cap` points; exact
/// when there are no more than `cap` points.
pub fn silhouette_sampled(x: &[DenseVector], labels: &[i32], cap: usize, seed: u64) -> Result<f64> {
    if x.len() <= cap {
        return silhouette(x, labels);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = sample(&mut rng, x.len(), cap).into_vec();
    idx.sort_unstable();
    let xs: Vec<DenseVector> = idx.iter().map(|&i| x[i].clone()).collect();
    let ls: Vec<i32> = idx.iter().map(|&i| labels[i]).collect();
    silhouette(&xs, &ls)
}
