use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::wcss;
use super::model::{ClusterAlgorithm, ClusterModel};
use super::uniform_dim;
use crate::error::{Error, Result};
use crate::vector::{squared_distance, DenseVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansParams {
    pub k: usize,
    pub seed: u64,
    pub max_iters: usize,
    /// Stop once no centroid moves farther than this.
    pub tol: f64,
    /// Independent k-means++ starts; the lowest WCSS wins.
    pub restarts: usize,
}

impl Default for KMeansParams {
    fn default() -> Self {
        KMeansParams {
            k: 8,
            seed: 0,
            max_iters: 300,
            tol: 1e-8,
            restarts: 10,
        }
    }
}

struct Run {
    centroids: Vec<DenseVector>,
    labels: Vec<usize>,
    wcss: f64,
    trace: Vec<f64>,
    iterations: usize,
}

fn nearest(point: &[f64], centroids: &[DenseVector], current: Option<usize>) -> usize {
    let mut best = current.unwrap_or(0);
    let mut best_d = squared_distance(point, &centroids[best].0);
    for (j, c) in centroids.iter().enumerate() {
        let d = squared_distance(point, &c.0);
        if d < best_d {
            best = j;
            best_d = d;
        }
    }
    best
}

fn plus_plus_init(x: &[DenseVector], k: usize, rng: &mut ChaCha8Rng) -> Vec<DenseVector> {
    let n = x.len();
    let mut centroids = Vec::with_capacity(k);
    centroids.push(x[rng.random_range(0..n)].clone());
    let mut d2: Vec<f64> = x.iter().map(|p| squared_distance(&p.0, &centroids[0].0)).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = x[pick].clone();
        for (di, p) in d2.iter_mut().zip(x) {
            *di = di.min(squared_distance(&p.0, &c.0));
        }
        centroids.push(c);
    }
    centroids
}

/// Give every empty cluster the point farthest from its centroid, taken from
/// a cluster that can spare it.
fn repair_empty(x: &[DenseVector], centroids: &mut [DenseVector], labels: &mut [usize]) {
    let k = centroids.len();
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    for j in 0..k {
        if sizes[j] > 0 {
            continue;
        }
        let mut far: Option<(usize, f64)> = None;
        for (i, p) in x.iter().enumerate() {
            if sizes[labels[i]] < 2 {
                continue;
            }
            let d = squared_distance(&p.0, &centroids[labels[i]].0);
            if far.is_none_or(|(_, best)| d > best) {
                far = Some((i, d));
            }
        }
        let (i, _) = far.expect("k <= n guarantees a cluster with two members");
        sizes[labels[i]] -= 1;
        labels[i] = j;
        sizes[j] = 1;
        centroids[j] = x[i].clone();
    }
}

fn means(x: &[DenseVector], labels: &[usize], k: usize, d: usize) -> Vec<DenseVector> {
    let mut sums = vec![vec![0.0; d]; k];
    let mut counts = vec![0usize; k];
    for (p, &l) in x.iter().zip(labels) {
        counts[l] += 1;
        for (s, v) in sums[l].iter_mut().zip(&p.0) {
            *s += v;
        }
    }
    sums.into_iter()
        .zip(counts)
        .map(|(s, c)| DenseVector(s.into_iter().map(|v| v / c as f64).collect()))
        .collect()
}

fn lloyd(x: &[DenseVector], d: usize, params: &KMeansParams, seed: u64) -> Run {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = params.k;
    let mut centroids = plus_plus_init(x, k, &mut rng);
    let mut labels: Vec<usize> = x.iter().map(|p| nearest(&p.0, &centroids, None)).collect();
    let mut trace = Vec::new();
    let mut iterations = 0;
    for it in 0..params.max_iters {
        if it > 0 {
            for (i, p) in x.iter().enumerate() {
                labels[i] = nearest(&p.0, &centroids, Some(labels[i]));
            }
        }
        repair_empty(x, &mut centroids, &mut labels);
        let updated = means(x, &labels, k, d);
        let shift = centroids
            .iter()
            .zip(&updated)
            .map(|(a, b)| squared_distance(&a.0, &b.0))
            .fold(0.0, f64::max)
            .sqrt();
        centroids = updated;
        let labels_i32: Vec<i32> = labels.iter().map(|&l| l as i32).collect();
        trace.push(wcss(x, &labels_i32, &centroids));
        iterations = it + 1;
        if shift <= params.tol {
            break;
        }
    }
    Run {
        wcss: *trace.last().expect("at least one iteration"),
        centroids,
        labels,
        trace,
        iterations,
    }
}

/// k-means with k-means++ seeding and Lloyd iterations, best of
/// `params.restarts` runs.
pub fn kmeans_fit(x: &[DenseVector], params: &KMeansParams) -> Result<ClusterModel> {
    let n = x.len();
    if params.k == 0 || params.k > n {
        return Err(Error::param("k", format!("must satisfy 1 <= k <= {n}, got {}", params.k)));
    }
    if params.max_iters == 0 {
        return Err(Error::param("max_iters", "must be at least 1"));
    }
    if params.restarts == 0 {
        return Err(Error::param("restarts", "must be at least 1"));
    }
    if !(params.tol >= 0.0) {
        return Err(Error::param("tol", "must be non-negative"));
    }
    let d = uniform_dim(x)?;
    let mut master = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best: Option<Run> = None;
    for _ in 0..params.restarts {
        let run = lloyd(x, d, params, master.next_u64());
        if best.as_ref().is_none_or(|b| run.wcss < b.wcss) {
            best = Some(run);
        }
    }
    let best = best.expect("restarts >= 1");
    Ok(ClusterModel {
        algorithm: ClusterAlgorithm::Kmeans,
        k: params.k,
        centroids: best.centroids,
        labels: best.labels.into_iter().map(|l| l as i32).collect(),
        wcss: best.wcss,
        iterations_run: best.iterations,
        seed: params.seed,
        wcss_trace: best.trace,
    })
}
