use std::collections::VecDeque;

use super::model::{ClusterAlgorithm, ClusterModel};
use super::uniform_dim;
use super::metrics::wcss;
use crate::error::{Error, Result};
use crate::vector::{distance, squared_distance, DenseVector};

pub const NOISE: i32 = -1;

fn region_query(x: &[DenseVector], i: usize, eps_sq: f64) -> Vec<usize> {
    x.iter()
        .enumerate()
        .filter(|(_, p)| squared_distance(&x[i].0, &p.0) <= eps_sq)
        .map(|(j, _)| j)
        .collect()
}

/// DBSCAN under Euclidean distance. `min_pts` counts the point itself.
/// Clusters are numbered in order of discovery by point index.
pub fn dbscan_fit(x: &[DenseVector], eps: f64, min_pts: usize) -> Result<ClusterModel> {
    if !(eps > 0.0) {
        return Err(Error::param("eps", "must be positive"));
    }
    if min_pts == 0 {
        return Err(Error::param("min_pts", "must be at least 1"));
    }
    let d = uniform_dim(x)?;
    let eps_sq = eps * eps;
    let n = x.len();
    const UNVISITED: i32 = -2;
    let mut labels = vec![UNVISITED; n];
    let mut k = 0i32;
    for i in 0..n {
        if labels[i] != UNVISITED {
            continue;
        }
        let neighbors = region_query(x, i, eps_sq);
        if neighbors.len() < min_pts {
            labels[i] = NOISE;
            continue;
        }
        let cluster = k;
        k += 1;
        labels[i] = cluster;
        let mut queue: VecDeque<usize> = neighbors.into_iter().filter(|&j| j != i).collect();
        while let Some(j) = queue.pop_front() {
            if labels[j] == NOISE {
                // Border point.
                labels[j] = cluster;
                continue;
            }
            if labels[j] != UNVISITED {
                continue;
            }
            labels[j] = cluster;
            let nj = region_query(x, j, eps_sq);
            if nj.len() >= min_pts {
                queue.extend(nj.into_iter().filter(|&m| labels[m] == UNVISITED || labels[m] == NOISE));
            }
        }
    }
    let k = k as usize;
    let mut sums = vec![vec![0.0; d]; k];
    let mut counts = vec![0usize; k];
    for (p, &l) in x.iter().zip(&labels) {
        if l >= 0 {
            counts[l as usize] += 1;
            for (s, v) in sums[l as usize].iter_mut().zip(&p.0) {
                *s += v;
            }
        }
    }
    let centroids: Vec<DenseVector> = sums
        .into_iter()
        .zip(counts)
        .map(|(s, c)| DenseVector(s.into_iter().map(|v| v / c as f64).collect()))
        .collect();
    let total = wcss(x, &labels, &centroids);
    Ok(ClusterModel {
        algorithm: ClusterAlgorithm::Dbscan,
        k,
        centroids,
        labels,
        wcss: total,
        iterations_run: 1,
        seed: 0,
        wcss_trace: vec![total],
    })
}

/// Distance from every point to its k-th nearest other point, sorted
/// descending. Its knee is the usual starting guess for `eps` with
/// `min_pts = k`.
pub fn k_distance_curve(x: &[DenseVector], k: usize) -> Result<Vec<f64>> {
    if k == 0 || k >= x.len() {
        return Err(Error::param("k", format!("must satisfy 1 <= k < {}", x.len())));
    }
    uniform_dim(x)?;
    let mut out: Vec<f64> = x
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut d: Vec<f64> = x
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, q)| distance(&p.0, &q.0))
                .collect();
            d.sort_by(f64::total_cmp);
            d[k - 1]
        })
        .collect();
    out.sort_by(|a, b| b.total_cmp(a));
    Ok(out)
}
