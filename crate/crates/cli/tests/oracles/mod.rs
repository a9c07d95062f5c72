//! Brute-force reference computations. None of these call into the library
//! code they are compared against; each follows the textbook definition
//! with plain loops over `f64` slices.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    sq_dist(a, b).sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `|a - b| <= tol * max(|a|, |b|)`, with exact equality for zeros.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// TF-IDF weights keyed by (document, term): raw counts times
/// `ln((1 + N) / (1 + df)) + 1`, then each document scaled to unit length.
pub fn tfidf(docs: &[Vec<String>]) -> (BTreeMap<String, f64>, Vec<BTreeMap<String, f64>>) {
    let n = docs.len() as f64;
    let mut df: BTreeMap<String, f64> = BTreeMap::new();
    for d in docs {
        let distinct: BTreeSet<&String> = d.iter().collect();
        for t in distinct {
            *df.entry(t.clone()).or_insert(0.0) += 1.0;
        }
    }
    let idf: BTreeMap<String, f64> = df
        .iter()
        .map(|(t, &f)| (t.clone(), ((1.0 + n) / (1.0 + f)).ln() + 1.0))
        .collect();
    let weights = docs
        .iter()
        .map(|d| {
            let mut w: BTreeMap<String, f64> = BTreeMap::new();
            for t in d {
                *w.entry(t.clone()).or_insert(0.0) += 1.0;
            }
            for (t, v) in w.iter_mut() {
                *v *= idf[t];
            }
            let len = w.values().map(|v| v * v).sum::<f64>().sqrt();
            if len > 0.0 {
                for v in w.values_mut() {
                    *v /= len;
                }
            }
            w
        })
        .collect();
    (idf, weights)
}

/// k-nearest-neighbour vote. Neighbours are the k smallest squared
/// distances (earlier points first on equal distance); the most common
/// label wins, then the label whose voters are closer on average, then the
/// smaller label.
pub fn knn(train: &[Vec<f64>], labels: &[usize], q: &[f64], k: usize) -> usize {
    let mut order: Vec<(f64, usize)> = train.iter().enumerate().map(|(i, p)| (sq_dist(p, q), i)).collect();
    order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let mut count: BTreeMap<usize, (usize, f64)> = BTreeMap::new();
    for &(d2, i) in order.iter().take(k) {
        let e = count.entry(labels[i]).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += d2.sqrt();
    }
    let mut best: Option<(usize, usize, f64)> = None;
    for (&label, &(votes, sum)) in &count {
        let mean = sum / votes as f64;
        best = match best {
            None => Some((label, votes, mean)),
            Some((bl, bv, bm)) => {
                if votes > bv || (votes == bv && mean < bm) {
                    Some((label, votes, mean))
                } else {
                    Some((bl, bv, bm))
                }
            }
        };
    }
    best.expect("k >= 1").0
}

/// Position and cosine of the most similar nonzero document; the first
/// position wins ties.
pub fn cosine_top1(docs: &[Vec<f64>], q: &[f64]) -> Option<(usize, f64)> {
    let qn = norm(q);
    let mut best: Option<(usize, f64)> = None;
    for (i, d) in docs.iter().enumerate() {
        let dn = norm(d);
        if dn == 0.0 {
            continue;
        }
        let c = dot(q, d) / (qn * dn);
        if best.map_or(true, |(_, b)| c > b) {
            best = Some((i, c));
        }
    }
    best
}

pub fn cosine_pct(c: f64) -> u8 {
    let c = if c < 0.0 { 0.0 } else if c > 1.0 { 1.0 } else { c };
    (c * 100.0).round() as u8
}

pub fn distance_pct(d: f64, median: f64) -> u8 {
    if median == 0.0 {
        return if d == 0.0 { 100 } else { 0 };
    }
    ((-d / median).exp() * 100.0).round() as u8
}

/// Middle value, or the mean of the two middle values.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// The `n` members of cluster `c` nearest to `q`, with their distances.
pub fn cluster_neighbors(docs: &[Vec<f64>], labels: &[i32], c: i32, q: &[f64], n: usize) -> Vec<(usize, f64)> {
    let mut m: Vec<(usize, f64)> = docs
        .iter()
        .enumerate()
        .filter(|(i, _)| labels[*i] == c)
        .map(|(i, d)| (i, dist(d, q)))
        .collect();
    m.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    m.truncate(n);
    m
}

/// Singular values by one-sided Jacobi rotations on the columns of the
/// taller orientation, sorted descending.
pub fn jacobi_singular_values(rows: &[Vec<f64>]) -> Vec<f64> {
    let m = rows.len();
    let n = rows[0].len();
    // Columns of the orientation with at least as many rows as columns.
    let mut cols: Vec<Vec<f64>> = if m >= n {
        (0..n).map(|j| (0..m).map(|i| rows[i][j]).collect()).collect()
    } else {
        rows.to_vec()
    };
    let k = cols.len();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..cols[p].len() {
                    let a = cols[p][i];
                    let b = cols[q][i];
                    cols[p][i] = c * a - s * b;
                    cols[q][i] = s * a + c * b;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut s: Vec<f64> = cols.iter().map(|c| norm(c)).collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

fn group_sse(points: &[Vec<f64>], members: &[usize]) -> f64 {
    if members.is_empty() {
        return 0.0;
    }
    let d = points[0].len();
    let mut mean = vec![0.0; d];
    for &i in members {
        for j in 0..d {
            mean[j] += points[i][j];
        }
    }
    for v in &mut mean {
        *v /= members.len() as f64;
    }
    members.iter().map(|&i| sq_dist(&points[i], &mean)).sum()
}

/// Smallest within-cluster sum of squares over every split of the points
/// into two nonempty groups.
pub fn best_two_partition(points: &[Vec<f64>]) -> f64 {
    let n = points.len();
    assert!((2..=20).contains(&n));
    let mut best = f64::INFINITY;
    // The last point always sits in group B, so each split is seen once.
    for mask in 1u32..(1 << (n - 1)) {
        let a: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let b: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) == 0).collect();
        best = best.min(group_sse(points, &a) + group_sse(points, &b));
    }
    best
}

/// Mean silhouette over points with label >= 0. `a` is the mean distance to
/// the rest of the own cluster, `b` the smallest mean distance to another
/// cluster; members of singleton clusters score 0.
pub fn silhouette(points: &[Vec<f64>], labels: &[i32]) -> f64 {
    let clusters: BTreeSet<i32> = labels.iter().copied().filter(|&l| l >= 0).collect();
    let mut total = 0.0;
    let mut count = 0.0;
    for i in 0..points.len() {
        let own = labels[i];
        if own < 0 {
            continue;
        }
        count += 1.0;
        let mates: Vec<usize> = (0..points.len()).filter(|&j| j != i && labels[j] == own).collect();
        if mates.is_empty() {
            continue;
        }
        let a = mates.iter().map(|&j| dist(&points[i], &points[j])).sum::<f64>() / mates.len() as f64;
        let mut b = f64::INFINITY;
        for &other in clusters.iter().filter(|&&c| c != own) {
            let group: Vec<usize> = (0..points.len()).filter(|&j| labels[j] == other).collect();
            let mean = group.iter().map(|&j| dist(&points[i], &points[j])).sum::<f64>() / group.len() as f64;
            if mean < b {
                b = mean;
            }
        }
        let m = if a > b { a } else { b };
        if m > 0.0 {
            total += (b - a) / m;
        }
    }
    total / count
}

/// Mean softmax cross-entropy of a one-hidden-layer ReLU network whose
/// weights are laid out as W1 (d x h, row-major), b1, W2 (h x c, row-major), b2.
pub fn mlp_loss(w: &[f64], d: usize, h: usize, c: usize, x: &[Vec<f64>], y: &[usize]) -> f64 {
    let w1 = &w[..d * h];
    let b1 = &w[d * h..d * h + h];
    let w2 = &w[d * h + h..d * h + h + h * c];
    let b2 = &w[d * h + h + h * c..];
    let mut total = 0.0;
    for (xi, &yi) in x.iter().zip(y) {
        let mut hidden = vec![0.0; h];
        for j in 0..h {
            let mut z = b1[j];
            for i in 0..d {
                z += xi[i] * w1[i * h + j];
            }
            hidden[j] = if z > 0.0 { z } else { 0.0 };
        }
        let mut logits = vec![0.0; c];
        for k in 0..c {
            let mut z = b2[k];
            for j in 0..h {
                z += hidden[j] * w2[j * c + k];
            }
            logits[k] = z;
        }
        let top = logits.iter().cloned().fold(f64::MIN, f64::max);
        let log_sum = top + logits.iter().map(|z| (z - top).exp()).sum::<f64>().ln();
        total += log_sum - logits[yi];
    }
    total / x.len() as f64
}

/// Central differences of `f` at `w` with step `eps`.
pub fn numeric_gradient(w: &[f64], eps: f64, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let mut g = Vec::with_capacity(w.len());
    let mut probe = w.to_vec();
    for i in 0..w.len() {
        probe[i] = w[i] + eps;
        let up = f(&probe);
        probe[i] = w[i] - eps;
        let down = f(&probe);
        probe[i] = w[i];
        g.push((up - down) / (2.0 * eps));
    }
    g
}
