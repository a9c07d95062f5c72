use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::DenseVector;

/// Vectors with integer class labels in `0..class_count`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    vectors: Vec<DenseVector>,
    labels: Vec<usize>,
    class_count: usize,
}

impl LabeledDataset {
    /// Every label must be below `class_count` and every vector must share
    /// one dimension. Classes may be absent (as in a fold of a split); use
    /// [`LabeledDataset::require_all_classes`] where that matters.
    pub fn new(vectors: Vec<DenseVector>, labels: Vec<usize>, class_count: usize) -> Result<Self> {
        if vectors.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                context: "labels".into(),
                expected: vectors.len(),
                actual: labels.len(),
            });
        }
        if vectors.is_empty() {
            return Err(Error::param("dataset", "must contain at least one vector"));
        }
        let d = vectors[0].dim();
        for (i, v) in vectors.iter().enumerate() {
            if v.dim() != d {
                return Err(Error::DimensionMismatch {
                    context: format!("dataset vector {i}"),
                    expected: d,
                    actual: v.dim(),
                });
            }
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_count) {
            return Err(Error::param(
                "labels",
                format!("label {bad} outside 0..{class_count}"),
            ));
        }
        Ok(LabeledDataset {
            vectors,
            labels,
            class_count,
        })
    }

    /// Build from cluster labels, dropping noise points (negative labels).
    pub fn from_cluster_labels(vectors: &[DenseVector], labels: &[i32], k: usize) -> Result<Self> {
        let (v, l): (Vec<DenseVector>, Vec<usize>) = vectors
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l >= 0)
            .map(|(v, &l)| (v.clone(), l as usize))
            .unzip();
        let ds = LabeledDataset::new(v, l, k)?;
        ds.require_all_classes()?;
        Ok(ds)
    }

    pub fn require_all_classes(&self) -> Result<()> {
        let counts = self.class_counts();
        if let Some(c) = counts.iter().position(|&n| n == 0) {
            return Err(Error::param("labels", format!("class {c} has no members")));
        }
        if self.len() < self.class_count {
            return Err(Error::param("dataset", "fewer points than classes"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].dim()
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn vectors(&self) -> &[DenseVector] {
        &self.vectors
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Classes that actually occur.
    pub fn present_classes(&self) -> usize {
        self.class_counts().iter().filter(|&&c| c > 0).count()
    }

    pub fn subset(&self, idx: &[usize]) -> Result<Self> {
        LabeledDataset::new(
            idx.iter().map(|&i| self.vectors[i].clone()).collect(),
            idx.iter().map(|&i| self.labels[i]).collect(),
            self.class_count,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.67,
            seed: 0,
            stratified: true,
        }
    }
}

/// Seeded train/test split. Unstratified: `round(n * fraction)` training
/// points. Stratified: the same rule per class, so every class with at
/// least two members lands on both sides.
pub fn split(dataset: &LabeledDataset, spec: &SplitSpec) -> Result<(LabeledDataset, LabeledDataset)> {
    let f = spec.train_fraction;
    if !(f > 0.0 && f < 1.0) {
        return Err(Error::param("train_fraction", "must lie strictly between 0 and 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = dataset.len();
    let (mut train, mut test) = (Vec::new(), Vec::new());
    if spec.stratified {
        let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); dataset.class_count()];
        for (i, &l) in dataset.labels().iter().enumerate() {
            by_class[l].push(i);
        }
        for (class, members) in by_class.iter_mut().enumerate() {
            if members.is_empty() {
                continue;
            }
            if members.len() < 2 {
                return Err(Error::ClassTooSmall {
                    class,
                    count: members.len(),
                });
            }
            members.shuffle(&mut rng);
            let cut = ((members.len() as f64 * f).round() as usize).clamp(1, members.len() - 1);
            train.extend_from_slice(&members[..cut]);
            test.extend_from_slice(&members[cut..]);
        }
        train.sort_unstable();
        test.sort_unstable();
        let mut order: Vec<usize> = (0..train.len()).collect();
        order.shuffle(&mut rng);
        train = order.into_iter().map(|i| train[i]).collect();
    } else {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        let cut = ((n as f64 * f).round() as usize).clamp(1, n.saturating_sub(1).max(1));
        train = idx[..cut].to_vec();
        test = idx[cut..].to_vec();
    }
    if test.is_empty() {
        return Err(Error::param("train_fraction", "leaves an empty test set"));
    }
    Ok((dataset.subset(&train)?, dataset.subset(&test)?))
}

/// Fraction of exact matches.
pub fn accuracy(predictions: &[usize], truth: &[usize]) -> Result<f64> {
    if predictions.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            context: "accuracy".into(),
            expected: truth.len(),
            actual: predictions.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::param("truth", "must be non-empty"));
    }
    let hits = predictions.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}
