use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::dataset::LabeledDataset;
use super::mlp::argmax;
use crate::error::{Error, Result};
use crate::vector::{dot, DenseVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    Linear,
    Rbf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    /// Misclassification penalty; larger means a harder margin.
    pub c: f64,
    pub kernel: Kernel,
    /// RBF width in `exp(-gamma * |x - y|^2)`; ignored for the linear kernel.
    pub gamma: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Random Fourier feature count for the RBF kernel.
    pub features: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            kernel: Kernel::Linear,
            gamma: 1.0,
            epochs: 100,
            seed: 0,
            features: 512,
        }
    }
}

impl SvmParams {
    fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::param("c", "must be positive and finite"));
        }
        if self.kernel == Kernel::Rbf {
            if !(self.gamma.is_finite() && self.gamma > 0.0) {
                return Err(Error::param("gamma", "must be positive for the rbf kernel"));
            }
            if self.features == 0 {
                return Err(Error::param("features", "must be at least 1"));
            }
        }
        if self.epochs == 0 {
            return Err(Error::param("epochs", "must be at least 1"));
        }
        Ok(())
    }
}

/// Random Fourier features approximating the RBF kernel:
/// `z(x) = sqrt(2/D) cos(W x + b)`, `W ~ N(0, 2 gamma I)`, `b ~ U[0, 2 pi)`.
#[derive(Debug, Clone, PartialEq)]
struct FourierMap {
    omega: DMatrix<f64>,
    phase: Vec<f64>,
}

impl FourierMap {
    fn new(d: usize, features: usize, gamma: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = (2.0 * gamma).sqrt();
        let omega = DMatrix::from_fn(features, d, |_, _| {
            let z: f64 = StandardNormal.sample(&mut rng);
            s * z
        });
        let phase = (0..features)
            .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
            .collect();
        FourierMap { omega, phase }
    }

    fn apply(&self, x: &[f64], out: &mut Vec<f64>) {
        let scale = (2.0 / self.phase.len() as f64).sqrt();
        for (row, b) in self.omega.row_iter().zip(&self.phase) {
            let t: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum();
            out.push(scale * (t + b).cos());
        }
    }
}

/// One-vs-rest linear classifier over an optional random feature map.
///
/// Each class owns a weight vector over the mapped features plus a trailing
/// constant-1 bias feature.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub params: SvmParams,
    pub dim: usize,
    pub weights: Vec<DenseVector>,
    map: Option<FourierMap>,
}

impl SvmModel {
    fn feature_map(d: usize, params: &SvmParams) -> Option<FourierMap> {
        match params.kernel {
            Kernel::Linear => None,
            Kernel::Rbf => Some(FourierMap::new(d, params.features, params.gamma, params.seed ^ 0xF0_0815)),
        }
    }

    fn features(map: Option<&FourierMap>, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(x.len() + 1);
        match map {
            None => out.extend_from_slice(x),
            Some(m) => m.apply(x, &mut out),
        }
        out.push(1.0);
        out
    }

    /// Pegasos primal subgradient descent on the L2-regularized hinge loss,
    /// `lambda = 1 / (C n)`, one binary problem per class. The returned
    /// weights are the average of the iterates over the second half of
    /// training.
    pub fn fit(train: &LabeledDataset, params: SvmParams) -> Result<Self> {
        params.validate()?;
        if train.present_classes() < 2 {
            return Err(Error::param("labels", "need at least two classes"));
        }
        train.require_all_classes()?;
        let d = train.dim();
        let map = Self::feature_map(d, &params);
        let phi: Vec<Vec<f64>> = train
            .vectors()
            .iter()
            .map(|v| Self::features(map.as_ref(), &v.0))
            .collect();
        let n = phi.len();
        let lambda = 1.0 / (params.c * n as f64);
        let radius = 1.0 / lambda.sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

        let mut weights = Vec::with_capacity(train.class_count());
        for class in 0..train.class_count() {
            let mut w = vec![0.0f64; phi[0].len()];
            let mut avg = vec![0.0f64; w.len()];
            let mut averaged = 0usize;
            let total_steps = params.epochs * n;
            let mut order: Vec<usize> = (0..n).collect();
            let mut t = 0usize;
            for _ in 0..params.epochs {
                order.shuffle(&mut rng);
                for &i in &order {
                    t += 1;
                    let eta = 1.0 / (lambda * t as f64);
                    let y = if train.labels()[i] == class { 1.0 } else { -1.0 };
                    let margin = y * dot(&w, &phi[i]);
                    let shrink = 1.0 - eta * lambda;
                    w.iter_mut().for_each(|v| *v *= shrink);
                    if margin < 1.0 {
                        for (v, x) in w.iter_mut().zip(&phi[i]) {
                            *v += eta * y * x;
                        }
                    }
                    let norm = dot(&w, &w).sqrt();
                    if norm > radius {
                        let s = radius / norm;
                        w.iter_mut().for_each(|v| *v *= s);
                    }
                    if 2 * t > total_steps {
                        averaged += 1;
                        let a = 1.0 / averaged as f64;
                        for (m, v) in avg.iter_mut().zip(&w) {
                            *m += a * (v - *m);
                        }
                    }
                }
            }
            let w = avg;
            if w.iter().any(|v| !v.is_finite()) {
                return Err(Error::Diverged(format!("svm weights for class {class}")));
            }
            weights.push(DenseVector(w));
        }
        Ok(SvmModel {
            params,
            dim: d,
            weights,
            map,
        })
    }

    /// Rebuild from stored weights; the feature map is regenerated from the seed.
    pub fn from_parts(dim: usize, params: SvmParams, weights: Vec<DenseVector>) -> Result<Self> {
        params.validate()?;
        let width = match params.kernel {
            Kernel::Linear => dim + 1,
            Kernel::Rbf => params.features + 1,
        };
        for w in &weights {
            if w.dim() != width {
                return Err(Error::DimensionMismatch {
                    context: "svm weights".into(),
                    expected: width,
                    actual: w.dim(),
                });
            }
        }
        Ok(SvmModel {
            map: Self::feature_map(dim, &params),
            params,
            dim,
            weights,
        })
    }

    pub fn class_count(&self) -> usize {
        self.weights.len()
    }

    pub fn scores(&self, x: &DenseVector) -> Result<Vec<f64>> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                context: "svm input".into(),
                expected: self.dim,
                actual: x.dim(),
            });
        }
        let phi = Self::features(self.map.as_ref(), &x.0);
        Ok(self.weights.iter().map(|w| dot(&w.0, &phi)).collect())
    }

    pub fn predict(&self, x: &DenseVector) -> Result<usize> {
        Ok(argmax(self.scores(x)?.into_iter()))
    }
}
