use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::vector::DenseVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden: 128,
            epochs: 300,
            learning_rate: 0.05,
            batch_size: 32,
            seed: 0,
        }
    }
}

impl MlpParams {
    fn validate(&self) -> Result<()> {
        if self.hidden == 0 {
            return Err(Error::param("hidden", "must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::param("batch_size", "must be at least 1"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::param("learning_rate", "must be positive and finite"));
        }
        Ok(())
    }
}

/// One hidden ReLU layer followed by a softmax output.
///
/// Forward pass: `softmax(relu(x W1 + b1) W2 + b2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    /// `d x hidden`
    pub w1: DMatrix<f64>,
    pub b1: DVector<f64>,
    /// `hidden x C`
    pub w2: DMatrix<f64>,
    pub b2: DVector<f64>,
    pub params: MlpParams,
    /// Mean training loss after each epoch.
    pub loss_trace: Vec<f64>,
}

/// Gradient of the mean cross-entropy with respect to every parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGradient {
    pub w1: DMatrix<f64>,
    pub b1: DVector<f64>,
    pub w2: DMatrix<f64>,
    pub b2: DVector<f64>,
}

/// Row-wise softmax, shifted by the row maximum.
pub fn softmax_rows(logits: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = logits.clone();
    for mut row in out.row_iter_mut() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row.apply(|v| *v = (*v - max).exp());
        let sum: f64 = row.iter().sum();
        row /= sum;
    }
    out
}

fn stack(rows: &[&DenseVector], d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), d, |i, j| rows[i].0[j])
}

impl MlpModel {
    /// Seeded initialization: weights uniform in `±1/sqrt(fan_in)`, zero biases.
    pub fn init(d: usize, classes: usize, params: MlpParams) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let h = params.hidden;
        let s1 = 1.0 / (d as f64).sqrt();
        let s2 = 1.0 / (h as f64).sqrt();
        let w1 = DMatrix::from_fn(d, h, |_, _| rng.random_range(-s1..s1));
        let w2 = DMatrix::from_fn(h, classes, |_, _| rng.random_range(-s2..s2));
        MlpModel {
            w1,
            b1: DVector::zeros(h),
            w2,
            b2: DVector::zeros(classes),
            params,
            loss_trace: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.w1.nrows()
    }

    pub fn class_count(&self) -> usize {
        self.w2.ncols()
    }

    fn hidden_pre(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut z = x * &self.w1;
        for mut row in z.row_iter_mut() {
            row += self.b1.transpose();
        }
        z
    }

    fn logits_from_hidden(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        let mut z = a * &self.w2;
        for mut row in z.row_iter_mut() {
            row += self.b2.transpose();
        }
        z
    }

    /// Class probabilities for each row of `x`.
    pub fn probabilities(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let a = self.hidden_pre(x).map(|v| v.max(0.0));
        softmax_rows(&self.logits_from_hidden(&a))
    }

    /// Mean cross-entropy of a batch and its gradient.
    pub fn loss_and_gradient(&self, x: &DMatrix<f64>, y: &[usize]) -> (f64, MlpGradient) {
        let n = x.nrows() as f64;
        let z1 = self.hidden_pre(x);
        let a = z1.map(|v| v.max(0.0));
        let logits = self.logits_from_hidden(&a);
        let p = softmax_rows(&logits);

        let mut loss = 0.0;
        let mut dz2 = p;
        for (i, &label) in y.iter().enumerate() {
            // log softmax computed from logits keeps tiny probabilities finite.
            let row = logits.row(i);
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            loss += lse - row[label];
            dz2[(i, label)] -= 1.0;
        }
        loss /= n;
        dz2 /= n;

        let gw2 = a.transpose() * &dz2;
        let gb2 = dz2.row_sum().transpose();
        let mut dz1 = &dz2 * self.w2.transpose();
        dz1.zip_apply(&z1, |g, z| {
            if z <= 0.0 {
                *g = 0.0
            }
        });
        let gw1 = x.transpose() * &dz1;
        let gb1 = dz1.row_sum().transpose();
        (
            loss,
            MlpGradient {
                w1: gw1,
                b1: gb1,
                w2: gw2,
                b2: gb2,
            },
        )
    }

    /// Mean cross-entropy only.
    pub fn loss(&self, x: &DMatrix<f64>, y: &[usize]) -> f64 {
        self.loss_and_gradient(x, y).0
    }

    /// Mini-batch gradient descent on mean softmax cross-entropy.
    ///
    /// Training points are first put in a canonical order (label, then
    /// vector) so that the result does not depend on how the caller ordered
    /// them; each epoch then visits them in a seeded shuffle.
    pub fn fit(train: &LabeledDataset, params: MlpParams) -> Result<Self> {
        params.validate()?;
        train.require_all_classes()?;
        let d = train.dim();
        let mut model = MlpModel::init(d, train.class_count(), params);

        let mut order: Vec<usize> = (0..train.len()).collect();
        order.sort_by(|&i, &j| {
            train.labels()[i].cmp(&train.labels()[j]).then_with(|| {
                let (a, b) = (&train.vectors()[i].0, &train.vectors()[j].0);
                a.iter()
                    .zip(b)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        });
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ 0x5EED_0F_BA7C4);
        let lr = params.learning_rate;
        for epoch in 0..params.epochs {
            order.shuffle(&mut rng);
            let mut epoch_loss = 0.0;
            for chunk in order.chunks(params.batch_size) {
                let rows: Vec<&DenseVector> = chunk.iter().map(|&i| &train.vectors()[i]).collect();
                let y: Vec<usize> = chunk.iter().map(|&i| train.labels()[i]).collect();
                let x = stack(&rows, d);
                let (loss, g) = model.loss_and_gradient(&x, &y);
                if !loss.is_finite() {
                    return Err(Error::Diverged(format!(
                        "non-finite loss in epoch {epoch} (learning rate {lr})"
                    )));
                }
                epoch_loss += loss * chunk.len() as f64;
                model.w1 -= lr * g.w1;
                model.b1 -= lr * g.b1;
                model.w2 -= lr * g.w2;
                model.b2 -= lr * g.b2;
            }
            let mean = epoch_loss / train.len() as f64;
            if !model.is_finite() {
                return Err(Error::Diverged(format!(
                    "non-finite weights after epoch {epoch} (learning rate {lr})"
                )));
            }
            model.loss_trace.push(mean);
        }
        Ok(model)
    }

    pub fn is_finite(&self) -> bool {
        self.w1.iter().chain(self.b1.iter()).chain(self.w2.iter()).chain(self.b2.iter()).all(|v| v.is_finite())
    }

    pub fn predict(&self, x: &DenseVector) -> Result<usize> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "mlp input".into(),
                expected: self.dim(),
                actual: x.dim(),
            });
        }
        let p = self.probabilities(&stack(&[x], self.dim()));
        Ok(argmax(p.row(0).iter().copied()))
    }

    /// All weights in the order W1 (row-major), b1, W2 (row-major), b2.
    pub fn flat_weights(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len());
        out.extend(self.w1.transpose().iter());
        out.extend(self.b1.iter());
        out.extend(self.w2.transpose().iter());
        out.extend(self.b2.iter());
        out
    }

    pub fn from_flat_weights(d: usize, classes: usize, params: MlpParams, w: &[f64]) -> Result<Self> {
        let h = params.hidden;
        let expected = d * h + h + h * classes + classes;
        if w.len() != expected {
            return Err(Error::DimensionMismatch {
                context: "mlp weights".into(),
                expected,
                actual: w.len(),
            });
        }
        let (w1, rest) = w.split_at(d * h);
        let (b1, rest) = rest.split_at(h);
        let (w2, b2) = rest.split_at(h * classes);
        Ok(MlpModel {
            w1: DMatrix::from_row_slice(d, h, w1),
            b1: DVector::from_column_slice(b1),
            w2: DMatrix::from_row_slice(h, classes, w2),
            b2: DVector::from_column_slice(b2),
            params,
            loss_trace: Vec::new(),
        })
    }
}

/// Index of the largest value; first wins on ties.
pub(crate) fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}
