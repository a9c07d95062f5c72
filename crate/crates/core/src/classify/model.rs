use std::path::Path;

use serde::{Deserialize, Serialize};

use super::dataset::LabeledDataset;
use super::knn::KnnModel;
use super::mlp::{MlpModel, MlpParams};
use super::svm::{SvmModel, SvmParams};
use crate::artifact;
use crate::error::{Error, Result};
use crate::fingerprint::Hasher;
use crate::vector::DenseVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelFamily {
    Knn,
    Svm,
    Mlp,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 3] = [ModelFamily::Knn, ModelFamily::Svm, ModelFamily::Mlp];

    pub fn name(self) -> &'static str {
        match self {
            ModelFamily::Knn => "knn",
            ModelFamily::Svm => "svm",
            ModelFamily::Mlp => "mlp",
        }
    }
}

impl std::fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "knn" => Ok(ModelFamily::Knn),
            "svm" => Ok(ModelFamily::Svm),
            "mlp" | "ann" => Ok(ModelFamily::Mlp),
            other => Err(Error::param("model", format!("unknown model family `{other}`"))),
        }
    }
}

/// A model family together with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ModelSpec {
    Knn { k: usize },
    Svm(SvmParams),
    Mlp(MlpParams),
}

impl ModelSpec {
    pub fn family(&self) -> ModelFamily {
        match self {
            ModelSpec::Knn { .. } => ModelFamily::Knn,
            ModelSpec::Svm(_) => ModelFamily::Svm,
            ModelSpec::Mlp(_) => ModelFamily::Mlp,
        }
    }
}

/// A fitted classifier of any family.
#[derive(Debug, Clone, PartialEq)]
pub enum Classifier {
    Knn(KnnModel),
    Svm(SvmModel),
    Mlp(MlpModel),
}

pub fn fit_model(train: &LabeledDataset, spec: &ModelSpec) -> Result<Classifier> {
    Ok(match spec {
        ModelSpec::Knn { k } => Classifier::Knn(KnnModel::fit(train, *k)?),
        ModelSpec::Svm(p) => Classifier::Svm(SvmModel::fit(train, *p)?),
        ModelSpec::Mlp(p) => Classifier::Mlp(MlpModel::fit(train, *p)?),
    })
}

#[derive(Serialize, Deserialize)]
struct ClassifierMeta {
    #[serde(flatten)]
    spec: ModelSpec,
    dimension: usize,
    class_count: usize,
    /// Stored training labels (KNN only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    knn_labels: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    loss_trace: Vec<f64>,
}

impl Classifier {
    pub fn spec(&self) -> ModelSpec {
        match self {
            Classifier::Knn(m) => ModelSpec::Knn { k: m.k },
            Classifier::Svm(m) => ModelSpec::Svm(m.params),
            Classifier::Mlp(m) => ModelSpec::Mlp(m.params),
        }
    }

    pub fn family(&self) -> ModelFamily {
        self.spec().family()
    }

    pub fn dim(&self) -> usize {
        match self {
            Classifier::Knn(m) => m.dim(),
            Classifier::Svm(m) => m.dim,
            Classifier::Mlp(m) => m.dim(),
        }
    }

    pub fn class_count(&self) -> usize {
        match self {
            Classifier::Knn(m) => m.class_count,
            Classifier::Svm(m) => m.class_count(),
            Classifier::Mlp(m) => m.class_count(),
        }
    }

    pub fn predict(&self, x: &DenseVector) -> Result<usize> {
        match self {
            Classifier::Knn(m) => m.predict(x),
            Classifier::Svm(m) => m.predict(x),
            Classifier::Mlp(m) => m.predict(x),
        }
    }

    pub fn predict_all(&self, xs: &[DenseVector]) -> Result<Vec<usize>> {
        xs.iter().map(|x| self.predict(x)).collect()
    }

    fn flat_weights(&self) -> Vec<f64> {
        match self {
            Classifier::Knn(m) => m.vectors.iter().flat_map(|v| v.0.iter().copied()).collect(),
            Classifier::Svm(m) => m.weights.iter().flat_map(|v| v.0.iter().copied()).collect(),
            Classifier::Mlp(m) => m.flat_weights(),
        }
    }

    pub fn fingerprint(&self) -> String {
        let mut h = Hasher::new();
        h.part("spec", serde_json::to_string(&self.spec()).expect("spec serializes").as_bytes());
        h.part("dimension", &(self.dim() as u64).to_le_bytes());
        h.part("classes", &(self.class_count() as u64).to_le_bytes());
        if let Classifier::Knn(m) = self {
            let labels: Vec<u8> = m.labels.iter().flat_map(|&l| (l as u64).to_le_bytes()).collect();
            h.part("labels", &labels);
        }
        h.f64s("weights", &self.flat_weights());
        h.finish()
    }

    /// `classifier.json` plus `weights.f64le`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        artifact::create_dir(dir)?;
        let meta = ClassifierMeta {
            spec: self.spec(),
            dimension: self.dim(),
            class_count: self.class_count(),
            knn_labels: match self {
                Classifier::Knn(m) => m.labels.clone(),
                _ => Vec::new(),
            },
            loss_trace: match self {
                Classifier::Mlp(m) => m.loss_trace.clone(),
                _ => Vec::new(),
            },
        };
        artifact::write_json(&dir.join("classifier.json"), &meta)?;
        artifact::write_f64le(&dir.join("weights.f64le"), &self.flat_weights())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let meta_path = dir.join("classifier.json");
        let meta: ClassifierMeta = artifact::read_json(&meta_path)?;
        let weights_path = dir.join("weights.f64le");
        let w = artifact::read_f64le(&weights_path)?;
        let d = meta.dimension;
        let rows = |width: usize, count: usize| -> Result<Vec<DenseVector>> {
            if width == 0 || w.len() != width * count {
                return Err(Error::artifact(
                    &weights_path,
                    format!("expected {count} rows of {width} values, found {} values", w.len()),
                ));
            }
            Ok(w.chunks(width).map(|c| DenseVector(c.to_vec())).collect())
        };
        let model = match meta.spec {
            ModelSpec::Knn { k } => {
                let vectors = rows(d, meta.knn_labels.len())?;
                if meta.knn_labels.iter().any(|&l| l >= meta.class_count) {
                    return Err(Error::artifact(&meta_path, "knn label outside class range"));
                }
                Classifier::Knn(KnnModel {
                    k,
                    class_count: meta.class_count,
                    vectors,
                    labels: meta.knn_labels,
                })
            }
            ModelSpec::Svm(p) => {
                let width = match p.kernel {
                    super::svm::Kernel::Linear => d + 1,
                    super::svm::Kernel::Rbf => p.features + 1,
                };
                Classifier::Svm(SvmModel::from_parts(d, p, rows(width, meta.class_count)?)?)
            }
            ModelSpec::Mlp(p) => {
                let mut m = MlpModel::from_flat_weights(d, meta.class_count, p, &w)
                    .map_err(|e| Error::artifact(&weights_path, e.to_string()))?;
                m.loss_trace = meta.loss_trace;
                Classifier::Mlp(m)
            }
        };
        Ok(model)
    }
}
