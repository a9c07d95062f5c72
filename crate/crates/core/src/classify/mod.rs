//! Supervised prediction of cluster labels.

mod dataset;
mod grid;
mod knn;
mod mlp;
mod model;
mod svm;

pub use dataset::{accuracy, split, LabeledDataset, SplitSpec};
pub use grid::{grid_search, GridCell, GridSearchResult};
pub use knn::KnnModel;
pub use mlp::{softmax_rows, MlpGradient, MlpModel, MlpParams};
pub use model::{fit_model, Classifier, ModelFamily, ModelSpec};
pub use svm::{Kernel, SvmModel, SvmParams};
