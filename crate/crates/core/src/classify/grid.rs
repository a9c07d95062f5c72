use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{accuracy, LabeledDataset};
use super::model::{fit_model, ModelSpec};
use crate::error::{Error, Result};

/// Cross-validation outcome for one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub spec: ModelSpec,
    /// Mean held-out accuracy over folds; `None` when a fit failed.
    pub accuracy: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub best: ModelSpec,
    pub best_accuracy: f64,
    pub table: Vec<GridCell>,
}

/// Seeded stratified k-fold assignment: classes are dealt round-robin
/// across folds after a shuffle.
fn fold_assignment(train: &LabeledDataset, folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..train.len()).collect();
    idx.shuffle(&mut rng);
    idx.sort_by_key(|&i| train.labels()[i]);
    let mut fold = vec![0; train.len()];
    for (pos, &i) in idx.iter().enumerate() {
        fold[i] = pos % folds;
    }
    fold
}

fn cross_validate(train: &LabeledDataset, spec: &ModelSpec, fold: &[usize], folds: usize) -> Result<f64> {
    let mut total = 0.0;
    for f in 0..folds {
        let (tr, te): (Vec<usize>, Vec<usize>) = (0..train.len()).partition(|&i| fold[i] != f);
        let tr = train.subset(&tr)?;
        let te = train.subset(&te)?;
        let model = fit_model(&tr, spec)?;
        let pred = model.predict_all(te.vectors())?;
        total += accuracy(&pred, te.labels())?;
    }
    Ok(total / folds as f64)
}

/// Mean k-fold accuracy for every grid point. The best point is the first
/// one reaching the maximum; fit failures are recorded in the table.
pub fn grid_search(train: &LabeledDataset, grid: &[ModelSpec], folds: usize, seed: u64) -> Result<GridSearchResult> {
    if folds < 2 {
        return Err(Error::param("folds", "must be at least 2"));
    }
    if folds > train.len() {
        return Err(Error::param("folds", "exceeds the number of training points"));
    }
    if grid.is_empty() {
        return Err(Error::param("grid", "must contain at least one point"));
    }
    let fold = fold_assignment(train, folds, seed);
    let table: Vec<GridCell> = grid
        .iter()
        .map(|spec| match cross_validate(train, spec, &fold, folds) {
            Ok(a) => GridCell {
                spec: *spec,
                accuracy: Some(a),
                error: None,
            },
            Err(e) => GridCell {
                spec: *spec,
                accuracy: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let mut best: Option<(usize, f64)> = None;
    for (i, cell) in table.iter().enumerate() {
        if let Some(a) = cell.accuracy {
            if best.is_none_or(|(_, b)| a > b) {
                best = Some((i, a));
            }
        }
    }
    let (i, best_accuracy) = best.ok_or_else(|| Error::param("grid", "every grid point failed to fit"))?;
    Ok(GridSearchResult {
        best: table[i].spec,
        best_accuracy,
        table,
    })
}

#[cfg(test)]
mod tests {
    use super::super::svm::{Kernel, SvmParams};
    use super::*;
    use crate::vector::DenseVector;

    fn rings(n: usize) -> LabeledDataset {
        // Class 0 inside radius 1, class 1 on a ring of radius 3.
        let mut v = Vec::new();
        let mut l = Vec::new();
        for i in 0..n {
            let t = i as f64 * 2.399963;
            let (r, c) = if i % 2 == 0 { (0.5 + 0.4 * ((i * 7) % 10) as f64 / 10.0, 0) } else { (3.0, 1) };
            v.push(DenseVector(vec![r * t.cos(), r * t.sin()]));
            l.push(c);
        }
        LabeledDataset::new(v, l, 2).unwrap()
    }

    #[test]
    fn single_point_grid() {
        let d = rings(40);
        let r = grid_search(&d, &[ModelSpec::Knn { k: 3 }], 4, 0).unwrap();
        assert_eq!(r.best, ModelSpec::Knn { k: 3 });
        assert_eq!(r.table.len(), 1);
    }

    #[test]
    fn knn_k_scan() {
        let d = rings(120);
        let grid: Vec<ModelSpec> = (3..=49).step_by(2).map(|k| ModelSpec::Knn { k }).collect();
        let r = grid_search(&d, &grid, 3, 1).unwrap();
        assert_eq!(r.table.len(), 24);
        assert!(r.table.iter().all(|c| c.accuracy.is_some()));
    }

    #[test]
    fn selects_rbf_when_only_rbf_separates() {
        let d = rings(80);
        let base = SvmParams { c: 10.0, epochs: 50, seed: 3, ..Default::default() };
        let grid = [
            ModelSpec::Svm(base),
            ModelSpec::Svm(SvmParams { kernel: Kernel::Rbf, gamma: 0.5, ..base }),
        ];
        let r = grid_search(&d, &grid, 4, 2).unwrap();
        assert_eq!(r.best, grid[1], "{:?}", r.table);
    }

    #[test]
    fn ties_go_to_first() {
        let d = rings(20);
        let grid = [ModelSpec::Knn { k: 1 }, ModelSpec::Knn { k: 1 }];
        let r = grid_search(&d, &grid, 2, 0).unwrap();
        assert_eq!(r.best, grid[0]);
        assert_eq!(r.table[0].accuracy, r.table[1].accuracy);
    }

    #[test]
    fn failures_are_recorded() {
        let d = rings(20);
        let grid = [ModelSpec::Knn { k: 0 }, ModelSpec::Knn { k: 1 }];
        let r = grid_search(&d, &grid, 2, 0).unwrap();
        assert!(r.table[0].error.is_some());
        assert_eq!(r.best, grid[1]);
        assert!(grid_search(&d, &grid, 1, 0).is_err());
        assert!(grid_search(&d, &[], 2, 0).is_err());
    }
}
