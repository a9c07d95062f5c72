use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use super::uniform_dim;
use crate::error::{Error, Result};
use crate::linalg::{randomized_svd, RsvdParams};
use crate::vector::DenseVector;

/// Project points onto their top two principal components (centred).
pub fn pca_2d(x: &[DenseVector], seed: u64) -> Result<Vec<(f64, f64)>> {
    let d = uniform_dim(x)?;
    let n = x.len();
    if n < 2 || d < 2 {
        return Err(Error::param("points", "need at least 2 points in at least 2 dimensions"));
    }
    let mut mean = vec![0.0; d];
    for p in x {
        for (m, v) in mean.iter_mut().zip(&p.0) {
            *m += v / n as f64;
        }
    }
    let centred = DMatrix::from_fn(n, d, |i, j| x[i].0[j] - mean[j]);
    if centred.norm_squared() == 0.0 {
        return Ok(vec![(0.0, 0.0); n]);
    }
    let svd = randomized_svd(
        &centred,
        RsvdParams {
            rank: 2,
            oversample: 10,
            power_iters: 4,
            seed,
        },
    )?;
    let scores = &svd.u * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(svd.singular_values));
    Ok((0..n).map(|i| (scores[(i, 0)], scores[(i, 1)])).collect())
}

/// `x,y,label` CSV.
pub fn write_projection_csv(path: &Path, coords: &[(f64, f64)], labels: &[i32]) -> Result<()> {
    let mut text = Vec::new();
    writeln!(text, "x,y,label").unwrap();
    for ((x, y), l) in coords.iter().zip(labels) {
        writeln!(text, "{x},{y},{l}").unwrap();
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
