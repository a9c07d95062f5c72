//! Randomized truncated SVD over sparse or dense operators.
//!
//! Range finding with a seeded Gaussian test matrix, a few rounds of subspace
//! iteration with re-orthonormalization, then an exact SVD of the small
//! projected matrix.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::vector::SparseVector;

/// Anything that can multiply a dense block from the right, and whose
/// transpose can.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `A * x`, with `x` of shape `ncols x l`.
    fn mul_dense(&self, x: &DMatrix<f64>) -> DMatrix<f64>;
    /// `A^T * y`, with `y` of shape `nrows x l`.
    fn tmul_dense(&self, y: &DMatrix<f64>) -> DMatrix<f64>;
    fn frobenius_sq(&self) -> f64;
}

/// Row-compressed sparse matrix built from document vectors.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    ncols: usize,
    rows: Vec<SparseVector>,
}

impl SparseMatrix {
    pub fn new(ncols: usize, rows: Vec<SparseVector>) -> Result<Self> {
        for (i, r) in rows.iter().enumerate() {
            if r.dimension != ncols {
                return Err(Error::DimensionMismatch {
                    context: format!("sparse row {i}"),
                    expected: ncols,
                    actual: r.dimension,
                });
            }
        }
        Ok(SparseMatrix { ncols, rows })
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let rows = (0..m.nrows())
            .map(|i| {
                SparseVector::from_unsorted(
                    m.ncols(),
                    (0..m.ncols()).map(|j| (j, m[(i, j)])).collect(),
                )
            })
            .collect();
        SparseMatrix {
            ncols: m.ncols(),
            rows,
        }
    }

    pub fn rows(&self) -> &[SparseVector] {
        &self.rows
    }
}

impl LinearOperator for SparseMatrix {
    fn nrows(&self) -> usize {
        self.rows.len()
    }

    fn ncols(&self) -> usize {
        self.ncols
    }

    fn mul_dense(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let l = x.ncols();
        let mut out = DMatrix::zeros(self.rows.len(), l);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, w) in &row.entries {
                for c in 0..l {
                    out[(i, c)] += w * x[(j, c)];
                }
            }
        }
        out
    }

    fn tmul_dense(&self, y: &DMatrix<f64>) -> DMatrix<f64> {
        let l = y.ncols();
        let mut out = DMatrix::zeros(self.ncols, l);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, w) in &row.entries {
                for c in 0..l {
                    out[(j, c)] += w * y[(i, c)];
                }
            }
        }
        out
    }

    fn frobenius_sq(&self) -> f64 {
        self.rows
            .iter()
            .flat_map(|r| r.entries.iter())
            .map(|(_, w)| w * w)
            .sum()
    }
}

impl LinearOperator for DMatrix<f64> {
    fn nrows(&self) -> usize {
        self.nrows()
    }

    fn ncols(&self) -> usize {
        self.ncols()
    }

    fn mul_dense(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self * x
    }

    fn tmul_dense(&self, y: &DMatrix<f64>) -> DMatrix<f64> {
        self.tr_mul(y)
    }

    fn frobenius_sq(&self) -> f64 {
        self.norm_squared()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RsvdParams {
    pub rank: usize,
    pub oversample: usize,
    pub power_iters: usize,
    pub seed: u64,
}

/// Rank-`r` factorization `A ~ U diag(s) V^T`.
#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    /// `nrows x r`
    pub u: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    /// `ncols x r`, orthonormal columns.
    pub v: DMatrix<f64>,
    /// Squared Frobenius norm of the input.
    pub total_sum_squares: f64,
}

fn orthonormalize(m: DMatrix<f64>) -> DMatrix<f64> {
    m.qr().q()
}

pub fn randomized_svd<A: LinearOperator + ?Sized>(a: &A, params: RsvdParams) -> Result<TruncatedSvd> {
    let (m, n) = (a.nrows(), a.ncols());
    let max_rank = m.min(n);
    let r = params.rank;
    if r == 0 || r > max_rank {
        return Err(Error::param(
            "r",
            format!("must satisfy 1 <= r <= min(N, V) = {max_rank}, got {r}"),
        ));
    }
    let total = a.frobenius_sq();
    if total == 0.0 {
        return Err(Error::DegenerateMatrix);
    }
    if !total.is_finite() {
        return Err(Error::NonFinite("matrix entries".into()));
    }
    let l = (r + params.oversample).min(max_rank);

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let omega = DMatrix::from_fn(n, l, |_, _| StandardNormal.sample(&mut rng));
    let mut q = orthonormalize(a.mul_dense(&omega));
    for _ in 0..params.power_iters {
        let z = orthonormalize(a.tmul_dense(&q));
        q = orthonormalize(a.mul_dense(&z));
    }

    // B = Q^T A is l x n; factor its transpose, which is tall.
    let bt = a.tmul_dense(&q);
    let svd = bt.svd(true, true);
    let w = svd.u.expect("requested U");
    let ut = svd.v_t.expect("requested V^T");
    let sigma = svd.singular_values;

    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]).then(i.cmp(&j)));
    order.truncate(r);

    let mut u = DMatrix::zeros(m, r);
    let mut v = DMatrix::zeros(n, r);
    let mut singular_values = Vec::with_capacity(r);
    for (c, &k) in order.iter().enumerate() {
        let mut vcol = w.column(k).clone_owned();
        // Columns of U = Q * (columns of V_B^T transposed).
        let mut ucol = &q * ut.row(k).transpose();
        let pivot = vcol
            .iter()
            .copied()
            .fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
        if pivot < 0.0 {
            vcol.neg_mut();
            ucol.neg_mut();
        }
        v.set_column(c, &vcol);
        u.set_column(c, &ucol);
        singular_values.push(sigma[k]);
    }
    Ok(TruncatedSvd {
        u,
        singular_values,
        v,
        total_sum_squares: total,
    })
}
