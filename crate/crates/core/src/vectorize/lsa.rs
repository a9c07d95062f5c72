use std::path::Path;

use log::debug;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::tfidf::{tfidf_vector, TfidfFit, Vocabulary};
use crate::artifact::{self, Shape};
use crate::error::{Error, Result};
use crate::fingerprint::Hasher;
use crate::linalg::{randomized_svd, LinearOperator, RsvdParams, SparseMatrix};
use crate::textprep::TokenizedDocument;
use crate::vector::{DenseVector, SparseVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LsaParams {
    /// Target dimension; the maximum dimension when `variance_target` is set.
    pub r: usize,
    pub oversample: usize,
    pub power_iters: usize,
    pub seed: u64,
    /// Keep the smallest dimension whose cumulative explained variance
    /// reaches this fraction.
    #[serde(default)]
    pub variance_target: Option<f64>,
}

impl Default for LsaParams {
    fn default() -> Self {
        LsaParams {
            r: 100,
            oversample: 10,
            power_iters: 4,
            seed: 0,
            variance_target: None,
        }
    }
}

/// Truncated SVD basis of a document-term matrix.
#[derive(Debug, Clone)]
pub struct LsaBasis {
    /// `V x r`, orthonormal columns.
    pub basis: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
    /// Projections of the training rows.
    pub doc_vectors: Vec<DenseVector>,
}

impl LsaBasis {
    pub fn r(&self) -> usize {
        self.singular_values.len()
    }

    pub fn cumulative_explained_variance(&self) -> f64 {
        self.explained_variance_ratio.iter().sum()
    }

    pub fn project(&self, row: &SparseVector) -> DenseVector {
        project(&self.basis, row)
    }
}

fn project(basis: &DMatrix<f64>, row: &SparseVector) -> DenseVector {
    let r = basis.ncols();
    let mut out = vec![0.0; r];
    for &(j, w) in &row.entries {
        for (c, o) in out.iter_mut().enumerate() {
            *o += w * basis[(j, c)];
        }
    }
    DenseVector(out)
}

/// Rank-r LSA of an arbitrary sparse matrix (rows are documents).
pub fn fit_lsa_matrix(matrix: &SparseMatrix, params: &LsaParams) -> Result<LsaBasis> {
    if let Some(t) = params.variance_target {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::param("variance_target", "must lie in (0, 1]"));
        }
    }
    let svd = randomized_svd(
        matrix,
        RsvdParams {
            rank: params.r,
            oversample: params.oversample,
            power_iters: params.power_iters,
            seed: params.seed,
        },
    )?;
    let mut explained: Vec<f64> = svd
        .singular_values
        .iter()
        .map(|s| s * s / svd.total_sum_squares)
        .collect();
    let mut basis = svd.v;
    let mut singular_values = svd.singular_values;
    if let Some(target) = params.variance_target {
        let mut acc = 0.0;
        let keep = explained
            .iter()
            .position(|e| {
                acc += e;
                acc >= target
            })
            .map_or(explained.len(), |i| i + 1);
        explained.truncate(keep);
        singular_values.truncate(keep);
        basis = basis.columns(0, keep).clone_owned();
    }
    let doc_vectors = matrix.rows().iter().map(|row| project(&basis, row)).collect();
    debug!(
        "lsa: {}x{} -> r={} explaining {:.4}",
        matrix.nrows(),
        matrix.ncols(),
        singular_values.len(),
        explained.iter().sum::<f64>()
    );
    Ok(LsaBasis {
        basis,
        singular_values,
        explained_variance_ratio: explained,
        doc_vectors,
    })
}

/// Fitted TF-IDF + LSA model.
#[derive(Debug, Clone)]
pub struct LsaModel {
    pub vocabulary: Vocabulary,
    pub idf: Vec<f64>,
    pub lsa: LsaBasis,
    pub params: LsaParams,
}

#[derive(Debug, Serialize, Deserialize)]
struct LsaMeta {
    seed: u64,
    oversample: usize,
    power_iters: usize,
    r_requested: usize,
    variance_target: Option<f64>,
    corpus_size: usize,
    singular_values: Vec<f64>,
    explained_variance_ratio: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct BasisShape {
    rows: usize,
    cols: usize,
    r: usize,
}

impl LsaModel {
    pub fn r(&self) -> usize {
        self.lsa.r()
    }

    /// Training-document vectors, in input order.
    pub fn doc_vectors(&self) -> &[DenseVector] {
        &self.lsa.doc_vectors
    }

    pub fn fingerprint(&self) -> String {
        let mut h = Hasher::new();
        h.f64s("idf", &self.idf)
            .f64s("basis", self.lsa.basis.as_slice())
            .f64s("sigma", &self.lsa.singular_values);
        for i in 0..self.vocabulary.len() {
            h.part("term", self.vocabulary.term(i).as_bytes());
        }
        h.finish()
    }

    /// Write the model directory: `vocabulary.jsonl`, `idf.f64le`,
    /// `basis.f64le` (row-major `V x r`), `shape.json`, `meta.json`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        artifact::create_dir(dir)?;
        self.vocabulary.save_jsonl(&dir.join("vocabulary.jsonl"))?;
        artifact::write_f64le(&dir.join("idf.f64le"), &self.idf)?;
        let (rows, cols) = self.lsa.basis.shape();
        let row_major: Vec<f64> = self.lsa.basis.transpose().as_slice().to_vec();
        artifact::write_f64le(&dir.join("basis.f64le"), &row_major)?;
        artifact::write_json(&dir.join("shape.json"), &BasisShape { rows, cols, r: cols })?;
        artifact::write_json(
            &dir.join("meta.json"),
            &LsaMeta {
                seed: self.params.seed,
                oversample: self.params.oversample,
                power_iters: self.params.power_iters,
                r_requested: self.params.r,
                variance_target: self.params.variance_target,
                corpus_size: self.vocabulary.corpus_size(),
                singular_values: self.lsa.singular_values.clone(),
                explained_variance_ratio: self.lsa.explained_variance_ratio.clone(),
            },
        )
    }

    /// Load a saved model. Training-document vectors are not part of the
    /// model directory and come back empty.
    pub fn load(dir: &Path) -> Result<Self> {
        let meta: LsaMeta = artifact::read_json(&dir.join("meta.json"))?;
        let shape: BasisShape = artifact::read_json(&dir.join("shape.json"))?;
        let vocabulary = Vocabulary::load_jsonl(&dir.join("vocabulary.jsonl"), meta.corpus_size)?;
        let idf_path = dir.join("idf.f64le");
        let idf = artifact::read_f64le(&idf_path)?;
        if idf.len() != vocabulary.len() || shape.rows != vocabulary.len() {
            return Err(Error::artifact(dir, "vocabulary, idf and basis sizes disagree"));
        }
        if shape.cols != shape.r || meta.singular_values.len() != shape.r {
            return Err(Error::artifact(dir, "basis width disagrees with r"));
        }
        let values = artifact::read_matrix(
            &dir.join("basis.f64le"),
            Shape {
                rows: shape.rows,
                cols: shape.cols,
            },
        )?;
        let basis = DMatrix::from_row_slice(shape.rows, shape.cols, &values);
        Ok(LsaModel {
            vocabulary,
            idf,
            lsa: LsaBasis {
                basis,
                singular_values: meta.singular_values,
                explained_variance_ratio: meta.explained_variance_ratio,
                doc_vectors: Vec::new(),
            },
            params: LsaParams {
                r: meta.r_requested,
                oversample: meta.oversample,
                power_iters: meta.power_iters,
                seed: meta.seed,
                variance_target: meta.variance_target,
            },
        })
    }
}

/// LSA over a fitted TF-IDF matrix.
pub fn fit_lsa(tfidf: &TfidfFit, params: &LsaParams) -> Result<LsaModel> {
    let matrix = SparseMatrix::new(tfidf.vocabulary.len(), tfidf.vectors.clone())?;
    let lsa = fit_lsa_matrix(&matrix, params)?;
    Ok(LsaModel {
        vocabulary: tfidf.vocabulary.clone(),
        idf: tfidf.idf.clone(),
        lsa,
        params: *params,
    })
}

/// Project a new document into LSA space. A document with no in-vocabulary
/// terms is an error, never a zero vector.
pub fn lsa_transform(model: &LsaModel, doc: &TokenizedDocument) -> Result<DenseVector> {
    let (row, oov) = tfidf_vector(&model.vocabulary, &model.idf, &doc.tokens);
    if oov > 0 {
        debug!("lsa_transform: dropped {oov} out-of-vocabulary token(s)");
    }
    if row.nnz() == 0 {
        return Err(Error::OutOfVocabulary);
    }
    Ok(model.lsa.project(&row))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectorize::fit_tfidf;

    fn doc(text: &str) -> TokenizedDocument {
        TokenizedDocument {
            source_id: String::new(),
            tokens: text.split_whitespace().map(String::from).collect(),
            pipeline_fingerprint: String::new(),
        }
    }

    fn params(r: usize) -> LsaParams {
        LsaParams {
            r,
            oversample: 10,
            power_iters: 4,
            seed: 3,
            variance_target: None,
        }
    }

    fn small_corpus() -> Vec<TokenizedDocument> {
        [
            "court held statute void",
            "court statute appeal",
            "tax income deduction",
            "tax income revenue court",
            "speech press assembly",
            "press speech court",
        ]
        .iter()
        .map(|t| doc(t))
        .collect()
    }

    #[test]
    fn diagonal_explained_variance() {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![4.0, 3.0, 2.0, 1.0]));
        let fit = fit_lsa_matrix(&SparseMatrix::from_dense(&d), &params(2)).unwrap();
        assert!((fit.singular_values[0] - 4.0).abs() < 1e-12);
        assert!((fit.singular_values[1] - 3.0).abs() < 1e-12);
        assert!((fit.explained_variance_ratio[0] - 16.0 / 30.0).abs() < 1e-12);
        assert!((fit.explained_variance_ratio[1] - 9.0 / 30.0).abs() < 1e-12);
    }

    #[test]
    fn transform_reproduces_training_rows() {
        let docs = small_corpus();
        let tfidf = fit_tfidf(&docs).unwrap();
        let model = fit_lsa(&tfidf, &params(3)).unwrap();
        for (d, v) in docs.iter().zip(model.doc_vectors()) {
            let t = lsa_transform(&model, d).unwrap();
            for (a, b) in t.0.iter().zip(&v.0) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        let again = lsa_transform(&model, &docs[0]).unwrap();
        assert_eq!(again, lsa_transform(&model, &docs[0]).unwrap());
    }

    #[test]
    fn oov_document_is_error() {
        let tfidf = fit_tfidf(&small_corpus()).unwrap();
        let model = fit_lsa(&tfidf, &params(2)).unwrap();
        assert!(matches!(
            lsa_transform(&model, &doc("zebra quokka")),
            Err(Error::OutOfVocabulary)
        ));
        // Partially known documents just drop the unknown terms.
        assert!(lsa_transform(&model, &doc("zebra tax")).is_ok());
    }

    #[test]
    fn full_rank_variance_sums_to_one() {
        let tfidf = fit_tfidf(&small_corpus()).unwrap();
        let model = fit_lsa(&tfidf, &params(6)).unwrap();
        assert!((model.lsa.cumulative_explained_variance() - 1.0).abs() < 1e-9);
        let ev = &model.lsa.explained_variance_ratio;
        assert!(ev.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn variance_target_truncates() {
        let tfidf = fit_tfidf(&small_corpus()).unwrap();
        let full = fit_lsa(&tfidf, &params(6)).unwrap();
        let mut p = params(6);
        p.variance_target = Some(0.5);
        let cut = fit_lsa(&tfidf, &p).unwrap();
        let cum: Vec<f64> = full
            .lsa
            .explained_variance_ratio
            .iter()
            .scan(0.0, |acc, e| {
                *acc += e;
                Some(*acc)
            })
            .collect();
        let expected = cum.iter().position(|&c| c >= 0.5).unwrap() + 1;
        assert_eq!(cut.r(), expected);
        assert!(cut.lsa.cumulative_explained_variance() >= 0.5);
    }

    #[test]
    fn save_load_round_trip() {
        let docs = small_corpus();
        let tfidf = fit_tfidf(&docs).unwrap();
        let model = fit_lsa(&tfidf, &params(3)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        model.save(dir.path()).unwrap();
        let back = LsaModel::load(dir.path()).unwrap();
        assert_eq!(back.fingerprint(), model.fingerprint());
        assert_eq!(
            lsa_transform(&back, &docs[2]).unwrap(),
            lsa_transform(&model, &docs[2]).unwrap()
        );
    }
}
