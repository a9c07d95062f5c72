//! The pipeline stages and the bookkeeping that decides whether one may run.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use citegraph_core::artifact::{self, Shape};
use citegraph_core::classify::{
    accuracy, fit_model, grid_search, split, GridSearchResult, Kernel, LabeledDataset, MlpParams, ModelFamily,
    ModelSpec, SplitSpec, SvmParams,
};
use citegraph_core::cluster::{
    dbscan_fit, k_distance_curve, kmeans_fit, pca_2d, scan_k_both, write_projection_csv, ClusterAlgorithm,
    ClusterModel, KMeansParams,
};
use citegraph_core::corpus::{
    corpus_stats, drop_short_descriptions, filter_by_min_year, load_corpus, Corpus, CorpusFormat,
};
use citegraph_core::fingerprint;
use citegraph_core::retrieve::{build_index, RetrievalIndex};
use citegraph_core::textprep::{Pipeline, PipelineConfig, TokenizedDocument};
use citegraph_core::vector::DenseVector;
use citegraph_core::vectorize::{fit_lsa, fit_tfidf, load_embeddings, EmbeddingProvider, LsaModel, LsaParams, LsaProvider};
use citegraph_service::remote::RemoteProvider;
use log::{info, warn};
use serde::Serialize;
use serde_json::json;

use crate::config::{ClassifyConfig, Config, VectorizerKind};
use crate::error::CliError;
use crate::lock::DirLock;
use crate::manifest::{file_fingerprint, hash_tree, tree_fingerprint, Manifest, StageRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Ingest,
    Preprocess,
    Vectorize,
    Cluster,
    Train,
    Evaluate,
}

impl Stage {
    pub const PIPELINE: [Stage; 6] = [
        Stage::Ingest,
        Stage::Preprocess,
        Stage::Vectorize,
        Stage::Cluster,
        Stage::Train,
        Stage::Evaluate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Preprocess => "preprocess",
            Stage::Vectorize => "vectorize",
            Stage::Cluster => "cluster",
            Stage::Train => "train",
            Stage::Evaluate => "evaluate",
        }
    }

    pub fn deps(self) -> &'static [Stage] {
        match self {
            Stage::Ingest => &[],
            Stage::Preprocess => &[Stage::Ingest],
            Stage::Vectorize => &[Stage::Preprocess],
            Stage::Cluster => &[Stage::Vectorize],
            Stage::Train => &[Stage::Ingest, Stage::Vectorize, Stage::Cluster],
            Stage::Evaluate => &[Stage::Vectorize, Stage::Cluster],
        }
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    /// The stage ran; carries its output fingerprint.
    Ran(String),
    UpToDate,
}

/// Seed for one randomized step, derived from the master seed.
pub fn derive_seed(master: u64, purpose: &str) -> u64 {
    let mut h = fingerprint::Hasher::new();
    h.part("seed", &master.to_le_bytes()).part("purpose", purpose.as_bytes());
    u64::from_str_radix(&h.finish()[..16], 16).expect("hex digest")
}

pub fn stage_dir(config: &Config, stage: Stage) -> PathBuf {
    config.artifacts.join(stage.name())
}

pub fn pipeline_config(config: &Config) -> Result<PipelineConfig, CliError> {
    let t = &config.textprep;
    let mut pc = PipelineConfig {
        expand_contractions: t.expand_contractions,
        numbers_to_words: t.numbers_to_words,
        preserve_section_refs: t.preserve_section_refs,
        lemmatize: t.lemmatize,
        ..PipelineConfig::default()
    };
    if let Some(p) = &t.stopwords {
        pc.load_stopwords(p)
            .map_err(|e| CliError::Config(format!("field `textprep.stopwords`: {e}")))?;
    }
    if let Some(p) = &t.contractions {
        pc.load_contractions(p)
            .map_err(|e| CliError::Config(format!("field `textprep.contractions`: {e}")))?;
    }
    Ok(pc)
}

/// Everything that determines a stage's output besides its upstream
/// artifacts.
fn settings(config: &Config, stage: Stage) -> Result<serde_json::Value, CliError> {
    let s = config.seed;
    Ok(match stage {
        Stage::Ingest => json!({ "corpus": config.corpus }),
        Stage::Preprocess => json!({
            "textprep": config.textprep,
            "pipeline_fingerprint": pipeline_config(config)?.fingerprint(),
        }),
        Stage::Vectorize => json!({
            "vectorize": config.vectorize,
            "lsa_seed": derive_seed(s, "lsa"),
        }),
        Stage::Cluster => json!({
            "cluster": config.cluster,
            "vectorizer": config.vectorize.method,
            "cluster_seed": derive_seed(s, "cluster"),
            "pca_seed": derive_seed(s, "pca"),
        }),
        Stage::Train => json!({
            "classify": config.classify,
            "vectorizer": config.vectorize.method,
            "textprep": config.textprep,
            "embedding_tag": config.vectorize.embedding_tag,
            "split_seed": derive_seed(s, "split"),
            "grid_seed": derive_seed(s, "grid"),
            "model_seed": derive_seed(s, "model"),
        }),
        Stage::Evaluate => json!({
            "classify": config.classify,
            "cluster": config.cluster,
            "evaluate": config.evaluate,
            "vectorizer": config.vectorize.method,
            "cluster_seed": derive_seed(s, "cluster"),
            "split_seed": derive_seed(s, "split"),
            "grid_seed": derive_seed(s, "grid"),
            "model_seed": derive_seed(s, "model"),
        }),
    })
}

fn external_inputs(config: &Config, stage: Stage) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    match stage {
        Stage::Ingest => {
            let p = &config.corpus.path;
            let fp = file_fingerprint(p).map_err(|e| CliError::Config(format!("field `corpus.path`: {e}")))?;
            out.insert("file:corpus".into(), fp);
        }
        Stage::Vectorize => {
            if let Some(p) = &config.vectorize.embeddings {
                let fp = file_fingerprint(p)
                    .map_err(|e| CliError::Config(format!("field `vectorize.embeddings`: {e}")))?;
                out.insert("file:embeddings".into(), fp);
            }
        }
        _ => {}
    }
    Ok(out)
}

fn current_inputs(manifest: &Manifest, config: &Config, stage: Stage) -> Result<BTreeMap<String, String>, CliError> {
    let mut inputs = external_inputs(config, stage)?;
    for &d in stage.deps() {
        let rec = manifest.stages.get(d.name()).ok_or_else(|| CliError::MissingUpstream {
            stage: stage.name().into(),
            upstream: d.name().into(),
        })?;
        inputs.insert(d.name().into(), rec.fingerprint.clone());
    }
    Ok(inputs)
}

/// Check that `stage` and everything it depends on is present, built with
/// the current settings, fed by the current upstream artifacts and
/// untouched on disk.
fn verify(
    manifest: &Manifest,
    config: &Config,
    stage: Stage,
    needed_by: Stage,
    seen: &mut BTreeSet<Stage>,
) -> Result<(), CliError> {
    if !seen.insert(stage) {
        return Ok(());
    }
    let rec = manifest.stages.get(stage.name()).ok_or_else(|| CliError::MissingUpstream {
        stage: needed_by.name().into(),
        upstream: stage.name().into(),
    })?;
    let name = stage.name();
    if rec.params != fingerprint::of_json(&settings(config, stage)?) {
        return Err(CliError::Stale(format!(
            "`{name}` ran with settings that differ from the current config; rerun `citegraph {name}`"
        )));
    }
    for &d in stage.deps() {
        verify(manifest, config, d, stage, seen)?;
    }
    if rec.inputs != current_inputs(manifest, config, stage)? {
        return Err(CliError::Stale(format!(
            "inputs of `{name}` changed after it ran; rerun `citegraph {name}`"
        )));
    }
    if tree_fingerprint(&hash_tree(&stage_dir(config, stage))?) != rec.fingerprint {
        return Err(CliError::Stale(format!(
            "artifacts of `{name}` were modified on disk (fingerprint mismatch); rerun `citegraph {name}`"
        )));
    }
    Ok(())
}

/// Check every upstream stage of `stage` without running anything.
pub fn verify_upstream(config: &Config, stage: Stage) -> Result<(), CliError> {
    let manifest = Manifest::load(&config.artifacts)?;
    let mut seen = BTreeSet::new();
    verify(&manifest, config, stage, stage, &mut seen)
}

/// Run one stage under the directory lock, or report that it is up to date.
pub fn run_stage(config: &Config, stage: Stage, force: bool) -> Result<Outcome, CliError> {
    let root = &config.artifacts;
    let _lock = DirLock::acquire(root, stage.name())?;
    let mut manifest = Manifest::load(root)?;
    let mut seen = BTreeSet::new();
    for &d in stage.deps() {
        verify(&manifest, config, d, stage, &mut seen)?;
    }
    let inputs = current_inputs(&manifest, config, stage)?;
    let settings = settings(config, stage)?;
    let params = fingerprint::of_json(&settings);
    let dir = stage_dir(config, stage);
    if !force {
        if let Some(rec) = manifest.stages.get(stage.name()) {
            if rec.params == params
                && rec.inputs == inputs
                && tree_fingerprint(&hash_tree(&dir)?) == rec.fingerprint
            {
                return Ok(Outcome::UpToDate);
            }
        }
    }

    if dir.exists() {
        std::fs::remove_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    }
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    info!("running {stage}");
    execute(config, stage, &dir)?;

    let outputs = hash_tree(&dir)?;
    let fp = tree_fingerprint(&outputs);
    manifest.config = serde_json::to_value(config).map_err(|e| CliError::Runtime(e.to_string()))?;
    manifest.stages.insert(
        stage.name().into(),
        StageRecord {
            params,
            settings,
            inputs,
            outputs,
            fingerprint: fp.clone(),
            completed_at: chrono::Utc::now().to_rfc3339(),
        },
    );
    manifest.save(root)?;
    Ok(Outcome::Ran(fp))
}

fn execute(config: &Config, stage: Stage, out: &Path) -> Result<(), CliError> {
    match stage {
        Stage::Ingest => ingest(config, out),
        Stage::Preprocess => preprocess(config, out),
        Stage::Vectorize => vectorize(config, out),
        Stage::Cluster => cluster(config, out),
        Stage::Train => train(config, out),
        Stage::Evaluate => evaluate(config, out),
    }
}

fn ingest(config: &Config, out: &Path) -> Result<(), CliError> {
    let c = &config.corpus;
    let format = c.format.unwrap_or_else(|| CorpusFormat::from_path(&c.path));
    let mut corpus = load_corpus(&c.path, format)?;
    if let Some(y) = c.min_year {
        corpus = filter_by_min_year(&corpus, y);
    }
    if c.min_tokens > 0 {
        corpus = drop_short_descriptions(&corpus, c.min_tokens)?;
    }
    if corpus.is_empty() {
        return Err(CliError::Runtime("no records left after filtering".into()));
    }
    corpus.save_jsonl(&out.join("records.jsonl"))?;
    artifact::write_json(&out.join("provenance.json"), corpus.provenance())?;
    artifact::write_json(&out.join("stats.json"), &corpus_stats(&corpus))?;
    info!("ingested {} records", corpus.len());
    Ok(())
}

fn load_records(config: &Config) -> Result<Corpus, CliError> {
    let p = stage_dir(config, Stage::Ingest).join("records.jsonl");
    Ok(load_corpus(&p, CorpusFormat::Jsonl)?)
}

fn preprocess(config: &Config, out: &Path) -> Result<(), CliError> {
    let corpus = load_records(config)?;
    let pipeline = Pipeline::new(pipeline_config(config)?);
    let path = out.join("tokens.jsonl");
    let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
    let mut w = BufWriter::new(file);
    for r in corpus.records() {
        let doc = pipeline.preprocess_doc(&r.id, &r.description);
        serde_json::to_writer(&mut w, &doc).map_err(|e| CliError::Runtime(e.to_string()))?;
        w.write_all(b"\n").map_err(|e| CliError::io(&path, e))?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    artifact::write_json(
        &out.join("pipeline.json"),
        &json!({ "fingerprint": pipeline.fingerprint(), "config": pipeline.config() }),
    )?;
    Ok(())
}

fn read_tokens(config: &Config) -> Result<Vec<TokenizedDocument>, CliError> {
    let path = stage_dir(config, Stage::Preprocess).join("tokens.jsonl");
    let file = File::open(&path).map_err(|e| CliError::io(&path, e))?;
    let mut docs = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::io(&path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let doc = serde_json::from_str(&line)
            .map_err(|e| CliError::Stale(format!("{} line {}: {e}", path.display(), i + 1)))?;
        docs.push(doc);
    }
    Ok(docs)
}

fn write_vectors(dir: &Path, vectors: &[DenseVector]) -> Result<(), CliError> {
    artifact::create_dir(dir)?;
    let shape = Shape {
        rows: vectors.len(),
        cols: vectors.first().map_or(0, DenseVector::dim),
    };
    let flat: Vec<f64> = vectors.iter().flat_map(|v| v.0.iter().copied()).collect();
    artifact::write_f64le(&dir.join("vectors.f64le"), &flat)?;
    artifact::write_json(&dir.join("vectors.shape.json"), &shape)?;
    Ok(())
}

fn vectors_dir(config: &Config, kind: VectorizerKind) -> PathBuf {
    stage_dir(config, Stage::Vectorize).join(kind.name())
}

/// Document vectors of one representation, parallel to the ingested records.
pub fn read_vectors(config: &Config, kind: VectorizerKind) -> Result<Vec<DenseVector>, CliError> {
    let dir = vectors_dir(config, kind);
    let shape_path = dir.join("vectors.shape.json");
    if !shape_path.exists() {
        return Err(match kind {
            VectorizerKind::Embedding => {
                CliError::Config("field `vectorize.embeddings`: no embedding vectors were built; set it and rerun `citegraph vectorize`".into())
            }
            VectorizerKind::TfidfLsa => CliError::Stale(format!("{} is missing; rerun `citegraph vectorize`", shape_path.display())),
        });
    }
    let shape: Shape = artifact::read_json(&shape_path)?;
    let flat = artifact::read_matrix(&dir.join("vectors.f64le"), shape)?;
    if shape.cols == 0 {
        return Ok(vec![DenseVector(Vec::new()); shape.rows]);
    }
    Ok(flat.chunks(shape.cols).map(|c| DenseVector(c.to_vec())).collect())
}

fn vectorize(config: &Config, out: &Path) -> Result<(), CliError> {
    let v = &config.vectorize;
    let docs = read_tokens(config)?;
    let tfidf = fit_tfidf(&docs)?;
    let params = LsaParams {
        r: v.r,
        oversample: v.oversample,
        power_iters: v.power_iters,
        seed: derive_seed(config.seed, "lsa"),
        variance_target: v.variance_target,
    };
    let lsa = fit_lsa(&tfidf, &params)?;
    let lsa_dir = out.join(VectorizerKind::TfidfLsa.name());
    lsa.save(&lsa_dir.join("model"))?;
    write_vectors(&lsa_dir, lsa.doc_vectors())?;
    info!(
        "tf-idf vocabulary {} terms, lsa r = {} (explained variance {:.4})",
        tfidf.vocabulary.len(),
        lsa.r(),
        lsa.lsa.cumulative_explained_variance()
    );

    let embeddings = match v.method {
        VectorizerKind::Embedding => Some(config.embeddings_for("vectorize.method = \"embedding\"")?),
        VectorizerKind::TfidfLsa => v.embeddings.as_deref(),
    };
    if let Some(path) = embeddings {
        let store = load_embeddings(path)?;
        let mut aligned = Vec::with_capacity(docs.len());
        for d in &docs {
            let e = store.get(&d.source_id).ok_or_else(|| {
                CliError::Runtime(format!("{}: no embedding for record `{}`", path.display(), d.source_id))
            })?;
            aligned.push(e.clone());
        }
        let dir = out.join(VectorizerKind::Embedding.name());
        write_vectors(&dir, &aligned)?;
        artifact::write_json(
            &dir.join("meta.json"),
            &json!({ "tag": v.embedding_tag, "dimension": store.dimension() }),
        )?;
    }
    let ids: Vec<&str> = docs.iter().map(|d| d.source_id.as_str()).collect();
    artifact::write_json(&out.join("ids.json"), &ids)?;
    Ok(())
}

fn kmeans_params(config: &Config, k: usize) -> KMeansParams {
    let c = &config.cluster;
    KMeansParams {
        k,
        seed: derive_seed(config.seed, "cluster"),
        max_iters: c.max_iters,
        tol: c.tol,
        restarts: c.restarts,
    }
}

fn fit_clusters(config: &Config, x: &[DenseVector]) -> Result<ClusterModel, CliError> {
    let c = &config.cluster;
    Ok(match c.algorithm {
        ClusterAlgorithm::Kmeans => kmeans_fit(x, &kmeans_params(config, c.k))?,
        ClusterAlgorithm::Dbscan => dbscan_fit(x, c.eps, c.min_pts)?,
    })
}

fn cluster(config: &Config, out: &Path) -> Result<(), CliError> {
    let c = &config.cluster;
    let x = read_vectors(config, config.vectorize.method)?;
    let model = fit_clusters(config, &x)?;
    model.save(&out.join("model"))?;
    info!("{} clusters, sizes {:?}, {} noise", model.k, model.cluster_sizes(), model.noise_count());

    let k_max = c.scan_k_max.min(x.len());
    if c.scan_k_min <= k_max {
        let (wcss, sil) = scan_k_both(&x, c.scan_k_min, k_max, &kmeans_params(config, c.k), c.silhouette_cap)?;
        wcss.write_csv(&out.join("scan_wcss.csv"))?;
        sil.write_csv(&out.join("scan_silhouette.csv"))?;
    } else {
        warn!("skipping the k scan: only {} documents", x.len());
    }
    if c.algorithm == ClusterAlgorithm::Dbscan && c.min_pts < x.len() {
        let curve = k_distance_curve(&x, c.min_pts)?;
        let mut text = String::from("rank,distance\n");
        for (i, d) in curve.iter().enumerate() {
            writeln!(text, "{i},{d}").unwrap();
        }
        let p = out.join("k_distance.csv");
        std::fs::write(&p, text).map_err(|e| CliError::io(&p, e))?;
    }
    if x.len() >= 2 && x.first().is_some_and(|v| v.dim() >= 2) {
        let coords = pca_2d(&x, derive_seed(config.seed, "pca"))?;
        write_projection_csv(&out.join("projection.csv"), &coords, &model.labels)?;
    }
    Ok(())
}

fn load_clusters(config: &Config) -> Result<ClusterModel, CliError> {
    Ok(ClusterModel::load(&stage_dir(config, Stage::Cluster).join("model"))?)
}

/// Hyperparameter candidates for one family, in declaration order.
pub fn model_grid(family: ModelFamily, c: &ClassifyConfig, seed: u64) -> Vec<ModelSpec> {
    match family {
        ModelFamily::Knn => c.knn_k.iter().map(|&k| ModelSpec::Knn { k }).collect(),
        ModelFamily::Svm => {
            let mut grid = Vec::new();
            for &kernel in &c.svm_kernels {
                for &cv in &c.svm_c {
                    let base = SvmParams {
                        c: cv,
                        kernel,
                        epochs: c.svm_epochs,
                        features: c.svm_features,
                        seed,
                        ..SvmParams::default()
                    };
                    match kernel {
                        Kernel::Linear => grid.push(ModelSpec::Svm(base)),
                        Kernel::Rbf => {
                            for &gamma in &c.svm_gamma {
                                grid.push(ModelSpec::Svm(SvmParams { gamma, ..base }));
                            }
                        }
                    }
                }
            }
            grid
        }
        ModelFamily::Mlp => vec![ModelSpec::Mlp(MlpParams {
            hidden: c.mlp_hidden,
            epochs: c.mlp_epochs,
            learning_rate: c.mlp_learning_rate,
            batch_size: c.mlp_batch_size,
            seed,
        })],
    }
}

/// Pick hyperparameters by cross-validation on `train` (skipped for a
/// single candidate).
fn select(
    family: ModelFamily,
    train: &LabeledDataset,
    config: &Config,
) -> Result<(ModelSpec, Option<GridSearchResult>), CliError> {
    let grid = model_grid(family, &config.classify, derive_seed(config.seed, "model"));
    if grid.len() == 1 {
        return Ok((grid[0], None));
    }
    let folds = config.classify.folds.min(train.len());
    let res = grid_search(train, &grid, folds, derive_seed(config.seed, "grid"))?;
    Ok((res.best, Some(res)))
}

fn split_spec(config: &Config) -> SplitSpec {
    SplitSpec {
        train_fraction: config.classify.train_fraction,
        seed: derive_seed(config.seed, "split"),
        stratified: config.classify.stratified,
    }
}

#[derive(Serialize)]
struct FitReport {
    family: ModelFamily,
    spec: ModelSpec,
    test_accuracy: f64,
    train_size: usize,
    test_size: usize,
    selection: Option<GridSearchResult>,
}

fn fit_and_score(
    family: ModelFamily,
    train: &LabeledDataset,
    test: &LabeledDataset,
    config: &Config,
) -> Result<(citegraph_core::classify::Classifier, FitReport), CliError> {
    let (spec, selection) = select(family, train, config)?;
    let model = fit_model(train, &spec)?;
    let test_accuracy = accuracy(&model.predict_all(test.vectors())?, test.labels())?;
    Ok((
        model,
        FitReport {
            family,
            spec,
            test_accuracy,
            train_size: train.len(),
            test_size: test.len(),
            selection,
        },
    ))
}

/// Query-side embedder for an index built from precomputed embeddings.
/// Without an endpoint it can still load the index but cannot embed text.
pub struct QueryEmbedder {
    dimension: usize,
    tag: String,
    remote: Option<RemoteProvider>,
}

impl EmbeddingProvider for QueryEmbedder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn tag(&self) -> String {
        format!("remote:{}", self.tag)
    }

    fn embed(&self, text: &str) -> citegraph_core::Result<DenseVector> {
        match &self.remote {
            Some(r) => r.embed(text),
            None => Err(citegraph_core::Error::Provider(
                "no query embedding endpoint configured (query.embedding_endpoint)".into(),
            )),
        }
    }
}

/// The query-time vectorizer matching `config.vectorize.method`.
pub fn provider(config: &Config) -> Result<Arc<dyn EmbeddingProvider>, CliError> {
    match config.vectorize.method {
        VectorizerKind::TfidfLsa => {
            let pipeline = Pipeline::new(pipeline_config(config)?);
            let model = LsaModel::load(&vectors_dir(config, VectorizerKind::TfidfLsa).join("model"))?;
            Ok(Arc::new(LsaProvider::new(pipeline, Arc::new(model))))
        }
        VectorizerKind::Embedding => {
            let shape: Shape =
                artifact::read_json(&vectors_dir(config, VectorizerKind::Embedding).join("vectors.shape.json"))?;
            let tag = config.vectorize.embedding_tag.clone();
            let remote = config.query.embedding_endpoint.as_ref().map(|url| {
                RemoteProvider::new(
                    url.clone(),
                    shape.cols,
                    tag.clone(),
                    Duration::from_secs(config.query.embedding_timeout_secs),
                )
            });
            Ok(Arc::new(QueryEmbedder {
                dimension: shape.cols,
                tag,
                remote,
            }))
        }
    }
}

fn train(config: &Config, out: &Path) -> Result<(), CliError> {
    let corpus = load_records(config)?;
    let x = read_vectors(config, config.vectorize.method)?;
    let clusters = load_clusters(config)?;
    let ds = LabeledDataset::from_cluster_labels(&x, &clusters.labels, clusters.k)?;
    let (tr, te) = split(&ds, &split_spec(config))?;
    let (model, report) = fit_and_score(config.classify.model, &tr, &te, config)?;
    info!(
        "{} test accuracy {:.4} ({} train / {} test)",
        report.family, report.test_accuracy, report.train_size, report.test_size
    );
    model.save(&out.join("classifier"))?;
    artifact::write_json(&out.join("metrics.json"), &report)?;
    let index = build_index(&corpus, x, provider(config)?, clusters, model)?;
    index.save(&out.join("index"))?;
    Ok(())
}

fn evaluate(config: &Config, out: &Path) -> Result<(), CliError> {
    let mut csv = String::from("model,vectorizer,accuracy\n");
    let mut details = Vec::new();
    for &kind in &config.evaluate.vectorizers {
        if kind == VectorizerKind::Embedding {
            config.embeddings_for("evaluate.vectorizers")?;
        }
        let x = read_vectors(config, kind)?;
        let clusters = if kind == config.vectorize.method {
            load_clusters(config)?
        } else {
            fit_clusters(config, &x)?
        };
        let ds = LabeledDataset::from_cluster_labels(&x, &clusters.labels, clusters.k)?;
        let (tr, te) = split(&ds, &split_spec(config))?;
        for &family in &config.evaluate.models {
            let (_, report) = fit_and_score(family, &tr, &te, config)?;
            info!("{family} on {}: {:.4}", kind.name(), report.test_accuracy);
            writeln!(csv, "{family},{},{}", kind.name(), report.test_accuracy).unwrap();
            if let (ModelFamily::Knn, Some(sel)) = (family, &report.selection) {
                let mut scan = String::from("k,cv_accuracy\n");
                for cell in &sel.table {
                    if let (ModelSpec::Knn { k }, Some(a)) = (cell.spec, cell.accuracy) {
                        writeln!(scan, "{k},{a}").unwrap();
                    }
                }
                let p = out.join(format!("knn_scan_{}.csv", kind.name()));
                std::fs::write(&p, scan).map_err(|e| CliError::io(&p, e))?;
            }
            details.push(json!({ "vectorizer": kind, "report": report }));
        }
    }
    let p = out.join("evaluate.csv");
    std::fs::write(&p, csv).map_err(|e| CliError::io(&p, e))?;
    artifact::write_json(&out.join("details.json"), &details)?;
    Ok(())
}

/// Load the index named by the config. The default location is checked
/// against the manifest first; an explicit `service.index_dir` is trusted.
pub fn load_index(config: &Config) -> Result<RetrievalIndex, CliError> {
    if config.service.index_dir.is_none() {
        verify_upstream(config, Stage::Train)?;
    }
    Ok(RetrievalIndex::load(&config.index_dir(), provider(config)?)?)
}
