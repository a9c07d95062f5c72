//! Pipeline configuration: one TOML file, overridden by `CITEGRAPH_*`
//! environment variables, overridden by command-line flags.

use std::path::{Path, PathBuf};

use citegraph_core::classify::{Kernel, ModelFamily};
use citegraph_core::cluster::ClusterAlgorithm;
use citegraph_core::corpus::CorpusFormat;
use citegraph_service::ServiceConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Environment variables with this prefix override config keys. Nested keys
/// are joined with `__`: `CITEGRAPH_VECTORIZE__R=20` sets `vectorize.r`.
pub const ENV_PREFIX: &str = "CITEGRAPH_";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorizerKind {
    TfidfLsa,
    Embedding,
}

impl VectorizerKind {
    pub fn name(self) -> &'static str {
        match self {
            VectorizerKind::TfidfLsa => "tfidf_lsa",
            VectorizerKind::Embedding => "embedding",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Master seed; every randomized step derives its own seed from it.
    pub seed: u64,
    /// Artifact directory.
    pub artifacts: PathBuf,
    pub corpus: CorpusConfig,
    pub textprep: TextprepConfig,
    pub vectorize: VectorizeConfig,
    pub cluster: ClusterConfig,
    pub classify: ClassifyConfig,
    pub evaluate: EvaluateConfig,
    pub query: QueryConfig,
    pub service: ServiceConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 0,
            artifacts: PathBuf::from("artifacts"),
            corpus: CorpusConfig::default(),
            textprep: TextprepConfig::default(),
            vectorize: VectorizeConfig::default(),
            cluster: ClusterConfig::default(),
            classify: ClassifyConfig::default(),
            evaluate: EvaluateConfig::default(),
            query: QueryConfig::default(),
            service: ServiceConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    pub path: PathBuf,
    /// Guessed from the extension when absent.
    pub format: Option<CorpusFormat>,
    pub min_year: Option<i32>,
    /// Records with fewer whitespace tokens are dropped; 0 disables the filter.
    pub min_tokens: usize,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            path: PathBuf::from("corpus.jsonl"),
            format: None,
            min_year: None,
            min_tokens: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TextprepConfig {
    /// One word per line; the built-in list when absent.
    pub stopwords: Option<PathBuf>,
    /// `contraction<TAB>expansion` per line; the built-in table when absent.
    pub contractions: Option<PathBuf>,
    pub expand_contractions: bool,
    pub numbers_to_words: bool,
    pub preserve_section_refs: bool,
    pub lemmatize: bool,
}

impl Default for TextprepConfig {
    fn default() -> Self {
        TextprepConfig {
            stopwords: None,
            contractions: None,
            expand_contractions: true,
            numbers_to_words: true,
            preserve_section_refs: true,
            lemmatize: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VectorizeConfig {
    /// Representation used for clustering, training and the index.
    pub method: VectorizerKind,
    pub r: usize,
    pub oversample: usize,
    pub power_iters: usize,
    pub variance_target: Option<f64>,
    /// Precomputed document embeddings, JSONL `{"id", "vector"}`.
    pub embeddings: Option<PathBuf>,
    /// Names the model behind `embeddings`; part of index fingerprints.
    pub embedding_tag: String,
}

impl Default for VectorizeConfig {
    fn default() -> Self {
        VectorizeConfig {
            method: VectorizerKind::TfidfLsa,
            r: 100,
            oversample: 10,
            power_iters: 4,
            variance_target: None,
            embeddings: None,
            embedding_tag: "offline".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterConfig {
    pub algorithm: ClusterAlgorithm,
    pub k: usize,
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub eps: f64,
    pub min_pts: usize,
    /// Range of the WCSS / silhouette scan.
    pub scan_k_min: usize,
    pub scan_k_max: usize,
    pub silhouette_cap: usize,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            algorithm: ClusterAlgorithm::Kmeans,
            k: 8,
            restarts: 10,
            max_iters: 300,
            tol: 1e-8,
            eps: 0.5,
            min_pts: 5,
            scan_k_min: 2,
            scan_k_max: 12,
            silhouette_cap: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyConfig {
    /// Classifier stored in the retrieval index.
    pub model: ModelFamily,
    pub train_fraction: f64,
    pub stratified: bool,
    /// Cross-validation folds for hyperparameter selection.
    pub folds: usize,
    pub knn_k: Vec<usize>,
    pub svm_c: Vec<f64>,
    pub svm_kernels: Vec<Kernel>,
    /// Only used with the rbf kernel.
    pub svm_gamma: Vec<f64>,
    pub svm_epochs: usize,
    pub svm_features: usize,
    pub mlp_hidden: usize,
    pub mlp_epochs: usize,
    pub mlp_learning_rate: f64,
    pub mlp_batch_size: usize,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            model: ModelFamily::Mlp,
            train_fraction: 0.67,
            stratified: true,
            folds: 3,
            knn_k: (3..=49).step_by(2).collect(),
            svm_c: vec![0.1, 1.0, 10.0],
            svm_kernels: vec![Kernel::Linear, Kernel::Rbf],
            svm_gamma: vec![0.1, 1.0],
            svm_epochs: 100,
            svm_features: 512,
            mlp_hidden: 128,
            mlp_epochs: 300,
            mlp_learning_rate: 0.05,
            mlp_batch_size: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateConfig {
    pub vectorizers: Vec<VectorizerKind>,
    pub models: Vec<ModelFamily>,
}

impl Default for EvaluateConfig {
    fn default() -> Self {
        EvaluateConfig {
            vectorizers: vec![VectorizerKind::TfidfLsa, VectorizerKind::Embedding],
            models: ModelFamily::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QueryConfig {
    /// Embedding endpoint for query text when the index uses embeddings.
    pub embedding_endpoint: Option<String>,
    pub embedding_timeout_secs: u64,
}

impl Default for QueryConfig {
    fn default() -> Self {
        QueryConfig {
            embedding_endpoint: None,
            embedding_timeout_secs: 30,
        }
    }
}

/// Command-line overrides, applied last.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub artifacts: Option<PathBuf>,
    /// `dotted.key=value` pairs; values are parsed as TOML, else taken as strings.
    pub set: Vec<String>,
}

/// Load and layer the configuration. `file` may be absent, in which case
/// defaults are the bottom layer and paths resolve against the working
/// directory.
pub fn load(
    file: Option<&Path>,
    env: impl IntoIterator<Item = (String, String)>,
    overrides: &Overrides,
) -> Result<Config, CliError> {
    let (mut table, base) = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let table: toml::Table = toml::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            (table, base)
        }
        None => (toml::Table::new(), PathBuf::new()),
    };

    let mut env: Vec<(String, String)> = env
        .into_iter()
        .filter(|(k, _)| k.starts_with(ENV_PREFIX))
        .collect();
    env.sort();
    for (key, raw) in env {
        let dotted = key[ENV_PREFIX.len()..].to_ascii_lowercase().replace("__", ".");
        set_dotted(&mut table, &dotted, &raw)
            .map_err(|e| CliError::Config(format!("environment variable {key}: {e}")))?;
    }
    for pair in &overrides.set {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set `{pair}`: expected key=value")))?;
        set_dotted(&mut table, k.trim(), v.trim()).map_err(|e| CliError::Config(format!("--set {k}: {e}")))?;
    }
    if let Some(seed) = overrides.seed {
        let seed = i64::try_from(seed).map_err(|_| CliError::Config("--seed: must fit in a signed 64-bit integer".into()))?;
        table.insert("seed".into(), toml::Value::Integer(seed));
    }

    let source = file.map_or_else(|| "<defaults>".to_string(), |p| p.display().to_string());
    let mut config: Config = serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(format!("{source}: field `{path}`: {}", e.inner().message()))
    })?;
    if let Some(dir) = &overrides.artifacts {
        config.artifacts = dir.clone();
    } else {
        config.artifacts = resolve(&base, &config.artifacts);
    }
    config.resolve_paths(&base);
    config.validate()?;
    Ok(config)
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn set_dotted(table: &mut toml::Table, dotted: &str, raw: &str) -> Result<(), String> {
    let parts: Vec<&str> = dotted.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(format!("malformed key `{dotted}`"));
    }
    let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let mut cur = table;
    for part in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| format!("`{part}` is not a table"))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

impl Config {
    fn resolve_paths(&mut self, base: &Path) {
        self.corpus.path = resolve(base, &self.corpus.path);
        for p in [
            &mut self.textprep.stopwords,
            &mut self.textprep.contractions,
            &mut self.vectorize.embeddings,
            &mut self.service.index_dir,
            &mut self.service.request_log,
        ]
        .into_iter()
        .flatten()
        {
            *p = resolve(base, p);
        }
        self.service.accounts_path = resolve(base, &self.service.accounts_path);
    }

    /// Cross-field checks that serde cannot express.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, msg: &str| Err(CliError::Config(format!("field `{field}`: {msg}")));
        if self.vectorize.r == 0 {
            return bad("vectorize.r", "must be at least 1");
        }
        if let Some(t) = self.vectorize.variance_target {
            if !(t > 0.0 && t <= 1.0) {
                return bad("vectorize.variance_target", "must lie in (0, 1]");
            }
        }
        if self.cluster.k < 2 {
            return bad("cluster.k", "must be at least 2");
        }
        if self.cluster.restarts == 0 {
            return bad("cluster.restarts", "must be at least 1");
        }
        if self.cluster.scan_k_min < 2 || self.cluster.scan_k_min > self.cluster.scan_k_max {
            return bad("cluster.scan_k_min", "need 2 <= scan_k_min <= scan_k_max");
        }
        if !(self.cluster.eps > 0.0) {
            return bad("cluster.eps", "must be positive");
        }
        if !(self.classify.train_fraction > 0.0 && self.classify.train_fraction < 1.0) {
            return bad("classify.train_fraction", "must lie in (0, 1)");
        }
        if self.classify.folds < 2 {
            return bad("classify.folds", "must be at least 2");
        }
        if self.classify.knn_k.is_empty() || self.classify.knn_k.contains(&0) {
            return bad("classify.knn_k", "must be a nonempty list of positive integers");
        }
        if self.classify.svm_c.is_empty() || self.classify.svm_kernels.is_empty() {
            return bad("classify.svm_c", "svm_c and svm_kernels must be nonempty");
        }
        if self.classify.svm_kernels.contains(&Kernel::Rbf) && self.classify.svm_gamma.is_empty() {
            return bad("classify.svm_gamma", "must be nonempty when the rbf kernel is listed");
        }
        if self.classify.mlp_batch_size == 0 || self.classify.mlp_hidden == 0 {
            return bad("classify.mlp_batch_size", "batch size and hidden width must be positive");
        }
        if self.evaluate.vectorizers.is_empty() || self.evaluate.models.is_empty() {
            return bad("evaluate.vectorizers", "vectorizers and models must be nonempty");
        }
        Ok(())
    }

    /// The embedding file, required once `user` asks for embedding vectors.
    pub fn embeddings_for(&self, user: &str) -> Result<&Path, CliError> {
        self.vectorize.embeddings.as_deref().ok_or_else(|| {
            CliError::Config(format!("field `vectorize.embeddings`: required by {user}"))
        })
    }

    /// The directory the index is written to by `train` and read by `query`/`serve`.
    pub fn index_dir(&self) -> PathBuf {
        self.service
            .index_dir
            .clone()
            .unwrap_or_else(|| self.artifacts.join("train").join("index"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, text: &str) -> PathBuf {
        let p = dir.join("citegraph.toml");
        std::fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn layers_apply_in_order() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "seed = 1\n[vectorize]\nr = 5\noversample = 3\n",
        );
        let env = vec![
            ("CITEGRAPH_VECTORIZE__R".to_string(), "7".to_string()),
            ("CITEGRAPH_SEED".to_string(), "2".to_string()),
            ("UNRELATED".to_string(), "x".to_string()),
        ];
        let flags = Overrides {
            seed: Some(3),
            set: vec!["vectorize.oversample=4".into()],
            ..Default::default()
        };
        let c = load(Some(&p), env, &flags).unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.vectorize.r, 7);
        assert_eq!(c.vectorize.oversample, 4);
        assert_eq!(c.corpus.path, dir.path().join("corpus.jsonl"));
        assert_eq!(c.artifacts, dir.path().join("artifacts"));
    }

    #[test]
    fn unknown_and_mistyped_fields_name_their_path() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "[cluster]\nkk = 3\n");
        let e = load(Some(&p), vec![], &Overrides::default()).unwrap_err().to_string();
        assert!(e.contains("cluster") && e.contains("kk"), "{e}");
        let p = write(dir.path(), "[cluster]\nk = \"three\"\n");
        let e = load(Some(&p), vec![], &Overrides::default()).unwrap_err().to_string();
        assert!(e.contains("cluster.k"), "{e}");
    }

    #[test]
    fn defaults_load_without_a_file() {
        let c = load(None, vec![], &Overrides::default()).unwrap();
        assert_eq!(c, Config { artifacts: PathBuf::from("artifacts"), corpus: CorpusConfig { path: PathBuf::from("corpus.jsonl"), ..Default::default() }, ..Default::default() });
        let e = c.embeddings_for("evaluate.vectorizers").unwrap_err();
        assert!(e.to_string().contains("vectorize.embeddings"));
        assert_eq!(e.exit_code(), 2);
    }
}
