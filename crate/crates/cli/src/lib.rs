//! Command-line driver: runs pipeline stages against an artifact directory,
//! answers queries from a built index and launches the HTTP service.

pub mod config;
pub mod error;
pub mod lock;
pub mod manifest;
pub mod stages;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use citegraph_core::retrieve::CitationResult;
use citegraph_service::AppState;

pub use config::Config;
pub use error::CliError;
pub use stages::{run_stage, Outcome, Stage};

/// Default config file looked up in the working directory.
pub const DEFAULT_CONFIG: &str = "citegraph.toml";

#[derive(Debug, Parser)]
#[command(name = "citegraph", version, about = "Citation retrieval pipeline")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Config file; `citegraph.toml` in the working directory if present.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Artifact directory, overriding the config.
    #[arg(long, global = true, value_name = "DIR")]
    pub artifacts: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Override any config key, e.g. `--set cluster.k=6`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Rerun stages even when they are up to date.
    #[arg(long, global = true)]
    pub force: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load, validate and filter the corpus.
    Ingest,
    /// Tokenize and normalize every description.
    Preprocess,
    /// Fit TF-IDF + LSA and align precomputed embeddings.
    Vectorize,
    /// Cluster document vectors and export k-scan curves and a 2-D projection.
    Cluster,
    /// Train the index classifier and build the retrieval index.
    Train,
    /// Score every vectorizer x classifier pair on a held-out split.
    Evaluate,
    /// Run every stage from ingest to evaluate.
    Pipeline,
    /// Print the citations for a case description.
    Query {
        /// File holding the case description.
        #[arg(long, value_name = "FILE")]
        text: PathBuf,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Launch the HTTP service on the built index.
    Serve,
}

/// Resolve the layered configuration for `args`.
pub fn load_config(args: &CommonArgs) -> Result<Config, CliError> {
    let file = match &args.config {
        Some(p) => Some(p.clone()),
        None => Some(PathBuf::from(DEFAULT_CONFIG)).filter(|p| p.is_file()),
    };
    let overrides = config::Overrides {
        seed: args.seed,
        artifacts: args.artifacts.clone(),
        set: args.set.clone(),
    };
    config::load(file.as_deref(), std::env::vars(), &overrides)
}

fn report(stage: Stage, outcome: &Outcome) {
    match outcome {
        Outcome::Ran(fp) => println!("{stage}: done ({})", &fp[..12]),
        Outcome::UpToDate => println!("{stage}: up to date"),
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let config = load_config(&cli.common)?;
    let force = cli.common.force;
    let single = |stage| -> Result<(), CliError> {
        let outcome = run_stage(&config, stage, force)?;
        report(stage, &outcome);
        Ok(())
    };
    match cli.command {
        Command::Ingest => single(Stage::Ingest),
        Command::Preprocess => single(Stage::Preprocess),
        Command::Vectorize => single(Stage::Vectorize),
        Command::Cluster => single(Stage::Cluster),
        Command::Train => single(Stage::Train),
        Command::Evaluate => single(Stage::Evaluate),
        Command::Pipeline => Stage::PIPELINE.into_iter().try_for_each(single),
        Command::Query { text, json } => query(&config, &text, json),
        Command::Serve => serve(config),
    }
}

fn query(config: &Config, text_path: &Path, as_json: bool) -> Result<(), CliError> {
    let text = std::fs::read_to_string(text_path)
        .map_err(|e| CliError::Config(format!("--text {}: {e}", text_path.display())))?;
    let index = {
        let _lock = lock::DirLock::acquire(&config.artifacts, "query")?;
        stages::load_index(config)?
    };
    let results = index.retrieve_citations(&text)?;
    if as_json {
        let rows: Vec<serde_json::Value> = results
            .iter()
            .map(|r| {
                let rec = index.record(r.position);
                serde_json::json!({
                    "id": r.id,
                    "case_name": rec.case_name,
                    "justice": rec.justice,
                    "year": rec.year,
                    "track": r.track,
                    "raw_score": r.raw_score,
                    "relevance_pct": r.relevance_pct,
                })
            })
            .collect();
        println!("{}", serde_json::to_string_pretty(&rows).expect("json values serialize"));
    } else {
        for (rank, r) in results.iter().enumerate() {
            println!("{}", format_citation(rank + 1, r, &index));
        }
    }
    Ok(())
}

fn format_citation(rank: usize, r: &CitationResult, index: &citegraph_core::retrieve::RetrievalIndex) -> String {
    let rec = index.record(r.position);
    format!(
        "{rank}. {:>3}%  {}  {}  ({}, {})  [{}]",
        r.relevance_pct,
        r.id,
        rec.case_name,
        rec.justice,
        rec.year,
        r.track.as_str()
    )
}

fn serve(config: Config) -> Result<(), CliError> {
    let index = {
        let _lock = lock::DirLock::acquire(&config.artifacts, "serve")?;
        stages::load_index(&config)?
    };
    let mut service = config.service.clone();
    service.index_dir = Some(config.index_dir());
    let state = Arc::new(AppState::new(service, Some(index))?);
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Runtime(format!("tokio runtime: {e}")))?;
    runtime.block_on(citegraph_service::serve(state))?;
    Ok(())
}
