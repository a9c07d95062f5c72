//! `manifest.json`: what each stage consumed, which settings it ran with and
//! what it wrote.

use std::collections::BTreeMap;
use std::path::Path;

use citegraph_core::fingerprint;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    /// Fully resolved configuration of the most recent stage run.
    pub config: serde_json::Value,
    pub stages: BTreeMap<String, StageRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    /// Hash of `settings`.
    pub params: String,
    /// The exact settings the stage ran with, derived seeds included.
    pub settings: serde_json::Value,
    /// Fingerprints of upstream stages and external input files.
    pub inputs: BTreeMap<String, String>,
    /// Hash of every file under the stage directory, keyed by relative path.
    pub outputs: BTreeMap<String, String>,
    /// Hash of `outputs`.
    pub fingerprint: String,
    pub completed_at: String,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self, CliError> {
        let path = dir.join(MANIFEST_FILE);
        match std::fs::read(&path) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map_err(|e| CliError::Stale(format!("{}: unreadable manifest: {e}", path.display()))),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Manifest::default()),
            Err(e) => Err(CliError::io(&path, e)),
        }
    }

    /// Write through a temporary file so a crash never leaves half a manifest.
    pub fn save(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join(MANIFEST_FILE);
        let tmp = dir.join(format!("{MANIFEST_FILE}.tmp"));
        let bytes = serde_json::to_vec_pretty(self).map_err(|e| CliError::Runtime(e.to_string()))?;
        std::fs::write(&tmp, bytes).map_err(|e| CliError::io(&tmp, e))?;
        std::fs::rename(&tmp, &path).map_err(|e| CliError::io(&path, e))
    }
}

/// Hash every regular file below `dir`, keyed by `/`-separated relative path.
pub fn hash_tree(dir: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    if dir.is_dir() {
        walk(dir, dir, &mut out)?;
    }
    Ok(out)
}

fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, String>) -> Result<(), CliError> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| CliError::io(dir, e))?;
        let path = entry.path();
        let kind = entry.file_type().map_err(|e| CliError::io(&path, e))?;
        if kind.is_dir() {
            walk(root, &path, out)?;
        } else if kind.is_file() {
            let bytes = std::fs::read(&path).map_err(|e| CliError::io(&path, e))?;
            let rel = path
                .strip_prefix(root)
                .expect("walked path lies under root")
                .components()
                .map(|c| c.as_os_str().to_string_lossy().into_owned())
                .collect::<Vec<_>>()
                .join("/");
            out.insert(rel, fingerprint::of_bytes(&bytes));
        }
    }
    Ok(())
}

pub fn tree_fingerprint(outputs: &BTreeMap<String, String>) -> String {
    fingerprint::of_json(outputs)
}

pub fn file_fingerprint(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(fingerprint::of_bytes(&bytes))
}
