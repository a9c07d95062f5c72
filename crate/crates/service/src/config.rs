use std::path::PathBuf;

use serde::{Deserialize, Serialize};

/// Argon2id cost parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HashingConfig {
    pub memory_kib: u32,
    pub iterations: u32,
    pub parallelism: u32,
}

impl Default for HashingConfig {
    fn default() -> Self {
        HashingConfig {
            memory_kib: 19 * 1024,
            iterations: 2,
            parallelism: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub listen: String,
    /// Saved retrieval index; `None` starts the service without one (503 on
    /// retrieval until an index is swapped in).
    pub index_dir: Option<PathBuf>,
    pub accounts_path: PathBuf,
    /// JSONL request log; `None` disables it.
    pub request_log: Option<PathBuf>,
    /// Email domains allowed to register. Empty means nobody may register.
    pub allowed_domains: Vec<String>,
    pub token_ttl_secs: u64,
    pub min_password_len: usize,
    pub hashing: HashingConfig,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            listen: "127.0.0.1:8080".into(),
            index_dir: None,
            accounts_path: PathBuf::from("accounts.jsonl"),
            request_log: None,
            allowed_domains: Vec::new(),
            token_ttl_secs: 24 * 60 * 60,
            min_password_len: 8,
            hashing: HashingConfig::default(),
        }
    }
}
