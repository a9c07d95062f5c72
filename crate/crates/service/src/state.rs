use std::fs::{File, OpenOptions};
use std::io::Write;
use std::sync::{Arc, Mutex, RwLock};

use citegraph_core::retrieve::RetrievalIndex;
use serde::Serialize;

use crate::accounts::{AccountStore, RegistrationPolicy};
use crate::config::ServiceConfig;
use crate::error::ServiceError;
use crate::sessions::{system_clock, Clock, SessionStore};

/// One line of the request log.
#[derive(Debug, Clone, Serialize)]
pub struct RequestLogEntry {
    pub timestamp: String,
    pub method: String,
    pub path: String,
    pub status: u16,
    pub latency_ms: f64,
}

/// Shared by every request handler.
pub struct AppState {
    config: ServiceConfig,
    accounts: AccountStore,
    sessions: SessionStore,
    index: RwLock<Option<Arc<RetrievalIndex>>>,
    request_log: Option<Mutex<File>>,
}

impl AppState {
    pub fn new(config: ServiceConfig, index: Option<RetrievalIndex>) -> Result<Self, ServiceError> {
        Self::with_clock(config, index, system_clock())
    }

    pub fn with_clock(config: ServiceConfig, index: Option<RetrievalIndex>, clock: Clock) -> Result<Self, ServiceError> {
        let accounts = AccountStore::open(
            &config.accounts_path,
            RegistrationPolicy {
                allowed_domains: config.allowed_domains.clone(),
                min_password_len: config.min_password_len,
                hashing: config.hashing,
            },
        )?;
        let request_log = match &config.request_log {
            Some(path) => Some(Mutex::new(
                OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(path)
                    .map_err(|e| ServiceError::Io(format!("{}: {e}", path.display())))?,
            )),
            None => None,
        };
        Ok(AppState {
            sessions: SessionStore::new(config.token_ttl_secs, clock),
            config,
            accounts,
            index: RwLock::new(index.map(Arc::new)),
            request_log,
        })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn accounts(&self) -> &AccountStore {
        &self.accounts
    }

    pub fn sessions(&self) -> &SessionStore {
        &self.sessions
    }

    /// The active index. Callers keep the returned snapshot for the whole
    /// request, so a concurrent swap never mixes two indexes.
    pub fn index(&self) -> Option<Arc<RetrievalIndex>> {
        self.index.read().expect("index lock").clone()
    }

    /// Replace the active index and return the previous one.
    pub fn swap_index(&self, next: Option<Arc<RetrievalIndex>>) -> Option<Arc<RetrievalIndex>> {
        std::mem::replace(&mut *self.index.write().expect("index lock"), next)
    }

    pub fn log_request(&self, entry: &RequestLogEntry) {
        log::info!(
            "{} {} -> {} in {:.1} ms",
            entry.method,
            entry.path,
            entry.status,
            entry.latency_ms
        );
        if let Some(file) = &self.request_log {
            let mut line = serde_json::to_string(entry).expect("log entry serializes");
            line.push('\n');
            let mut f = file.lock().expect("request log lock");
            if let Err(e) = f.write_all(line.as_bytes()) {
                log::warn!("request log write failed: {e}");
            }
        }
    }
}
