//! User accounts persisted as an append-only JSONL journal.
//!
//! Each registration is appended and synced to disk before it becomes
//! visible. On open the journal is replayed; a torn final line (a crash
//! mid-append) is discarded and truncated away.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use argon2::password_hash::{PasswordHash, PasswordHasher, PasswordVerifier, SaltString};
use argon2::{Algorithm, Argon2, Params, Version};
use chrono::{DateTime, Utc};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::config::HashingConfig;
use crate::error::ServiceError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserAccount {
    pub email: String,
    /// PHC-format Argon2id string (salt and parameters included).
    pub password_digest: String,
    pub created_at: DateTime<Utc>,
}

/// Who may register and how passwords are hashed.
#[derive(Debug, Clone, PartialEq)]
pub struct RegistrationPolicy {
    pub allowed_domains: Vec<String>,
    pub min_password_len: usize,
    pub hashing: HashingConfig,
}

/// Lower-cased, trimmed email if it is syntactically plausible.
pub fn normalize_email(email: &str) -> Result<String, ServiceError> {
    let email = email.trim().to_lowercase();
    let (local, domain) = email.split_once('@').ok_or(ServiceError::InvalidEmail)?;
    let labels_ok = domain
        .split('.')
        .all(|l| !l.is_empty() && l.chars().all(|c| c.is_ascii_alphanumeric() || c == '-'));
    if local.is_empty()
        || domain.contains('@')
        || !domain.contains('.')
        || !labels_ok
        || local.chars().any(|c| c.is_whitespace() || c.is_control())
    {
        return Err(ServiceError::InvalidEmail);
    }
    Ok(email)
}

/// `domain` is allowed when it equals an allowlisted entry or is a
/// subdomain of one.
pub fn domain_allowed(domain: &str, allowlist: &[String]) -> bool {
    allowlist.iter().any(|allowed| {
        let allowed = allowed.trim().trim_start_matches('@').to_lowercase();
        !allowed.is_empty() && (domain == allowed || domain.ends_with(&format!(".{allowed}")))
    })
}

fn hasher(cfg: &HashingConfig) -> Result<Argon2<'static>, ServiceError> {
    let params = Params::new(cfg.memory_kib, cfg.iterations, cfg.parallelism, None)
        .map_err(|e| ServiceError::Hashing(e.to_string()))?;
    Ok(Argon2::new(Algorithm::Argon2id, Version::V0x13, params))
}

pub fn hash_password(password: &str, cfg: &HashingConfig) -> Result<String, ServiceError> {
    let mut salt = [0u8; 16];
    rand::rng().fill_bytes(&mut salt);
    let salt = SaltString::encode_b64(&salt).map_err(|e| ServiceError::Hashing(e.to_string()))?;
    Ok(hasher(cfg)?
        .hash_password(password.as_bytes(), &salt)
        .map_err(|e| ServiceError::Hashing(e.to_string()))?
        .to_string())
}

pub fn verify_password(password: &str, digest: &str) -> bool {
    PasswordHash::new(digest)
        .map(|h| Argon2::default().verify_password(password.as_bytes(), &h).is_ok())
        .unwrap_or(false)
}

pub struct AccountStore {
    path: PathBuf,
    policy: RegistrationPolicy,
    accounts: RwLock<HashMap<String, UserAccount>>,
    journal: Mutex<File>,
    /// Verified against when the email is unknown, so both failure paths
    /// cost one hash.
    decoy_digest: String,
}

fn store_err(path: &Path, e: impl std::fmt::Display) -> ServiceError {
    ServiceError::Store(format!("{}: {e}", path.display()))
}

impl AccountStore {
    pub fn open(path: &Path, policy: RegistrationPolicy) -> Result<Self, ServiceError> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| store_err(parent, e))?;
        }
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(path)
            .map_err(|e| store_err(path, e))?;
        let mut text = String::new();
        file.read_to_string(&mut text).map_err(|e| store_err(path, e))?;

        let mut accounts = HashMap::new();
        let mut good_len = 0usize;
        let mut offset = 0usize;
        for line in text.split_inclusive('\n') {
            offset += line.len();
            let complete = line.ends_with('\n');
            let body = line.trim();
            if body.is_empty() {
                good_len = offset;
                continue;
            }
            match serde_json::from_str::<UserAccount>(body) {
                Ok(acc) => {
                    accounts.insert(acc.email.clone(), acc);
                    good_len = offset;
                }
                Err(_) if !complete => break,
                Err(e) => return Err(store_err(path, format!("corrupt journal line: {e}"))),
            }
        }
        if good_len < text.len() {
            log::warn!("{}: discarding torn final journal line", path.display());
            file.set_len(good_len as u64).map_err(|e| store_err(path, e))?;
            file.seek(SeekFrom::End(0)).map_err(|e| store_err(path, e))?;
        }
        let decoy_digest = hash_password("decoy-password", &policy.hashing)?;
        Ok(AccountStore {
            path: path.to_path_buf(),
            policy,
            accounts: RwLock::new(accounts),
            journal: Mutex::new(file),
            decoy_digest,
        })
    }

    pub fn len(&self) -> usize {
        self.accounts.read().expect("accounts lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, email: &str) -> Option<UserAccount> {
        let email = normalize_email(email).ok()?;
        self.accounts.read().expect("accounts lock").get(&email).cloned()
    }

    pub fn register(&self, email: &str, password: &str) -> Result<UserAccount, ServiceError> {
        let email = normalize_email(email)?;
        let domain = email.split_once('@').map(|(_, d)| d).unwrap_or_default();
        if !domain_allowed(domain, &self.policy.allowed_domains) {
            return Err(ServiceError::DomainNotAllowed(domain.to_string()));
        }
        if password.chars().count() < self.policy.min_password_len {
            return Err(ServiceError::WeakPassword(self.policy.min_password_len));
        }
        if self.accounts.read().expect("accounts lock").contains_key(&email) {
            return Err(ServiceError::DuplicateEmail);
        }
        let account = UserAccount {
            email: email.clone(),
            password_digest: hash_password(password, &self.policy.hashing)?,
            created_at: Utc::now(),
        };
        let mut journal = self.journal.lock().expect("journal lock");
        if self.accounts.read().expect("accounts lock").contains_key(&email) {
            return Err(ServiceError::DuplicateEmail);
        }
        let mut line = serde_json::to_string(&account).map_err(|e| store_err(&self.path, e))?;
        line.push('\n');
        journal.write_all(line.as_bytes()).map_err(|e| store_err(&self.path, e))?;
        journal.sync_data().map_err(|e| store_err(&self.path, e))?;
        self.accounts
            .write()
            .expect("accounts lock")
            .insert(email, account.clone());
        Ok(account)
    }

    /// Check credentials; every failure is the same error.
    pub fn authenticate(&self, email: &str, password: &str) -> Result<UserAccount, ServiceError> {
        let account = normalize_email(email)
            .ok()
            .and_then(|e| self.accounts.read().expect("accounts lock").get(&e).cloned());
        match account {
            Some(acc) if verify_password(password, &acc.password_digest) => Ok(acc),
            Some(_) => Err(ServiceError::InvalidCredentials),
            None => {
                let _ = verify_password(password, &self.decoy_digest);
                Err(ServiceError::InvalidCredentials)
            }
        }
    }
}
