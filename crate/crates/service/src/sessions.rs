//! Opaque bearer tokens with an expiry.

use std::sync::Arc;

use chrono::{DateTime, Duration, Utc};
use dashmap::DashMap;
use rand::RngCore;

/// Source of the current time; swappable in tests.
pub type Clock = Arc<dyn Fn() -> DateTime<Utc> + Send + Sync>;

pub fn system_clock() -> Clock {
    Arc::new(Utc::now)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Session {
    pub email: String,
    pub expires_at: DateTime<Utc>,
}

pub struct SessionStore {
    ttl: Duration,
    clock: Clock,
    sessions: DashMap<String, Session>,
}

impl SessionStore {
    pub fn new(ttl_secs: u64, clock: Clock) -> Self {
        SessionStore {
            ttl: Duration::seconds(ttl_secs.min(i64::MAX as u64) as i64),
            clock,
            sessions: DashMap::new(),
        }
    }

    /// 256 random bits, hex encoded.
    pub fn issue(&self, email: &str) -> (String, Session) {
        let mut bytes = [0u8; 32];
        rand::rng().fill_bytes(&mut bytes);
        let token = hex::encode(bytes);
        let session = Session {
            email: email.to_string(),
            expires_at: (self.clock)() + self.ttl,
        };
        self.sessions.insert(token.clone(), session.clone());
        (token, session)
    }

    /// The session for `token` if it exists and has not expired. Expired
    /// entries are dropped on sight.
    pub fn validate(&self, token: &str) -> Option<Session> {
        let now = (self.clock)();
        let session = self.sessions.get(token).map(|s| s.clone())?;
        if now >= session.expires_at {
            self.sessions.remove(token);
            return None;
        }
        Some(session)
    }

    pub fn revoke(&self, token: &str) {
        self.sessions.remove(token);
    }

    pub fn purge_expired(&self) {
        let now = (self.clock)();
        self.sessions.retain(|_, s| now < s.expires_at);
    }

    pub fn len(&self) -> usize {
        self.sessions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sessions.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Mutex;

    use super::*;

    #[test]
    fn tokens_expire() {
        let now = Arc::new(Mutex::new(Utc::now()));
        let t = now.clone();
        let store = SessionStore::new(60, Arc::new(move || *t.lock().unwrap()));
        let (token, _) = store.issue("ann@x.org");
        assert_eq!(token.len(), 64);
        assert!(store.validate(&token).is_some());
        *now.lock().unwrap() += Duration::seconds(61);
        assert!(store.validate(&token).is_none());
        assert!(store.is_empty());
    }

    #[test]
    fn tokens_are_distinct() {
        let store = SessionStore::new(60, system_clock());
        let (a, _) = store.issue("a@x.org");
        let (b, _) = store.issue("a@x.org");
        assert_ne!(a, b);
        store.revoke(&a);
        assert!(store.validate(&a).is_none());
        assert!(store.validate(&b).is_some());
    }
}
