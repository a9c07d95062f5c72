use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("invalid email address")]
    InvalidEmail,

    #[error("registration is restricted to allowlisted domains; `{0}` is not on the list")]
    DomainNotAllowed(String),

    #[error("password must be at least {0} characters")]
    WeakPassword(usize),

    #[error("an account with this email already exists")]
    DuplicateEmail,

    /// Same message for unknown email and wrong password.
    #[error("invalid email or password")]
    InvalidCredentials,

    #[error("missing or invalid session token")]
    Unauthorized,

    #[error("account store: {0}")]
    Store(String),

    #[error("password hashing: {0}")]
    Hashing(String),

    #[error("{0}")]
    Io(String),

    #[error(transparent)]
    Core(#[from] citegraph_core::Error),
}
