//! HTTP front end for a citation retrieval index.
//!
//! Accounts live in an append-only journal file, sessions in memory. The
//! active index sits behind a swappable snapshot so a new build can replace
//! it while queries are in flight.

pub mod accounts;
pub mod api;
pub mod config;
pub mod error;
pub mod pdf;
pub mod remote;
pub mod sessions;
pub mod state;

pub use api::router;
pub use config::{HashingConfig, ServiceConfig};
pub use error::ServiceError;
pub use state::AppState;

/// Bind `config.listen` and serve until ctrl-c.
pub async fn serve(state: std::sync::Arc<AppState>) -> Result<(), ServiceError> {
    let addr = state.config().listen.clone();
    let listener = tokio::net::TcpListener::bind(&addr)
        .await
        .map_err(|e| ServiceError::Io(format!("bind {addr}: {e}")))?;
    log::info!("listening on {addr}");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| ServiceError::Io(e.to_string()))
}
