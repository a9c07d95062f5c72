//! JSON API routes.

use std::sync::Arc;
use std::time::Instant;

use axum::extract::rejection::JsonRejection;
use axum::extract::{FromRequestParts, Path, Request, State};
use axum::http::request::Parts;
use axum::http::{header, HeaderValue, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;
use crate::pdf::case_pdf;
use crate::state::{AppState, RequestLogEntry};

/// An error response: status plus `{"error": message}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut res = (self.status, Json(serde_json::json!({ "error": self.message }))).into_response();
        if self.status == StatusCode::UNAUTHORIZED {
            res.headers_mut()
                .insert(header::WWW_AUTHENTICATE, HeaderValue::from_static("Bearer"));
        }
        res
    }
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        let status = match &e {
            ServiceError::InvalidEmail | ServiceError::WeakPassword(_) => StatusCode::BAD_REQUEST,
            ServiceError::DomainNotAllowed(_) => StatusCode::FORBIDDEN,
            ServiceError::DuplicateEmail => StatusCode::CONFLICT,
            ServiceError::InvalidCredentials | ServiceError::Unauthorized => StatusCode::UNAUTHORIZED,
            ServiceError::Core(c) => return core_error(c),
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.to_string())
    }
}

fn core_error(e: &citegraph_core::Error) -> ApiError {
    use citegraph_core::Error as E;
    let status = match e {
        E::EmptyQuery => StatusCode::BAD_REQUEST,
        E::OutOfVocabulary => StatusCode::UNPROCESSABLE_ENTITY,
        E::Provider(_) | E::DimensionMismatch { .. } | E::NonFinite(_) => StatusCode::BAD_GATEWAY,
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    };
    ApiError::new(status, e.to_string())
}

fn body_error(rejection: JsonRejection) -> ApiError {
    ApiError::new(StatusCode::BAD_REQUEST, format!("invalid request body: {}", rejection.body_text()))
}

/// The account behind a valid bearer token.
pub struct AuthUser {
    pub email: String,
}

impl FromRequestParts<Arc<AppState>> for AuthUser {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &Arc<AppState>) -> Result<Self, Self::Rejection> {
        let token = parts
            .headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| {
                let (scheme, token) = v.trim().split_once(' ')?;
                scheme.eq_ignore_ascii_case("bearer").then(|| token.trim())
            })
            .filter(|t| !t.is_empty())
            .ok_or_else(|| ApiError::from(ServiceError::Unauthorized))?;
        let session = state
            .sessions()
            .validate(token)
            .ok_or_else(|| ApiError::from(ServiceError::Unauthorized))?;
        Ok(AuthUser { email: session.email })
    }
}

#[derive(Debug, Deserialize)]
pub struct Credentials {
    pub email: String,
    pub password: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RegisterResponse {
    pub email: String,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct LoginResponse {
    pub token: String,
    pub expires_at: String,
}

#[derive(Debug, Deserialize)]
pub struct RetrieveRequest {
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CitationEntry {
    pub id: String,
    pub case_name: String,
    pub justice: String,
    pub year: i32,
    pub track: String,
    pub relevance_pct: u8,
    pub pdf_url: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrieveResponse {
    pub results: Vec<CitationEntry>,
}

/// Percent-encode everything outside the URL path-segment unreserved set.
fn encode_segment(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for b in s.bytes() {
        if b.is_ascii_alphanumeric() || matches!(b, b'-' | b'.' | b'_' | b'~') {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

pub fn pdf_url(id: &str) -> String {
    format!("/api/case/{}/pdf", encode_segment(id))
}

async fn register(
    State(state): State<Arc<AppState>>,
    body: Result<Json<Credentials>, JsonRejection>,
) -> Result<(StatusCode, Json<RegisterResponse>), ApiError> {
    let Json(c) = body.map_err(body_error)?;
    let st = state.clone();
    let account = tokio::task::spawn_blocking(move || st.accounts().register(&c.email, &c.password))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok((
        StatusCode::CREATED,
        Json(RegisterResponse {
            email: account.email,
            created_at: account.created_at,
        }),
    ))
}

async fn login(
    State(state): State<Arc<AppState>>,
    body: Result<Json<Credentials>, JsonRejection>,
) -> Result<Json<LoginResponse>, ApiError> {
    let Json(c) = body.map_err(body_error)?;
    let st = state.clone();
    let account = tokio::task::spawn_blocking(move || st.accounts().authenticate(&c.email, &c.password))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    let (token, session) = state.sessions().issue(&account.email);
    Ok(Json(LoginResponse {
        token,
        expires_at: session.expires_at.to_rfc3339_opts(SecondsFormat::Secs, true),
    }))
}

async fn retrieve(
    State(state): State<Arc<AppState>>,
    _user: AuthUser,
    body: Result<Json<RetrieveRequest>, JsonRejection>,
) -> Result<Json<RetrieveResponse>, ApiError> {
    let Json(req) = body.map_err(body_error)?;
    if req.description.trim().is_empty() {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "description must not be empty"));
    }
    let index = state
        .index()
        .ok_or_else(|| ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "no retrieval index is loaded"))?;
    let results = tokio::task::spawn_blocking(move || {
        index.retrieve_citations(&req.description).map(|hits| {
            hits.into_iter()
                .map(|h| {
                    let r = index.record(h.position);
                    CitationEntry {
                        id: r.id.clone(),
                        case_name: r.case_name.clone(),
                        justice: r.justice.clone(),
                        year: r.year,
                        track: h.track.as_str().to_string(),
                        relevance_pct: h.relevance_pct,
                        pdf_url: pdf_url(&r.id),
                    }
                })
                .collect::<Vec<_>>()
        })
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
    .map_err(|e| core_error(&e))?;
    Ok(Json(RetrieveResponse { results }))
}

/// Keep only characters that are safe inside a quoted header filename.
fn safe_filename(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect()
}

async fn case_pdf_handler(
    State(state): State<Arc<AppState>>,
    _user: AuthUser,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let index = state
        .index()
        .ok_or_else(|| ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "no retrieval index is loaded"))?;
    let pos = index
        .position_of(&id)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no case with id `{id}`")))?;
    let bytes = case_pdf(index.record(pos));
    let disposition = format!("attachment; filename=\"{}.pdf\"", safe_filename(&id));
    Ok((
        [
            (header::CONTENT_TYPE, "application/pdf".to_string()),
            (header::CONTENT_DISPOSITION, disposition),
        ],
        bytes,
    )
        .into_response())
}

async fn log_requests(State(state): State<Arc<AppState>>, req: Request, next: Next) -> Response {
    let start = Instant::now();
    let method = req.method().to_string();
    let path = req.uri().path().to_string();
    let res = next.run(req).await;
    state.log_request(&RequestLogEntry {
        timestamp: Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
        method,
        path,
        status: res.status().as_u16(),
        latency_ms: start.elapsed().as_secs_f64() * 1000.0,
    });
    res
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/register", post(register))
        .route("/api/login", post(login))
        .route("/api/retrieve", post(retrieve))
        .route("/api/case/{id}/pdf", get(case_pdf_handler))
        .layer(middleware::from_fn_with_state(state.clone(), log_requests))
        .with_state(state)
}
