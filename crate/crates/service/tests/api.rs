mod common;

use std::sync::{Arc, Mutex};

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use chrono::{Duration, Utc};
use citegraph_service::api::RetrieveResponse;
use citegraph_service::{router, AppState};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use common::{fixture_index, pdf_check, test_config};

async fn call(app: &Router, method: &str, uri: &str, token: Option<&str>, body: Option<Value>) -> (StatusCode, Vec<u8>, Option<String>) {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(t) = token {
        req = req.header(header::AUTHORIZATION, format!("Bearer {t}"));
    }
    let req = match body {
        Some(b) => req
            .header(header::CONTENT_TYPE, "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let ctype = res
        .headers()
        .get(header::CONTENT_TYPE)
        .map(|v| v.to_str().unwrap().to_string());
    let bytes = res.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes, ctype)
}

fn json_of(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap()
}

async fn login(app: &Router) -> String {
    let creds = json!({"email": "clerk@court.example", "password": "s3cret-pass"});
    let (s, _, _) = call(app, "POST", "/api/register", None, Some(creds.clone())).await;
    assert_eq!(s, StatusCode::CREATED);
    let (s, b, _) = call(app, "POST", "/api/login", None, Some(creds)).await;
    assert_eq!(s, StatusCode::OK);
    json_of(&b)["token"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn full_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let state = Arc::new(AppState::new(test_config(dir.path()), Some(fixture_index(24, 3))).unwrap());
    let app = router(state.clone());
    let token = login(&app).await;

    let index = state.index().unwrap();
    let probe = index.record(7).clone();
    let (s, b, _) = call(&app, "POST", "/api/retrieve", Some(&token), Some(json!({"description": probe.description}))).await;
    assert_eq!(s, StatusCode::OK, "{}", String::from_utf8_lossy(&b));
    let res: RetrieveResponse = serde_json::from_slice(&b).unwrap();
    assert_eq!(res.results.len(), 5);
    assert_eq!(res.results[0].id, probe.id);
    assert_eq!(res.results[0].relevance_pct, 100);
    let tracks: Vec<&str> = res.results.iter().map(|r| r.track.as_str()).collect();
    assert_eq!(tracks, ["cosine_top1", "cluster_neighbor", "cluster_neighbor", "cluster_neighbor", "cluster_neighbor"]);

    // The service returns exactly what the library computes.
    let lib = index.retrieve_citations(&probe.description).unwrap();
    let ids: Vec<&str> = lib.iter().map(|c| c.id.as_str()).collect();
    let api_ids: Vec<&str> = res.results.iter().map(|c| c.id.as_str()).collect();
    assert_eq!(ids, api_ids);

    let (s2, b2, _) = call(&app, "POST", "/api/retrieve", Some(&token), Some(json!({"description": probe.description}))).await;
    assert_eq!(s2, StatusCode::OK);
    assert_eq!(b, b2);

    let (s, pdf, ctype) = call(&app, "GET", &res.results[0].pdf_url, Some(&token), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(ctype.as_deref(), Some("application/pdf"));
    assert!(pdf.starts_with(b"%PDF-1.4") && pdf.ends_with(b"%%EOF"));
    let summary = pdf_check::validate(&pdf).unwrap();
    assert!(summary.text.contains(&probe.case_name));
    assert!(summary.text.contains(&probe.justice));
    assert!(summary.text.contains(&probe.source_url));
    let first_words: String = probe.description.split_whitespace().take(3).collect::<Vec<_>>().join(" ");
    assert!(summary.text.contains(&first_words));

    let (s, _, _) = call(&app, "GET", "/api/case/no-such-case/pdf", Some(&token), None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);

    let log = std::fs::read_to_string(dir.path().join("requests.jsonl")).unwrap();
    let entries: Vec<Value> = log.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(entries.len() >= 6);
    assert!(entries.iter().all(|e| e["latency_ms"].as_f64().unwrap() >= 0.0));
    assert!(!log.contains(&token));
}

#[tokio::test]
async fn protected_endpoints_need_tokens() {
    let dir = tempfile::tempdir().unwrap();
    let now = Arc::new(Mutex::new(Utc::now()));
    let clock_now = now.clone();
    let state = Arc::new(
        AppState::with_clock(
            test_config(dir.path()),
            Some(fixture_index(12, 3)),
            Arc::new(move || *clock_now.lock().unwrap()),
        )
        .unwrap(),
    );
    let app = router(state);
    let body = Some(json!({"description": "jury verdict"}));
    for token in [None, Some("not-a-token"), Some("")] {
        let (s, _, _) = call(&app, "POST", "/api/retrieve", token, body.clone()).await;
        assert_eq!(s, StatusCode::UNAUTHORIZED);
        let (s, _, _) = call(&app, "GET", "/api/case/case-0000/pdf", token, None).await;
        assert_eq!(s, StatusCode::UNAUTHORIZED);
    }

    let token = login(&app).await;
    let (s, _, _) = call(&app, "POST", "/api/retrieve", Some(&token), body.clone()).await;
    assert_eq!(s, StatusCode::OK);

    *now.lock().unwrap() += Duration::hours(25);
    let (s, _, _) = call(&app, "POST", "/api/retrieve", Some(&token), body.clone()).await;
    assert_eq!(s, StatusCode::UNAUTHORIZED);
    let (s, _, _) = call(&app, "GET", "/api/case/case-0000/pdf", Some(&token), None).await;
    assert_eq!(s, StatusCode::UNAUTHORIZED);
}

#[tokio::test]
async fn account_errors() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(Arc::new(AppState::new(test_config(dir.path()), None).unwrap()));
    let ok = json!({"email": "a@court.example", "password": "long-enough"});
    assert_eq!(call(&app, "POST", "/api/register", None, Some(ok.clone())).await.0, StatusCode::CREATED);
    assert_eq!(call(&app, "POST", "/api/register", None, Some(ok)).await.0, StatusCode::CONFLICT);

    let (s, b, _) = call(&app, "POST", "/api/register", None, Some(json!({"email": "x@gmail.example", "password": "long-enough"}))).await;
    assert_eq!(s, StatusCode::FORBIDDEN);
    assert!(json_of(&b)["error"].as_str().unwrap().contains("allowlisted"));
    let (s, _, _) = call(&app, "POST", "/api/register", None, Some(json!({"email": "b@court.example", "password": "short"}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);

    let (s1, b1, _) = call(&app, "POST", "/api/login", None, Some(json!({"email": "a@court.example", "password": "wrong-pass"}))).await;
    let (s2, b2, _) = call(&app, "POST", "/api/login", None, Some(json!({"email": "nobody@court.example", "password": "wrong-pass"}))).await;
    assert_eq!((s1, s2), (StatusCode::UNAUTHORIZED, StatusCode::UNAUTHORIZED));
    assert_eq!(b1, b2);
}

#[tokio::test]
async fn default_policy_denies_all_registration() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = test_config(dir.path());
    cfg.allowed_domains.clear();
    let app = router(Arc::new(AppState::new(cfg, None).unwrap()));
    let (s, _, _) = call(&app, "POST", "/api/register", None, Some(json!({"email": "a@court.example", "password": "long-enough"}))).await;
    assert_eq!(s, StatusCode::FORBIDDEN);
}

#[tokio::test]
async fn bad_bodies_and_missing_index() {
    let dir = tempfile::tempdir().unwrap();
    let state = Arc::new(AppState::new(test_config(dir.path()), None).unwrap());
    let app = router(state.clone());
    let token = login(&app).await;

    let (s, b, _) = call(&app, "POST", "/api/retrieve", Some(&token), Some(json!({"description": "anything"}))).await;
    assert_eq!(s, StatusCode::SERVICE_UNAVAILABLE);
    assert!(json_of(&b)["error"].is_string());

    state.swap_index(Some(Arc::new(fixture_index(12, 3))));
    for body in [json!({"description": "   "}), json!({})] {
        let (s, b, _) = call(&app, "POST", "/api/retrieve", Some(&token), Some(body)).await;
        assert_eq!(s, StatusCode::BAD_REQUEST);
        assert!(json_of(&b)["error"].as_str().unwrap().contains("empty"));
    }
    let (s, _, _) = call(&app, "POST", "/api/retrieve", Some(&token), None).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _, _) = call(&app, "POST", "/api/retrieve", Some(&token), Some(json!({"description": "zzzz qqqq"}))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn swap_gives_coherent_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let a = fixture_index(12, 3);
    let b = fixture_index(18, 3);
    let (fa, fb) = (a.fingerprint().to_string(), b.fingerprint().to_string());
    let state = Arc::new(AppState::new(test_config(dir.path()), Some(a)).unwrap());
    let next = Arc::new(b);
    let mut handles = Vec::new();
    for i in 0..8 {
        let st = state.clone();
        let (fa, fb) = (fa.clone(), fb.clone());
        handles.push(std::thread::spawn(move || {
            for _ in 0..200 {
                let snap = st.index().unwrap();
                let fp = snap.fingerprint().to_string();
                assert!(fp == fa || fp == fb);
                // A snapshot answers consistently with itself.
                let hits = snap.retrieve_citations(&snap.record(i).description).unwrap();
                assert_eq!(hits[0].id, snap.record(i).id);
            }
        }));
    }
    state.swap_index(Some(next));
    for h in handles {
        h.join().unwrap();
    }
    assert_eq!(state.index().unwrap().fingerprint(), fb);
}
