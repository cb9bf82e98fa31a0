mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use snqam_cli::server::{cors_layer, router, serve, AppState, BODY_LIMIT_BYTES};
use snqam_core::snqam::{load_model, Catalog, DEFAULT_THRESHOLD};
use snqam_core::wire::{ModelInfo, ScoreResponse, MAX_TEXT_CHARS};
use snqam_core::{load_lexicons, FeatureRow};
use tower::ServiceExt;

fn app(origins: &[&str]) -> Router {
    let dir = tempfile::tempdir().unwrap();
    let model = load_model(common::write_fixture_model(dir.path())).unwrap();
    let state = AppState {
        model,
        lexicons: load_lexicons(common::lexicon_dir()).unwrap(),
        catalog: Catalog::default(),
        threshold: DEFAULT_THRESHOLD,
    };
    let origins: Vec<String> = origins.iter().map(|s| s.to_string()).collect();
    router(Arc::new(state), cors_layer(&origins).unwrap())
}

async fn call(app: &Router, req: Request<Body>) -> (StatusCode, axum::http::HeaderMap, Vec<u8>) {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let headers = resp.headers().clone();
    let body = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, headers, body)
}

fn post(path: &str, body: impl Into<Body>) -> Request<Body> {
    Request::post(path)
        .header(header::CONTENT_TYPE, "application/json")
        .body(body.into())
        .unwrap()
}

fn error_code(body: &[u8]) -> String {
    let v: Value = serde_json::from_slice(body).unwrap();
    assert!(v.get("detail").is_some(), "detail missing: {v}");
    v["code"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn health_and_model() {
    let app = app(&[]);
    let (status, _, body) = call(&app, Request::get("/healthz").body(Body::empty()).unwrap()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, b"ok");

    let (status, headers, body) = call(&app, Request::get("/v1/model").body(Body::empty()).unwrap()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(headers[header::CONTENT_TYPE], "application/json");
    let info: ModelInfo = serde_json::from_slice(&body).unwrap();
    assert_eq!(info.rows, 50);
    assert_eq!(info.created_at, "2014-07-01T00:00:00+00:00");
    assert_eq!(info.features, 44);
}

#[tokio::test]
async fn score_and_extract() {
    let app = app(&[]);
    let (status, _, body) = call(&app, post("/v1/score", r#"{"text":"今天天气很好！"}"#)).await;
    assert_eq!(status, StatusCode::OK);
    let resp: ScoreResponse = serde_json::from_slice(&body).unwrap();
    assert_eq!(resp.facets.len(), 8);

    let (status, _, _) = call(&app, post("/v1/score", r#"{"text":""}"#)).await;
    assert_eq!(status, StatusCode::OK);

    let (status, _, body) = call(&app, post("/v1/extract", r#"{"text":"【标题】你好？","has_image":true}"#)).await;
    assert_eq!(status, StatusCode::OK);
    let row: FeatureRow = serde_json::from_slice(&body).unwrap();
    assert_eq!(row.features.has_head, 1.0);
    assert_eq!(row.features.has_image, 1.0);
    assert_eq!(row.features.question_mark, 1.0);
}

#[tokio::test]
async fn bad_requests() {
    let app = app(&[]);
    for body in [r#"{"text":5}"#, "{not json", r#"{"text":"a","extra":1}"#, ""] {
        let (status, _, out) = call(&app, post("/v1/score", body)).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
        assert_eq!(error_code(&out), "invalid_request");
    }

    let long = serde_json::json!({ "text": "字".repeat(MAX_TEXT_CHARS + 1) }).to_string();
    let (status, _, out) = call(&app, post("/v1/score", long)).await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE);
    assert_eq!(error_code(&out), "payload_too_large");

    // Exactly at the limit is accepted.
    let edge = serde_json::json!({ "text": "字".repeat(MAX_TEXT_CHARS) }).to_string();
    let (status, _, _) = call(&app, post("/v1/score", edge)).await;
    assert_eq!(status, StatusCode::OK);

    let huge = format!(r#"{{"text":"{}"}}"#, "a".repeat(BODY_LIMIT_BYTES + 10));
    let (status, _, out) = call(&app, post("/v1/score", huge)).await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE);
    assert_eq!(error_code(&out), "payload_too_large");

    let (status, _, out) = call(&app, Request::get("/v2/nothing").body(Body::empty()).unwrap()).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(error_code(&out), "not_found");
}

#[tokio::test]
async fn cors_allowlist() {
    let preflight = |origin: &str| {
        Request::builder()
            .method(Method::OPTIONS)
            .uri("/v1/score")
            .header(header::ORIGIN, origin)
            .header(header::ACCESS_CONTROL_REQUEST_METHOD, "POST")
            .header(header::ACCESS_CONTROL_REQUEST_HEADERS, "content-type")
            .body(Body::empty())
            .unwrap()
    };
    let listed = app(&["http://localhost:5173"]);
    let (_, headers, _) = call(&listed, preflight("http://localhost:5173")).await;
    assert_eq!(headers[header::ACCESS_CONTROL_ALLOW_ORIGIN], "http://localhost:5173");
    let (_, headers, _) = call(&listed, preflight("http://evil.example")).await;
    assert!(headers.get(header::ACCESS_CONTROL_ALLOW_ORIGIN).is_none());

    let open = app(&["*"]);
    let (_, headers, _) = call(&open, preflight("http://anywhere.example")).await;
    assert_eq!(headers[header::ACCESS_CONTROL_ALLOW_ORIGIN], "*");
}

#[tokio::test]
async fn serves_over_tcp() {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let server = tokio::spawn(serve(listener, app(&[])));

    let raw = tokio::task::spawn_blocking(move || {
        use std::io::{Read, Write};
        let mut stream = std::net::TcpStream::connect(addr).unwrap();
        write!(stream, "GET /healthz HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n").unwrap();
        let mut raw = String::new();
        stream.read_to_string(&mut raw).unwrap();
        raw
    })
    .await
    .unwrap();
    assert!(raw.starts_with("HTTP/1.1 200"), "{raw}");
    assert!(raw.ends_with("ok"), "{raw}");
    server.abort();
}
