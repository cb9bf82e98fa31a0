//! HTTP scoring service.

use std::sync::Arc;

use axum::body::{Body, Bytes};
use axum::extract::rejection::BytesRejection;
use axum::extract::{DefaultBodyLimit, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::Serialize;
use serde_json::json;
use snqam_core::snqam::{Catalog, QualityModel, SuggestOptions};
use snqam_core::wire::{respond, ErrorBody, ModelInfo, ScoreRequest, MAX_TEXT_CHARS};
use snqam_core::LexiconSet;
use tokio::net::TcpListener;
use tower_http::cors::{AllowOrigin, CorsLayer};

pub const BODY_LIMIT_BYTES: usize = 1 << 20;

/// Everything a request needs; never mutated after startup.
pub struct AppState {
    pub model: QualityModel,
    pub lexicons: LexiconSet,
    pub catalog: Catalog,
    pub threshold: f64,
}

impl AppState {
    fn suggest_options(&self) -> SuggestOptions<'_> {
        SuggestOptions {
            threshold: self.threshold,
            catalog: &self.catalog,
        }
    }
}

pub fn router(state: Arc<AppState>, cors: CorsLayer) -> Router {
    Router::new()
        .route("/healthz", get(|| async { "ok" }))
        .route("/v1/model", get(model_info))
        .route("/v1/score", post(score))
        .route("/v1/extract", post(extract))
        .fallback(|| async { error(StatusCode::NOT_FOUND, "not_found", "no such endpoint") })
        .layer(DefaultBodyLimit::max(BODY_LIMIT_BYTES))
        .layer(cors)
        .with_state(state)
}

/// `*` allows any origin; an empty list allows none.
pub fn cors_layer(origins: &[String]) -> anyhow::Result<CorsLayer> {
    let allow = if origins.iter().any(|o| o == "*") {
        AllowOrigin::any()
    } else {
        let values = origins
            .iter()
            .map(|o| HeaderValue::from_str(o).map_err(|_| anyhow::anyhow!("bad CORS origin {o:?}")))
            .collect::<anyhow::Result<Vec<_>>>()?;
        AllowOrigin::list(values)
    };
    Ok(CorsLayer::new()
        .allow_origin(allow)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]))
}

pub async fn serve(listener: TcpListener, app: Router) -> std::io::Result<()> {
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

fn json_body<T: Serialize>(status: StatusCode, value: &T) -> Response {
    let body = serde_json::to_string(value).expect("response serializes");
    (status, [(header::CONTENT_TYPE, "application/json")], Body::from(body)).into_response()
}

fn error(status: StatusCode, code: &str, message: impl Into<String>) -> Response {
    json_body(status, &ErrorBody::new(code, message))
}

fn parse_request(body: Result<Bytes, BytesRejection>) -> Result<ScoreRequest, Box<Response>> {
    let bytes = body.map_err(|rejection| {
        Box::new(if rejection.status() == StatusCode::PAYLOAD_TOO_LARGE {
            error(StatusCode::PAYLOAD_TOO_LARGE, "payload_too_large", rejection.body_text())
        } else {
            error(StatusCode::BAD_REQUEST, "invalid_request", rejection.body_text())
        })
    })?;
    let req: ScoreRequest = serde_json::from_slice(&bytes).map_err(|e| {
        Box::new(json_body(
            StatusCode::BAD_REQUEST,
            &ErrorBody::new("invalid_request", e.to_string())
                .with_detail(json!({"line": e.line(), "column": e.column()})),
        ))
    })?;
    if let Some(chars) = req.oversized() {
        return Err(Box::new(json_body(
            StatusCode::PAYLOAD_TOO_LARGE,
            &ErrorBody::new("payload_too_large", "text exceeds the character limit")
                .with_detail(json!({"chars": chars, "limit": MAX_TEXT_CHARS})),
        )));
    }
    Ok(req)
}

async fn score(State(state): State<Arc<AppState>>, body: Result<Bytes, BytesRejection>) -> Response {
    let req = match parse_request(body) {
        Ok(r) => r,
        Err(resp) => return *resp,
    };
    match respond(&req, &state.model, &state.lexicons, &state.suggest_options()) {
        Ok(resp) => json_body(StatusCode::OK, &resp),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, "model_error", e.to_string()),
    }
}

async fn extract(State(state): State<Arc<AppState>>, body: Result<Bytes, BytesRejection>) -> Response {
    match parse_request(body) {
        Ok(req) => json_body(StatusCode::OK, &req.featurize(&state.lexicons)),
        Err(resp) => *resp,
    }
}

async fn model_info(State(state): State<Arc<AppState>>) -> Response {
    json_body(StatusCode::OK, &ModelInfo::new(&state.model))
}
