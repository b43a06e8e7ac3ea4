//! HTTP API used by the web UI.
//!
//! | method | path                     | body / result                              |
//! |--------|--------------------------|--------------------------------------------|
//! | POST   | `/api/scores`            | raw file, `X-Filename` header → `{id, tracks}` |
//! | GET    | `/api/scores/{id}`       | canonical score JSON                       |
//! | POST   | `/api/comparisons`       | run options → `{id}`                       |
//! | GET    | `/api/comparisons`       | `[{id, createdAt, versionNames}]`          |
//! | GET    | `/api/comparisons/{id}`  | comparison document                        |
//!
//! Errors are `{"error": "..."}` with status 400, 404, 413 or 500.

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::BytesRejection;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::Serialize;
use serde_json::json;
use tabcompare_core::{
    build_document, load_score, track_summaries, write_canonical, write_document, BuildError,
    RunOptions, TrackInfo, VersionInput,
};
use tower_http::services::ServeDir;

use crate::store::{ComparisonSummary, Store};

/// Largest accepted request body.
pub const MAX_UPLOAD_BYTES: usize = 5 * 1024 * 1024;

const PLACEHOLDER_UI: &str = include_str!("placeholder.html");

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
    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }
    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, message)
    }
    fn internal(message: impl Into<String>) -> Self {
        let message = message.into();
        log::error!("{message}");
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

impl From<BytesRejection> for ApiError {
    fn from(r: BytesRejection) -> Self {
        let status = r.status();
        let message = if status == StatusCode::PAYLOAD_TOO_LARGE {
            format!("request body exceeds {MAX_UPLOAD_BYTES} bytes")
        } else {
            r.body_text()
        };
        ApiError::new(status, message)
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Serialize)]
pub struct UploadResponse {
    pub id: String,
    pub tracks: Vec<TrackInfo>,
}

pub fn router(store: Arc<Store>, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/scores", axum::routing::post(upload_score))
        .route("/scores/{id}", get(get_score))
        .route(
            "/comparisons",
            get(list_comparisons).post(create_comparison),
        )
        .route("/comparisons/{id}", get(get_comparison))
        .fallback(|| async { ApiError::not_found("no such endpoint") })
        .layer(DefaultBodyLimit::max(MAX_UPLOAD_BYTES))
        .with_state(store);
    let app = Router::new().nest("/api", api);
    match ui_dir {
        Some(dir) => {
            app.fallback_service(ServeDir::new(dir).append_index_html_on_directories(true))
        }
        None => app.route("/", get(|| async { Html(PLACEHOLDER_UI) })),
    }
}

/// Base name of the client-supplied file name, or `upload`.
fn upload_name(headers: &HeaderMap) -> String {
    headers
        .get("x-filename")
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.rsplit(['/', '\\']).next())
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .unwrap_or("upload")
        .to_owned()
}

fn json_text(body: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

async fn upload_score(
    State(store): State<Arc<Store>>,
    headers: HeaderMap,
    body: Result<Bytes, BytesRejection>,
) -> ApiResult<Json<UploadResponse>> {
    let body = body?;
    let score = load_score(&body).map_err(|e| ApiError::bad_request(e.to_string()))?;
    let tracks = track_summaries(&score);
    let stored = store
        .put_score(&body, &upload_name(&headers), score)
        .map_err(|e| ApiError::internal(e.to_string()))?;
    Ok(Json(UploadResponse {
        id: stored.id,
        tracks,
    }))
}

async fn get_score(State(store): State<Arc<Store>>, Path(id): Path<String>) -> ApiResult<Response> {
    let stored = store
        .score(&id)
        .ok_or_else(|| ApiError::not_found(format!("unknown score {id}")))?;
    Ok(json_text(write_canonical(&stored.score)))
}

async fn create_comparison(
    State(store): State<Arc<Store>>,
    body: Result<Bytes, BytesRejection>,
) -> ApiResult<(StatusCode, Json<serde_json::Value>)> {
    let body = body?;
    let options: RunOptions = serde_json::from_slice(&body)
        .map_err(|e| ApiError::bad_request(format!("invalid run options: {e}")))?;
    options
        .check()
        .map_err(|e| ApiError::bad_request(e.to_string()))?;
    let scores = options
        .versions
        .iter()
        .map(|v| {
            store
                .score(&v.source)
                .ok_or_else(|| ApiError::bad_request(format!("unknown score {}", v.source)))
        })
        .collect::<ApiResult<Vec<_>>>()?;

    let built = tokio::task::spawn_blocking(move || {
        let inputs: Vec<VersionInput<'_>> = scores
            .iter()
            .map(|s| VersionInput {
                name: &s.filename,
                score: &s.score,
            })
            .collect();
        let names = scores
            .iter()
            .map(|s| s.filename.clone())
            .collect::<Vec<_>>();
        build_document(&inputs, &options).map(|doc| (write_document(&doc), names))
    })
    .await
    .map_err(|e| ApiError::internal(format!("comparison task failed: {e}")))?;
    let (document, names) = built.map_err(|e| match e {
        BuildError::Config(c) => ApiError::bad_request(c.to_string()),
        e @ BuildError::Internal(_) => ApiError::internal(e.to_string()),
    })?;

    let created_at = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true);
    let stored = store
        .put_comparison(document, names, created_at)
        .map_err(|e| ApiError::internal(e.to_string()))?;
    Ok((
        StatusCode::CREATED,
        Json(json!({ "id": stored.summary.id })),
    ))
}

async fn list_comparisons(State(store): State<Arc<Store>>) -> Json<Vec<ComparisonSummary>> {
    Json(store.comparisons())
}

async fn get_comparison(
    State(store): State<Arc<Store>>,
    Path(id): Path<String>,
) -> ApiResult<Response> {
    let stored = store
        .comparison(&id)
        .ok_or_else(|| ApiError::not_found(format!("unknown comparison {id}")))?;
    Ok(json_text(stored.document.to_string()))
}
