//! HTTP service over one immutable index.
//!
//! | route                       | response                                        |
//! |-----------------------------|-------------------------------------------------|
//! | `GET /health`               | `ok`                                            |
//! | `GET /images`               | `[{"image_id", "keypoints"}]`                   |
//! | `GET /images/{id}/keypoints`| `{"image_id", "keypoints": [[x, y, word]]}`     |
//! | `POST /query`               | `[{"image_id", "score", "query_center", "match_center"}]` |
//!
//! Errors are `{"error": message}` with status 400 or 404.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use pbsearch_core::search::ProfileIndex;
use pbsearch_core::{ImageBoW, Keypoint, SimilarityConfig, VisualWord};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use tower_http::cors::CorsLayer;

use crate::{format_score, search_hits};

pub const DEFAULT_K: usize = 10;

#[derive(Clone)]
pub struct AppState {
    index: Arc<ProfileIndex>,
    similarity: SimilarityConfig,
}

impl AppState {
    pub fn new(index: ProfileIndex, similarity: SimilarityConfig) -> Self {
        AppState {
            index: Arc::new(index),
            similarity,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryRequest {
    pub keypoints: Vec<(f64, f64, u32)>,
    #[serde(default)]
    pub k: Option<usize>,
}

#[derive(Debug, Serialize)]
struct ImageSummary<'a> {
    image_id: &'a str,
    keypoints: usize,
}

#[derive(Debug, Serialize)]
struct ImageKeypoints<'a> {
    image_id: &'a str,
    keypoints: Vec<(f64, f64, u32)>,
}

#[derive(Debug, Serialize)]
struct QueryHit {
    image_id: String,
    score: Box<RawValue>,
    query_center: (f64, f64),
    match_center: (f64, f64),
}

fn json<T: Serialize>(status: StatusCode, body: &T) -> Response {
    match serde_json::to_string(body) {
        Ok(text) => (status, [(header::CONTENT_TYPE, "application/json")], text).into_response(),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    let body = serde_json::json!({ "error": message.into() }).to_string();
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

async fn health() -> &'static str {
    "ok"
}

async fn list_images(State(state): State<AppState>) -> Response {
    let images: Vec<ImageSummary> = state
        .index
        .images()
        .iter()
        .map(|e| ImageSummary {
            image_id: &e.image.image_id,
            keypoints: e.image.len(),
        })
        .collect();
    json(StatusCode::OK, &images)
}

async fn image_keypoints(State(state): State<AppState>, Path(id): Path<String>) -> Response {
    match state.index.image(&id) {
        Some(entry) => json(
            StatusCode::OK,
            &ImageKeypoints {
                image_id: &entry.image.image_id,
                keypoints: entry.image.keypoints.iter().map(|k| (k.x, k.y, k.payload.0)).collect(),
            },
        ),
        None => error(StatusCode::NOT_FOUND, format!("unknown image {id:?}")),
    }
}

/// Parses and validates a `/query` body against the index.
pub fn parse_query(body: &[u8], index: &ProfileIndex) -> Result<(ImageBoW, usize), String> {
    let request: QueryRequest = serde_json::from_slice(body).map_err(|e| format!("malformed body: {e}"))?;
    let k = request.k.unwrap_or(DEFAULT_K);
    if k == 0 {
        return Err("k must be at least 1".into());
    }
    if request.keypoints.len() < 2 {
        return Err(format!("need at least 2 keypoints, got {}", request.keypoints.len()));
    }
    let codebook_size = index.config().codebook_size;
    let mut keypoints = Vec::with_capacity(request.keypoints.len());
    for (i, &(x, y, w)) in request.keypoints.iter().enumerate() {
        if w >= codebook_size {
            return Err(format!("keypoint {i}: word {w} outside codebook of size {codebook_size}"));
        }
        keypoints.push(Keypoint::new(x, y, VisualWord(w)));
    }
    Ok((ImageBoW::new("query", codebook_size, keypoints), k))
}

async fn query(State(state): State<AppState>, body: Bytes) -> Response {
    let (image, k) = match parse_query(&body, &state.index) {
        Ok(parsed) => parsed,
        Err(message) => return error(StatusCode::BAD_REQUEST, message),
    };
    let index = state.index.clone();
    let similarity = state.similarity;
    let hits = tokio::task::spawn_blocking(move || search_hits(&index, &image, &similarity, k)).await;
    match hits {
        Ok(Ok(hits)) => {
            let body: Vec<QueryHit> = hits
                .into_iter()
                .map(|h| QueryHit {
                    image_id: h.image_id,
                    score: RawValue::from_string(format_score(h.score)).expect("a decimal literal is valid JSON"),
                    query_center: h.query_center,
                    match_center: h.match_center,
                })
                .collect();
            json(StatusCode::OK, &body)
        }
        Ok(Err(e)) => error(StatusCode::BAD_REQUEST, e.to_string()),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

/// Routes with permissive cross-origin headers.
pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/images", get(list_images))
        .route("/images/{id}/keypoints", get(image_keypoints))
        .route("/query", post(query))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

/// Serves until interrupted.
pub async fn serve(state: AppState, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
