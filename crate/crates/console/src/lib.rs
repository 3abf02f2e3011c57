//! Read-only replay service over precomputed predictions.
//!
//! Endpoints:
//!
//! - `GET /scenarios`
//! - `GET /scenarios/{id}/detections?from&to&cursor`
//! - `GET /scenarios/{id}/track?from&to`
//! - `GET /model/info`
//! - `GET /ui/...` static console assets
//!
//! Timestamps are UNIX milliseconds. Errors are `{"error": .., "code": ..}`.

mod store;

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::Serialize;
use tower_http::services::ServeDir;

pub use store::{
    polylines, summarize, DetectionRow, ModelInfo, ScenarioInfo, Store, Summary, TargetInfo, TrackPoint,
    TRACK_GATE_M,
};

/// Rows per detections response; longer windows continue via `cursor`.
pub const PAGE_ROWS: usize = 10_000;

const PLACEHOLDER_UI: &str = "<!doctype html><html><head><meta charset=\"utf-8\"><title>URANUS console</title></head>\
<body><p>No console assets configured. The JSON API is available under <code>/scenarios</code> and <code>/model/info</code>.</p></body></html>";

#[derive(Debug, Serialize)]
pub struct ApiError {
    pub error: String,
    pub code: &'static str,
    #[serde(skip)]
    status: StatusCode,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, error: impl Into<String>) -> Self {
        ApiError {
            error: error.into(),
            code,
            status,
        }
    }

    fn not_found(what: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", what)
    }

    fn bad_request(why: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", why)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}

#[derive(Debug, Default, PartialEq)]
pub struct WindowParams {
    pub from: Option<u64>,
    pub to: Option<u64>,
    pub cursor: Option<String>,
}

impl WindowParams {
    /// Parse raw query pairs so malformed values get the JSON error body.
    pub fn parse(raw: &BTreeMap<String, String>) -> Result<Self, ApiError> {
        let time = |k: &str| -> Result<Option<u64>, ApiError> {
            raw.get(k)
                .map(|v| {
                    v.parse::<u64>()
                        .map_err(|_| ApiError::bad_request(format!("{k} must be UNIX milliseconds, got {v:?}")))
                })
                .transpose()
        };
        Ok(WindowParams {
            from: time("from")?,
            to: time("to")?,
            cursor: raw.get("cursor").cloned(),
        })
    }
}

#[derive(Debug, Serialize)]
pub struct DetectionPage {
    pub scenario: String,
    pub from: u64,
    pub to: u64,
    /// Rows in the whole window, across pages.
    pub total: usize,
    pub rows: Vec<DetectionRow>,
    pub next_cursor: Option<String>,
    /// Over the rows of this response only.
    pub summary: Option<Summary>,
}

#[derive(Debug, Serialize)]
pub struct TrackResponse {
    pub scenario: String,
    pub from: u64,
    pub to: u64,
    pub polylines: Vec<Vec<TrackPoint>>,
}

type Shared = Arc<Store>;

/// Static assets for `/ui/`; without a directory a placeholder page is served.
#[derive(Debug, Clone, Default)]
pub struct UiAssets(pub Option<PathBuf>);

pub fn router(store: impl Into<Arc<Store>>, ui: UiAssets) -> Router {
    let api = Router::new()
        .route("/scenarios", get(list_scenarios))
        .route("/scenarios/{id}/detections", get(detections))
        .route("/scenarios/{id}/track", get(track))
        .route("/model/info", get(model_info))
        .with_state(store.into());
    let api = match ui.0 {
        Some(dir) => api.nest_service("/ui", ServeDir::new(dir).append_index_html_on_directories(true)),
        None => api
            .route("/ui", get(|| async { Html(PLACEHOLDER_UI) }))
            .route("/ui/", get(|| async { Html(PLACEHOLDER_UI) })),
    };
    api.fallback(|| async { ApiError::not_found("no such endpoint") })
}

async fn list_scenarios(State(store): State<Shared>) -> Json<Vec<ScenarioInfo>> {
    Json(store.list())
}

/// Window bounds, defaulting to the scenario's extent.
fn bounds(store: &Store, id: &str, p: &WindowParams) -> Result<(u64, u64), ApiError> {
    let info = store
        .list()
        .into_iter()
        .find(|s| s.id == id)
        .ok_or_else(|| ApiError::not_found(format!("unknown scenario {id:?}")))?;
    let from = p.from.or(info.from).unwrap_or(0);
    let to = p.to.or(info.to).unwrap_or(0);
    if from > to {
        return Err(ApiError::bad_request(format!("from {from} is after to {to}")));
    }
    Ok((from, to))
}

async fn detections(
    State(store): State<Shared>,
    Path(id): Path<String>,
    Query(raw): Query<BTreeMap<String, String>>,
) -> Result<Json<DetectionPage>, ApiError> {
    let p = WindowParams::parse(&raw)?;
    let (from, to) = bounds(&store, &id, &p)?;
    let rows = store.window(&id, from, to).unwrap_or(&[]);
    let start = match p.cursor.as_deref() {
        None => 0,
        Some(c) => c
            .parse::<usize>()
            .ok()
            .filter(|&n| n <= rows.len())
            .ok_or_else(|| ApiError::bad_request(format!("invalid cursor {c:?}")))?,
    };
    let end = (start + PAGE_ROWS).min(rows.len());
    let page: Vec<_> = rows[start..end].iter().collect();
    Ok(Json(DetectionPage {
        scenario: id,
        from,
        to,
        total: rows.len(),
        rows: page.iter().map(|r| DetectionRow::from(*r)).collect(),
        next_cursor: (end < rows.len()).then(|| end.to_string()),
        summary: summarize(&page),
    }))
}

async fn track(
    State(store): State<Shared>,
    Path(id): Path<String>,
    Query(raw): Query<BTreeMap<String, String>>,
) -> Result<Json<TrackResponse>, ApiError> {
    let p = WindowParams::parse(&raw)?;
    let (from, to) = bounds(&store, &id, &p)?;
    let rows: Vec<_> = store.window(&id, from, to).unwrap_or(&[]).iter().collect();
    Ok(Json(TrackResponse {
        scenario: id,
        from,
        to,
        polylines: polylines(&rows, TRACK_GATE_M),
    }))
}

async fn model_info(State(store): State<Shared>) -> Result<Json<ModelInfo>, ApiError> {
    store
        .model()
        .cloned()
        .map(Json)
        .ok_or_else(|| ApiError::not_found("no model bundle loaded"))
}

/// Bind and serve until the process is stopped.
pub async fn serve(addr: SocketAddr, store: Store, ui: UiAssets) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(store, ui)).await
}
