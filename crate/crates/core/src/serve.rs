//! HTTP endpoints for the interactive decision-graph explorer.
//!
//! `GET /api/profile`, `GET /api/gamma`, `POST /api/select`,
//! `POST /api/select-k` and `GET /api/data`. All state is loaded once at
//! startup and never mutated; every selection request computes a fresh
//! clustering.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::centers::{self, CenterSelection};
use crate::clustering::{self, ClusteringResult, ImprovedConfig, IterationMode};
use crate::dataset::{self, Dataset};
use crate::density::{self, DensityKernel, DensityProfile};
use crate::distance::{pairwise_euclidean, KernelSpec, PairwiseDistances};
use crate::error::{Error, Result};
use crate::exec::Exec;

const INDEX_HTML: &str = include_str!("../assets/index.html");

#[derive(Debug)]
pub struct ServeState {
    pub data: Dataset,
    pub dist: PairwiseDistances,
    pub profile: Option<DensityProfile>,
    /// Why the profile could not be built, when it is absent.
    pub profile_error: Option<String>,
    pub defaults: ImprovedConfig,
    /// Clustering computed at startup; colours `GET /api/data`.
    pub current: Option<ClusteringResult>,
}

impl ServeState {
    /// Builds distances and the density profile, then a startup clustering
    /// from `initial_k` top-gamma centers (or the gamma jump when `None`).
    pub fn new(
        data: Dataset,
        t: f64,
        kernel: DensityKernel,
        defaults: ImprovedConfig,
        initial_k: Option<usize>,
    ) -> Self {
        let dist = pairwise_euclidean(&data, defaults.exec);
        let (profile, profile_error) = match density::build_profile(&dist, t, kernel, defaults.exec) {
            Ok(p) => (Some(p), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let current = profile.as_ref().and_then(|p| {
            let sel = match initial_k {
                Some(k) => centers::select_top_k(p, k).ok()?,
                None => centers::select_by_jump(p, centers::DEFAULT_MAX_K.min(p.len().saturating_sub(1))).ok()?,
            };
            clustering::improved_kmeans_with_distances(&data, &dist, &sel, &defaults).ok()
        });
        Self {
            data,
            dist,
            profile,
            profile_error,
            defaults,
            current,
        }
    }
}

type Shared = Arc<ServeState>;

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(StatusCode::BAD_REQUEST, e.to_string())
    }
}

fn profile_of(state: &ServeState) -> std::result::Result<&DensityProfile, ApiError> {
    state.profile.as_ref().ok_or_else(|| {
        ApiError(
            StatusCode::CONFLICT,
            format!(
                "no density profile loaded: {}",
                state.profile_error.as_deref().unwrap_or("unknown reason")
            ),
        )
    })
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> std::result::Result<T, ApiError> {
    serde_json::from_slice(body)
        .map_err(|e| ApiError(StatusCode::BAD_REQUEST, format!("malformed request body: {e}")))
}

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/", get(|| async { Html(INDEX_HTML) }))
        .route("/api/profile", get(get_profile))
        .route("/api/gamma", get(get_gamma))
        .route("/api/select", post(post_select))
        .route("/api/select-k", post(post_select_k))
        .route("/api/data", get(get_data))
        .with_state(state)
}

async fn get_profile(State(state): State<Shared>) -> std::result::Result<Json<serde_json::Value>, ApiError> {
    Ok(Json(profile_of(&state)?.points_json()))
}

async fn get_gamma(State(state): State<Shared>) -> std::result::Result<Json<serde_json::Value>, ApiError> {
    let profile = profile_of(&state)?;
    let values: Vec<_> = profile
        .gamma_order()
        .into_iter()
        .map(|i| json!({ "i": i, "gamma": profile.gamma[i] }))
        .collect();
    let max_k = centers::DEFAULT_MAX_K.min(profile.len().saturating_sub(1));
    let suggested = centers::select_by_jump(profile, max_k).ok();
    let (suggested_k, ratio) = match &suggested {
        Some(CenterSelection {
            indices,
            method: centers::SelectionMethod::GammaJump { ratio, .. },
        }) => (Some(indices.len()), Some(*ratio)),
        _ => (None, None),
    };
    Ok(Json(json!({ "values": values, "suggestedK": suggested_k, "jumpRatio": ratio })))
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct SelectRequest {
    rho_min: f64,
    delta_min: f64,
    q: Option<f64>,
    mode: Option<IterationMode>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SelectKRequest {
    k: usize,
    q: Option<f64>,
    mode: Option<IterationMode>,
}

#[derive(Debug, Serialize)]
pub struct SelectResponse {
    pub centers: Vec<usize>,
    pub assignment: Vec<usize>,
    pub e: f64,
    /// Fraction in `[0, 1]`, or null without labels.
    pub accuracy: Option<f64>,
}

fn cluster_selection(
    state: &ServeState,
    sel: CenterSelection,
    q: Option<f64>,
    mode: Option<IterationMode>,
) -> Result<SelectResponse> {
    let mut cfg = state.defaults.clone();
    if let Some(q) = q {
        cfg.q = KernelSpec::new(q)?;
    }
    if let Some(mode) = mode {
        cfg.mode = mode;
    }
    cfg.exec = Exec::Sequential;
    let result = clustering::improved_kmeans_with_distances(&state.data, &state.dist, &sel, &cfg)?;
    let accuracy = match state.data.labels() {
        Some(labels) => Some(dataset::accuracy(&result.assignment, labels)?.accuracy),
        None => None,
    };
    Ok(SelectResponse {
        centers: sel.indices,
        assignment: result.assignment,
        e: result.criterion_e,
        accuracy,
    })
}

async fn run_blocking<F>(state: Shared, f: F) -> std::result::Result<Json<SelectResponse>, ApiError>
where
    F: FnOnce(&ServeState) -> std::result::Result<SelectResponse, ApiError> + Send + 'static,
{
    tokio::task::spawn_blocking(move || f(&state))
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
        .map(Json)
}

async fn post_select(
    State(state): State<Shared>,
    body: Bytes,
) -> std::result::Result<Json<SelectResponse>, ApiError> {
    let req: SelectRequest = parse_body(&body)?;
    profile_of(&state)?;
    run_blocking(state, move |s| {
        let profile = profile_of(s)?;
        let sel = centers::select_by_rectangle(profile, req.rho_min, req.delta_min)?;
        Ok(cluster_selection(s, sel, req.q, req.mode)?)
    })
    .await
}

async fn post_select_k(
    State(state): State<Shared>,
    body: Bytes,
) -> std::result::Result<Json<SelectResponse>, ApiError> {
    let req: SelectKRequest = parse_body(&body)?;
    profile_of(&state)?;
    run_blocking(state, move |s| {
        let sel = centers::select_top_k(profile_of(s)?, req.k)?;
        Ok(cluster_selection(s, sel, req.q, req.mode)?)
    })
    .await
}

async fn get_data(
    State(state): State<Shared>,
    Query(params): Query<HashMap<String, String>>,
) -> std::result::Result<Json<serde_json::Value>, ApiError> {
    let data = &state.data;
    let column = |key: &str, default: Option<usize>| -> std::result::Result<Option<usize>, ApiError> {
        match params.get(key) {
            Some(v) => data
                .feature_index(v)
                .map(Some)
                .ok_or_else(|| ApiError(StatusCode::BAD_REQUEST, format!("unknown column {v:?}"))),
            None => Ok(default),
        }
    };
    let x = column("x", Some(0))?.expect("default x column");
    let y = column("y", (data.dim() > 1).then_some(1))?;
    let names = data.feature_names();
    let assignment = state.current.as_ref().map(|r| &r.assignment);
    let points: Vec<_> = (0..data.len())
        .map(|i| {
            let row = data.row(i);
            json!({
                "i": i,
                "x": row[x],
                "y": y.map_or(i as f64, |y| row[y]),
                "cluster": assignment.map(|a| a[i]),
                "label": data.labels().map(|l| l[i].clone()),
            })
        })
        .collect();
    Ok(Json(json!({
        "x": names[x],
        "y": y.map_or("index", |y| names[y].as_str()),
        "points": points,
    })))
}

/// Serves until Ctrl-C.
pub async fn serve(state: ServeState, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(state)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
