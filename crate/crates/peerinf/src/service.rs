//! HTTP interface for interactive what-if sessions.
//!
//! | method | path                      | body                                   |
//! |--------|---------------------------|----------------------------------------|
//! | GET    | `/catalog`                |                                        |
//! | GET    | `/schema/pi-result`       |                                        |
//! | POST   | `/sessions`               | `{dataset, model, instance, seed?, background_rows?}` |
//! | GET    | `/sessions/{id}`          |                                        |
//! | DELETE | `/sessions/{id}`          |                                        |
//! | POST   | `/sessions/{id}/pi`       | `{zero_policy?, controllable?, means?}` |
//! | POST   | `/sessions/{id}/whatif`   | `{edits}`                              |
//! | GET    | `/sessions/{id}/history`  |                                        |
//!
//! Instances and edits map feature names to either encoded numbers or text
//! (category labels). Errors come back as `{"error": "..."}` with 404 for
//! unknown sessions, datasets or models, 409 while a PI computation for the
//! session is running, 413 when the request exceeds the configured size
//! caps and 422 for invalid input. The PI endpoint reports its computation
//! time in the `x-compute-time-ms` header so the body stays reproducible.

use std::collections::{BTreeMap, HashMap};
use std::future::Future;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, HeaderName, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use peerinf_core::{
    explain, Attribution, Dataset, Error, ExplainerConfig, FeatureSchema, Instance, Predictor,
    ZeroPolicy,
};
use serde::{Deserialize, Serialize};
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::document::{attribution_digest, AttributionDocument, FeatureValue, RESULT_SCHEMA};
use crate::io::SchemaFile;
use crate::pipeline::{
    background_for, build_instance, check_compatible, encode_edits, run_pi, CellValue, MeanSource,
    PiOptions,
};
use crate::store::ModelFile;

pub const COMPUTE_TIME_HEADER: &str = "x-compute-time-ms";

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub explainer: ExplainerConfig,
    /// Largest feature count accepted by the PI endpoint.
    pub max_features: usize,
    /// Largest background size (after subsampling) a session may use.
    pub max_background_rows: usize,
    /// Origin allowed by CORS; `None` allows any.
    pub allow_origin: Option<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            explainer: ExplainerConfig::default(),
            max_features: 12,
            max_background_rows: 1000,
            allow_origin: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DatasetEntry {
    pub schema: SchemaFile,
    pub data: Arc<Dataset>,
}

/// Datasets and models sessions may refer to, by id.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    pub datasets: BTreeMap<String, DatasetEntry>,
    pub models: BTreeMap<String, Arc<ModelFile>>,
}

impl Catalog {
    pub fn insert_dataset(&mut self, id: impl Into<String>, schema: SchemaFile, data: Dataset) {
        self.datasets.insert(
            id.into(),
            DatasetEntry {
                schema,
                data: Arc::new(data),
            },
        );
    }

    pub fn insert_model(&mut self, id: impl Into<String>, model: ModelFile) {
        self.models.insert(id.into(), Arc::new(model));
    }
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    fn not_found(what: &str, id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, format!("unknown {} `{}`", what, id))
    }

    fn unprocessable(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, message)
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Capacity { .. } => StatusCode::PAYLOAD_TOO_LARGE,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        Self::new(status, e.to_string())
    }
}

impl From<crate::error::AppError> for ApiError {
    fn from(e: crate::error::AppError) -> Self {
        match e {
            crate::error::AppError::Core(e) => e.into(),
            other => Self::unprocessable(other.to_string()),
        }
    }
}

impl From<tokio::task::JoinError> for ApiError {
    fn from(e: tokio::task::JoinError) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Json(serde_json::json!({ "error": self.message }));
        (self.status, body).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    /// 1-based position in the session's edit sequence.
    pub step: usize,
    /// Encoded values of the edited features, in schema order.
    pub edits: Vec<FeatureValue>,
    pub prediction: u8,
    pub score: f64,
    pub attribution_digest: String,
}

#[derive(Debug)]
struct SessionState {
    initial: Instance,
    current: Instance,
    attribution: Attribution,
    history: Vec<HistoryEntry>,
}

/// One user's working instance and its edit history.
#[derive(Debug)]
pub struct Session {
    pub id: String,
    pub dataset: String,
    pub model_id: String,
    schema: Vec<FeatureSchema>,
    model: Arc<ModelFile>,
    data: Arc<Dataset>,
    background: Arc<Dataset>,
    explainer: ExplainerConfig,
    state: Mutex<SessionState>,
    pi_busy: AtomicBool,
}

/// Marks a PI computation in flight for a session until dropped.
#[derive(Debug)]
pub struct PiGuard(Arc<Session>);

impl Drop for PiGuard {
    fn drop(&mut self) {
        self.0.pi_busy.store(false, Ordering::Release);
    }
}

impl Session {
    pub fn try_begin_pi(self: &Arc<Self>) -> Option<PiGuard> {
        self.pi_busy
            .compare_exchange(false, true, Ordering::AcqRel, Ordering::Acquire)
            .ok()
            .map(|_| PiGuard(Arc::clone(self)))
    }

    fn names(&self) -> Vec<String> {
        self.schema.iter().map(|f| f.name.clone()).collect()
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, SessionState> {
        self.state.lock().unwrap_or_else(|p| p.into_inner())
    }

    fn view(&self) -> SessionView {
        let st = self.lock();
        SessionView {
            session_id: self.id.clone(),
            dataset: self.dataset.clone(),
            model: self.model_id.clone(),
            initial_instance: feature_values(&self.schema, &st.initial.values),
            instance: feature_values(&self.schema, &st.current.values),
            prediction: self.model.model.predict(&st.current.values),
            score: st.attribution.target_score,
            attribution: AttributionDocument::new(&self.names(), &st.attribution),
        }
    }
}

fn feature_values(schema: &[FeatureSchema], values: &[f64]) -> Vec<FeatureValue> {
    schema
        .iter()
        .zip(values)
        .map(|(f, &v)| FeatureValue {
            feature: f.name.clone(),
            value: v,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub dataset: String,
    pub model: String,
    pub initial_instance: Vec<FeatureValue>,
    pub instance: Vec<FeatureValue>,
    pub prediction: u8,
    pub score: f64,
    pub attribution: AttributionDocument,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub dataset: String,
    pub model: String,
    pub instance: BTreeMap<String, CellValue>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub background_rows: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiRequest {
    #[serde(default)]
    pub zero_policy: Option<ZeroPolicy>,
    #[serde(default)]
    pub controllable: Option<Vec<String>>,
    #[serde(default)]
    pub means: Option<MeanSource>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WhatIfRequest {
    #[serde(default)]
    pub edits: BTreeMap<String, CellValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhatIfResponse {
    pub step: usize,
    pub previous_prediction: u8,
    pub prediction: u8,
    pub score: f64,
    pub instance: Vec<FeatureValue>,
    pub attribution: AttributionDocument,
    /// New minus previous contribution, per feature.
    pub deltas: Vec<FeatureValue>,
}

struct Inner {
    catalog: Catalog,
    config: ServiceConfig,
    sessions: RwLock<HashMap<String, Arc<Session>>>,
    next_id: AtomicU64,
}

/// Shared service state; cheap to clone.
#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    pub fn new(catalog: Catalog, config: ServiceConfig) -> Self {
        Self(Arc::new(Inner {
            catalog,
            config,
            sessions: RwLock::new(HashMap::new()),
            next_id: AtomicU64::new(1),
        }))
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.0.config
    }

    pub fn session(&self, id: &str) -> Option<Arc<Session>> {
        self.0
            .sessions
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .get(id)
            .cloned()
    }

    fn find(&self, id: &str) -> ApiResult<Arc<Session>> {
        self.session(id)
            .ok_or_else(|| ApiError::not_found("session", id))
    }

    fn insert(&self, session: Session) -> Arc<Session> {
        let session = Arc::new(session);
        self.0
            .sessions
            .write()
            .unwrap_or_else(|p| p.into_inner())
            .insert(session.id.clone(), Arc::clone(&session));
        session
    }

    fn remove(&self, id: &str) -> Option<Arc<Session>> {
        self.0
            .sessions
            .write()
            .unwrap_or_else(|p| p.into_inner())
            .remove(id)
    }

    fn new_id(&self) -> String {
        let n = self.0.next_id.fetch_add(1, Ordering::Relaxed);
        let mut h = peerinf_core::digest::ContentHasher::new();
        h.u64(n).u64(std::process::id() as u64).u64(
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_nanos() as u64)
                .unwrap_or(0),
        );
        format!("s{}-{}", n, &h.finish()[..12])
    }
}

pub fn router(state: AppState) -> Router {
    let origin = match &state.config().allow_origin {
        Some(o) => {
            AllowOrigin::exact(HeaderValue::from_str(o).unwrap_or(HeaderValue::from_static("null")))
        }
        None => AllowOrigin::any(),
    };
    let cors = CorsLayer::new()
        .allow_origin(origin)
        .allow_methods([Method::GET, Method::POST, Method::DELETE])
        .allow_headers([header::CONTENT_TYPE])
        .expose_headers([HeaderName::from_static(COMPUTE_TIME_HEADER)]);
    Router::new()
        .route("/catalog", get(catalog))
        .route("/schema/pi-result", get(result_schema))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session).delete(delete_session))
        .route("/sessions/{id}/pi", post(compute_pi))
        .route("/sessions/{id}/whatif", post(what_if))
        .route("/sessions/{id}/history", get(history))
        .layer(cors)
        .with_state(state)
}

/// Serves `router(state)` on `listener` until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    state: AppState,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
}

async fn catalog(State(state): State<AppState>) -> Json<serde_json::Value> {
    let c = &state.0.catalog;
    let datasets: Vec<_> = c
        .datasets
        .iter()
        .map(|(id, d)| {
            serde_json::json!({
                "id": id,
                "label": d.schema.label,
                "rows": d.data.n_rows(),
                "features": d.schema.features,
            })
        })
        .collect();
    let models: Vec<_> = c
        .models
        .iter()
        .map(|(id, m)| {
            serde_json::json!({
                "id": id,
                "kind": m.model.metadata().kind,
                "feature_names": m.feature_names,
            })
        })
        .collect();
    Json(serde_json::json!({ "datasets": datasets, "models": models }))
}

async fn result_schema() -> impl IntoResponse {
    (
        [(header::CONTENT_TYPE, "application/schema+json")],
        RESULT_SCHEMA,
    )
}

fn parse_body<T: for<'de> Deserialize<'de> + Default>(body: &Bytes) -> ApiResult<T> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(body)
        .map_err(|e| ApiError::unprocessable(format!("invalid body: {}", e)))
}

async fn create_session(
    State(state): State<AppState>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<SessionView>)> {
    let req: CreateSession = serde_json::from_slice(&body)
        .map_err(|e| ApiError::unprocessable(format!("invalid body: {}", e)))?;
    let entry = state
        .0
        .catalog
        .datasets
        .get(&req.dataset)
        .ok_or_else(|| ApiError::not_found("dataset", &req.dataset))?
        .clone();
    let model = state
        .0
        .catalog
        .models
        .get(&req.model)
        .ok_or_else(|| ApiError::not_found("model", &req.model))?
        .clone();
    check_compatible(&entry.schema, &model)?;
    let x = build_instance(&entry.schema.features, &req.instance)?;

    let mut explainer = state.config().explainer.clone();
    if let Some(seed) = req.seed {
        explainer.seed = seed;
    }
    if let Some(rows) = req.background_rows {
        explainer.background_rows = rows;
    }
    explainer.validate()?;
    if explainer.background_rows > state.config().max_background_rows {
        return Err(ApiError::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            format!(
                "background_rows {} exceeds the limit of {}",
                explainer.background_rows,
                state.config().max_background_rows
            ),
        ));
    }
    let background = Arc::new(background_for(&entry.data, &model)?);

    let (attribution, model, background, explainer, x) = tokio::task::spawn_blocking(move || {
        explain(&model.model, &background, &x, &explainer)
            .map(|a| (a, model, background, explainer, x))
    })
    .await??;

    let session = state.insert(Session {
        id: state.new_id(),
        dataset: req.dataset,
        model_id: req.model,
        schema: entry.schema.features.clone(),
        model,
        data: entry.data,
        background,
        explainer,
        state: Mutex::new(SessionState {
            initial: x.clone(),
            current: x,
            attribution,
            history: Vec::new(),
        }),
        pi_busy: AtomicBool::new(false),
    });
    tracing::info!(session = %session.id, "session created");
    Ok((StatusCode::CREATED, Json(session.view())))
}

async fn get_session(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<Json<SessionView>> {
    Ok(Json(state.find(&id)?.view()))
}

async fn delete_session(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<StatusCode> {
    state
        .remove(&id)
        .map(|_| StatusCode::NO_CONTENT)
        .ok_or_else(|| ApiError::not_found("session", &id))
}

async fn history(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<Json<Vec<HistoryEntry>>> {
    let session = state.find(&id)?;
    let entries = session.lock().history.clone();
    Ok(Json(entries))
}

async fn compute_pi(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Response> {
    let session = state.find(&id)?;
    let req: PiRequest = parse_body(&body)?;
    let m = session.schema.len();
    if m > state.config().max_features {
        return Err(ApiError::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            format!(
                "{} features exceed the PI limit of {}",
                m,
                state.config().max_features
            ),
        ));
    }
    let rows = session
        .background
        .n_rows()
        .min(session.explainer.background_rows);
    if rows > state.config().max_background_rows {
        return Err(ApiError::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            format!(
                "{} background rows exceed the limit of {}",
                rows,
                state.config().max_background_rows
            ),
        ));
    }
    let guard = session.try_begin_pi().ok_or_else(|| {
        ApiError::new(
            StatusCode::CONFLICT,
            "a PI computation for this session is already running",
        )
    })?;
    let options = PiOptions {
        zero_policy: req.zero_policy.unwrap_or_default(),
        controllable: req.controllable,
        means: req.means.unwrap_or_default(),
    };
    let x = session.lock().current.clone();
    let started = Instant::now();
    let text = tokio::task::spawn_blocking(move || {
        let s = &guard.0;
        run_pi(
            &s.model.model,
            &s.explainer,
            &s.data,
            &s.background,
            &x,
            &options,
        )
        .map(|a| a.document.to_json())
    })
    .await??;
    let elapsed = started.elapsed().as_millis().to_string();
    tracing::info!(session = %id, ms = %elapsed, "pi computed");
    Ok((
        [
            (header::CONTENT_TYPE, "application/json".to_string()),
            (HeaderName::from_static(COMPUTE_TIME_HEADER), elapsed),
        ],
        text,
    )
        .into_response())
}

async fn what_if(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<WhatIfResponse>> {
    let session = state.find(&id)?;
    let req: WhatIfRequest = serde_json::from_slice(&body)
        .map_err(|e| ApiError::unprocessable(format!("invalid body: {}", e)))?;
    let edits = encode_edits(&session.schema, &req.edits)?;
    let response = tokio::task::spawn_blocking(move || -> ApiResult<WhatIfResponse> {
        let s = &session;
        let mut st = s.lock();
        let previous_prediction = s.model.model.predict(&st.current.values);
        let mut next = st.current.clone();
        for (&j, &v) in &edits {
            next.values[j] = v;
        }
        next.validate(&s.schema)?;
        let a = explain(&s.model.model, &s.background, &next, &s.explainer)?;
        let names = s.names();
        let deltas = names
            .iter()
            .zip(a.phi.iter().zip(&st.attribution.phi))
            .map(|(n, (new, old))| FeatureValue {
                feature: n.clone(),
                value: new - old,
            })
            .collect();
        let prediction = s.model.model.predict(&next.values);
        let step = st.history.len() + 1;
        st.history.push(HistoryEntry {
            step,
            edits: edits
                .iter()
                .map(|(&j, &v)| FeatureValue {
                    feature: names[j].clone(),
                    value: v,
                })
                .collect(),
            prediction,
            score: a.target_score,
            attribution_digest: attribution_digest(&a),
        });
        let out = WhatIfResponse {
            step,
            previous_prediction,
            prediction,
            score: a.target_score,
            instance: feature_values(&s.schema, &next.values),
            attribution: AttributionDocument::new(&names, &a),
            deltas,
        };
        st.current = next;
        st.attribution = a;
        Ok(out)
    })
    .await??;
    Ok(Json(response))
}
