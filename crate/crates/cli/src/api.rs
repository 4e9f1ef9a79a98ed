//! Local HTTP JSON API over a single session. Mutations take the write
//! lock; reads share the read lock. Every response body carries the session
//! revision.

use std::collections::BTreeMap;
use std::sync::{Arc, RwLock};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};
use skm::kig::{fraternize, separation_verdict};
use skm::modcheck::Move;
use skm::ssa::{replica_rng, replica_stats, simulate_with, SimOptions};

use crate::commands::{network_json, session_json, Variant};
use crate::parse::parse_set;
use crate::session::{Session, SessionError, TreeMode};

pub type Shared = Arc<RwLock<Session>>;

/// Largest replica count a single request may ask for.
pub const MAX_REPLICAS: u64 = 100_000;

pub fn router(session: Session) -> Router {
    router_shared(Arc::new(RwLock::new(session)))
}

pub fn router_shared(state: Shared) -> Router {
    Router::new()
        .route("/network", get(network))
        .route("/kig", get(kig))
        .route("/tree", get(tree))
        .route("/modularization", get(modularization))
        .route("/report", get(report))
        .route("/aggregate", post(aggregate))
        .route("/undo", post(undo))
        .route("/redo", post(redo))
        .route("/copy", post(copy))
        .route("/reset", post(reset))
        .route("/separation", get(separation))
        .route("/simulate", post(simulate))
        .with_state(state)
}

struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
    revision: u64,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({"revision": self.revision, "error": {"code": self.code, "message": self.message}});
        (self.status, Json(body)).into_response()
    }
}

fn bad_request(revision: u64, message: impl Into<String>) -> ApiError {
    ApiError { status: StatusCode::BAD_REQUEST, code: "bad_request", message: message.into(), revision }
}

fn session_error(revision: u64, e: SessionError) -> ApiError {
    let status = match e {
        SessionError::NotAdjacent(..) | SessionError::UnknownCluster(_) | SessionError::InvalidCopy(_) => {
            StatusCode::UNPROCESSABLE_ENTITY
        }
        SessionError::NothingToUndo | SessionError::NothingToRedo => StatusCode::CONFLICT,
        SessionError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
    };
    ApiError { status, code: e.code(), message: e.to_string(), revision }
}

type ApiResult = Result<Json<Value>, ApiError>;

fn with_revision(revision: u64, mut body: Value) -> Json<Value> {
    body["revision"] = json!(revision);
    Json(body)
}

fn read(state: &Shared) -> std::sync::RwLockReadGuard<'_, Session> {
    state.read().unwrap_or_else(|e| e.into_inner())
}

fn write(state: &Shared) -> std::sync::RwLockWriteGuard<'_, Session> {
    state.write().unwrap_or_else(|e| e.into_inner())
}

fn tree_body(s: &Session) -> Value {
    let mut v = session_json(s);
    v["can_undo"] = json!(s.can_undo());
    v["can_redo"] = json!(s.can_redo());
    with_revision(s.revision(), v).0
}

async fn network(State(state): State<Shared>) -> ApiResult {
    let s = read(&state);
    Ok(with_revision(s.revision(), json!({"network": network_json(s.net())})))
}

#[derive(Deserialize)]
struct KigQuery {
    variant: Option<String>,
}

async fn kig(State(state): State<Shared>, q: Result<Query<KigQuery>, QueryRejection>) -> ApiResult {
    let s = read(&state);
    let q = q.map_err(|e| bad_request(s.revision(), e.body_text()))?;
    let variant = match q.variant.as_deref().unwrap_or("directed") {
        "directed" => Variant::Directed,
        "undirected" => Variant::Undirected,
        "moral" => Variant::Moral,
        "fraternized" => Variant::Fraternized,
        other => return Err(bad_request(s.revision(), format!("unknown variant {other:?}"))),
    };
    let graph = match variant {
        Variant::Directed => json!(s.kig().to_json()),
        Variant::Undirected => json!(s.undirected().to_json()),
        Variant::Moral => json!(s.kig().moralize().to_json()),
        Variant::Fraternized => json!(fraternize(s.net(), s.kig()).to_json()),
    };
    Ok(with_revision(s.revision(), json!({"variant": variant.name(), "graph": graph})))
}

async fn tree(State(state): State<Shared>) -> ApiResult {
    Ok(Json(tree_body(&read(&state))))
}

async fn modularization(State(state): State<Shared>) -> ApiResult {
    let s = read(&state);
    let v = session_json(&s);
    Ok(with_revision(s.revision(), json!({"modularization": v["modularization"], "labels": v["labels"], "copies": v["copies"]})))
}

async fn report(State(state): State<Shared>) -> ApiResult {
    let s = read(&state);
    Ok(with_revision(s.revision(), json!({"report": s.report(), "markdown": s.report().to_markdown()})))
}

fn body<T>(s: &Shared, b: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    b.map(|Json(t)| t).map_err(|e| bad_request(read(s).revision(), e.body_text()))
}

#[derive(Deserialize)]
struct AggregateBody {
    i: usize,
    j: usize,
}

async fn aggregate(State(state): State<Shared>, b: Result<Json<AggregateBody>, JsonRejection>) -> ApiResult {
    let AggregateBody { i, j } = body(&state, b)?;
    let mut s = write(&state);
    s.aggregate(i, j).map_err(|e| session_error(s.revision(), e))?;
    Ok(Json(tree_body(&s)))
}

async fn undo(State(state): State<Shared>) -> ApiResult {
    let mut s = write(&state);
    s.undo().map_err(|e| session_error(s.revision(), e))?;
    Ok(Json(tree_body(&s)))
}

async fn redo(State(state): State<Shared>) -> ApiResult {
    let mut s = write(&state);
    s.redo().map_err(|e| session_error(s.revision(), e))?;
    Ok(Json(tree_body(&s)))
}

#[derive(Deserialize)]
struct CopyBody {
    moves: Vec<Move>,
}

async fn copy(State(state): State<Shared>, b: Result<Json<CopyBody>, JsonRejection>) -> ApiResult {
    let CopyBody { moves } = body(&state, b)?;
    let mut s = write(&state);
    s.copy(&moves).map_err(|e| session_error(s.revision(), e))?;
    Ok(Json(tree_body(&s)))
}

#[derive(Deserialize)]
struct ResetBody {
    mode: TreeMode,
}

async fn reset(State(state): State<Shared>, b: Result<Json<ResetBody>, JsonRejection>) -> ApiResult {
    let ResetBody { mode } = body(&state, b)?;
    let mut s = write(&state);
    s.reset(mode).map_err(|e| session_error(s.revision(), e))?;
    Ok(Json(tree_body(&s)))
}

#[derive(Deserialize)]
struct SeparationQuery {
    a: String,
    b: String,
    #[serde(default)]
    d: String,
}

async fn separation(State(state): State<Shared>, q: Result<Query<SeparationQuery>, QueryRejection>) -> ApiResult {
    let s = read(&state);
    let rev = s.revision();
    let Query(q) = q.map_err(|e| bad_request(rev, e.body_text()))?;
    let set = |x: &str| parse_set(s.net(), x).map_err(|e| bad_request(rev, e));
    let (a, b, d) = (set(&q.a)?, set(&q.b)?, set(&q.d)?);
    let verdict = separation_verdict(s.net(), s.kig(), &a, &b, &d).map_err(|e| bad_request(rev, e.to_string()))?;
    Ok(with_revision(rev, json!({"verdict": verdict})))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum X0 {
    Named(BTreeMap<String, i64>),
    Positional(Vec<i64>),
}

#[derive(Deserialize)]
struct SimulateBody {
    #[serde(default)]
    x0: Option<X0>,
    t_end: f64,
    #[serde(default = "one")]
    replicas: u64,
    #[serde(default)]
    seed: u64,
}

fn one() -> u64 {
    1
}

async fn simulate(State(state): State<Shared>, b: Result<Json<SimulateBody>, JsonRejection>) -> ApiResult {
    let req = body(&state, b)?;
    let (net, rev) = {
        let s = read(&state);
        (s.net().clone(), s.revision())
    };
    let mut x0 = vec![0; net.n_species()];
    match req.x0 {
        Some(X0::Positional(v)) if v.len() == x0.len() => x0 = v,
        Some(X0::Positional(v)) => {
            return Err(bad_request(rev, format!("x0 needs {} counts, got {}", x0.len(), v.len())));
        }
        Some(X0::Named(m)) => {
            for (id, v) in m {
                let k = net.species_index(&id).map_err(|e| bad_request(rev, e.to_string()))?;
                x0[k] = v;
            }
        }
        None => {}
    }
    if !(1..=MAX_REPLICAS).contains(&req.replicas) {
        return Err(bad_request(rev, format!("replicas must be in 1..={MAX_REPLICAS}")));
    }
    let result = tokio::task::spawn_blocking(move || {
        let opts = SimOptions::default();
        let stats = replica_stats(&net, &x0, req.t_end, req.replicas, req.seed, opts)?;
        let trajectory = if req.replicas == 1 {
            Some(simulate_with(&net, &x0, req.t_end, &mut replica_rng(req.seed, 0), opts)?.to_json(&net))
        } else {
            None
        };
        Ok::<_, skm::ssa::SsaError>(json!({"stats": stats, "trajectory": trajectory}))
    })
    .await
    .map_err(|e| ApiError { status: StatusCode::INTERNAL_SERVER_ERROR, code: "internal", message: e.to_string(), revision: rev })?;
    let v = result.map_err(|e| ApiError { status: StatusCode::UNPROCESSABLE_ENTITY, code: "simulation", message: e.to_string(), revision: rev })?;
    Ok(with_revision(rev, v))
}
