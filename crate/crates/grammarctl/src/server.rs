//! JSON-over-HTTP access to one profile for the treebanking UI.
//!
//! Every request reads the profile from disk, so decisions recorded from
//! the command line show up immediately. Writes go through a single mutex
//! and the profile lock.

use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use grammarkit_core::grammar::Grammar;
use grammarkit_core::parser::DerivationTree;
use grammarkit_core::semantics::{check_wellformed, to_dmrs, Mrs};
use grammarkit_treebank::profile::record_decision;
use grammarkit_treebank::{compare_profiles, Profile, ProfileError, ProfileLock, Verdict};
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::Mutex;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub port: u16,
    pub grammar_dir: Option<PathBuf>,
    pub profile_dir: PathBuf,
    pub read_only: bool,
}

pub struct AppState {
    profile_dir: PathBuf,
    read_only: bool,
    writer: Mutex<()>,
}

#[derive(Debug)]
pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<ProfileError> for ApiError {
    fn from(e: ProfileError) -> Self {
        let status = match &e {
            ProfileError::UnknownItem(_) => StatusCode::NOT_FOUND,
            ProfileError::ReadingOutOfRange { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            ProfileError::Locked(_) => StatusCode::CONFLICT,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, e.to_string())
    }
}

type ApiResult = Result<Json<Value>, ApiError>;

pub fn router(profile_dir: PathBuf, read_only: bool) -> Router {
    let state = Arc::new(AppState { profile_dir, read_only, writer: Mutex::new(()) });
    Router::new()
        .route("/items", get(list_items))
        .route("/items/{id}", get(get_item))
        .route("/items/{id}/readings/{k}", get(get_reading))
        .route("/items/{id}/decision", post(post_decision))
        .route("/compare", get(get_compare))
        .with_state(state)
}

async fn load(state: &AppState) -> Result<Profile, ApiError> {
    let dir = state.profile_dir.clone();
    tokio::task::spawn_blocking(move || Profile::read(&dir))
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
        .map_err(ApiError::from)
}

fn summary(p: &Profile, id: u32) -> Value {
    let it = p.item(id).expect("caller checked the id");
    let run = p.run_for(id);
    let decision = p.active_decisions().get(&id).map(|d| serde_json::to_value(d).expect("decision serializes"));
    json!({
        "id": it.id,
        "text": it.text,
        "wf": it.wf,
        "length": it.length,
        "status": run.map(|r| r.status),
        "readings": run.map_or(0, |r| r.readings),
        "stored": p.readings(id).len(),
        "decision": decision,
    })
}

async fn list_items(State(state): State<Arc<AppState>>) -> ApiResult {
    let p = load(&state).await?;
    Ok(Json(Value::Array(p.items.iter().map(|it| summary(&p, it.id)).collect())))
}

fn check_item(p: &Profile, id: u32) -> Result<(), ApiError> {
    match p.item(id) {
        Some(_) => Ok(()),
        None => Err(ApiError(StatusCode::NOT_FOUND, format!("unknown item {id}"))),
    }
}

async fn get_item(State(state): State<Arc<AppState>>, Path(id): Path<u32>) -> ApiResult {
    let p = load(&state).await?;
    check_item(&p, id)?;
    let mut v = summary(&p, id);
    let readings: Vec<Value> = p
        .readings(id)
        .iter()
        .map(|r| json!({ "reading-index": r.reading_index, "derivation": r.derivation }))
        .collect();
    let history: Vec<&grammarkit_treebank::Decision> = p.decisions.iter().filter(|d| d.item_id == id).collect();
    v["results"] = json!(readings);
    v["history"] = json!(history);
    Ok(Json(v))
}

async fn get_reading(State(state): State<Arc<AppState>>, Path((id, k)): Path<(u32, usize)>) -> ApiResult {
    let p = load(&state).await?;
    check_item(&p, id)?;
    let rs = p.readings(id);
    let r = rs.get(k).ok_or_else(|| ApiError(StatusCode::NOT_FOUND, format!("item {id} has no reading {k}")))?;
    let internal = |m: String| ApiError(StatusCode::INTERNAL_SERVER_ERROR, m);
    let tree: DerivationTree = r.derivation.parse().map_err(|e| internal(format!("stored derivation: {e}")))?;
    let mrs: Mrs = r.mrs.parse().map_err(|e| internal(format!("stored MRS: {e}")))?;
    let report = check_wellformed(&mrs);
    let dmrs = to_dmrs(&mrs).ok();
    Ok(Json(json!({
        "item-id": id,
        "reading-index": k,
        "derivation": r.derivation,
        "tree": tree,
        "mrs": r.mrs,
        "wellformed": report.to_string(),
        "dmrs": dmrs,
        "dmrs-text": dmrs.as_ref().map(ToString::to_string),
    })))
}

#[derive(Debug, Deserialize)]
pub struct DecisionBody {
    #[serde(flatten)]
    verdict: Verdict,
    #[serde(default)]
    annotator: Option<String>,
}

async fn post_decision(
    State(state): State<Arc<AppState>>,
    Path(id): Path<u32>,
    Json(body): Json<DecisionBody>,
) -> ApiResult {
    if state.read_only {
        return Err(ApiError(StatusCode::FORBIDDEN, "service is read-only".into()));
    }
    let _guard = state.writer.lock().await;
    let dir = state.profile_dir.clone();
    let annotator = body.annotator.unwrap_or_else(|| "web".to_string());
    let verdict = body.verdict;
    let recorded = tokio::task::spawn_blocking(move || record_decision(&dir, id, verdict, &annotator))
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    let p = load(&state).await?;
    Ok(Json(json!({ "recorded": recorded.is_some(), "item": summary(&p, id) })))
}

#[derive(Debug, Deserialize)]
pub struct CompareQuery {
    against: PathBuf,
}

/// The served profile is the gold side; `against` is the new run.
async fn get_compare(State(state): State<Arc<AppState>>, Query(q): Query<CompareQuery>) -> ApiResult {
    let gold = load(&state).await?;
    let new = tokio::task::spawn_blocking(move || Profile::read(&q.against))
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
        .map_err(|e| ApiError(StatusCode::NOT_FOUND, e.to_string()))?;
    let report =
        compare_profiles(&gold, &new).map_err(|e| ApiError(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?;
    let mut v = serde_json::to_value(&report).expect("report serializes");
    v["has-regressions"] = json!(report.has_regressions());
    Ok(Json(v))
}

/// Checks the profile and then serves until interrupted.
pub fn serve(config: ServiceConfig) -> Result<(), String> {
    let profile = Profile::read(&config.profile_dir).map_err(|e| e.to_string())?;
    if let Some(dir) = &config.grammar_dir {
        let g = Grammar::load(dir).map_err(|e| e.to_string())?;
        if g.version() != profile.run.grammar_version {
            eprintln!(
                "warning: profile was made with grammar {} but {} is {}",
                profile.run.grammar_version,
                dir.display(),
                g.version()
            );
        }
    }
    if !config.read_only {
        // Fail now rather than on the first decision.
        drop(ProfileLock::acquire(&config.profile_dir).map_err(|e| e.to_string())?);
    }
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build().map_err(|e| e.to_string())?;
    rt.block_on(async {
        let addr = std::net::SocketAddr::from(([127, 0, 0, 1], config.port));
        let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| format!("{addr}: {e}"))?;
        eprintln!(
            "serving {} on http://{addr}{}",
            config.profile_dir.display(),
            if config.read_only { " (read-only)" } else { "" }
        );
        axum::serve(listener, router(config.profile_dir, config.read_only)).await.map_err(|e| e.to_string())
    })
}
