//! Local HTTP JSON service for animating models step by step.
//!
//! Every response body is canonical JSON; errors are `{"error": ...}` with
//! 400 (malformed or refused), 404 (unknown session) or 409 (stale version).

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use csmbench::dsl::compile;
use csmbench::kernel::load_system;
use csmbench::models::{desk_scenarios, open_shipped, shipped_scenarios, SHIPPED_MODELS};
use csmbench::session::{Session, SessionError};
use csmbench::view::{canonical_json, TraceView};
use serde::de::DeserializeOwned;
use serde::Serialize;
use tower_http::services::ServeDir;

use crate::report::*;

/// Sessions idle for longer than this are dropped.
pub const DEFAULT_IDLE: Duration = Duration::from_secs(30 * 60);

/// Largest `n` accepted by the auto endpoint.
pub const MAX_AUTO: usize = 100_000;

struct Entry {
    session: Session,
    used: Instant,
}

#[derive(Clone)]
pub struct AppState {
    sessions: Arc<RwLock<HashMap<String, Arc<Mutex<Entry>>>>>,
    next: Arc<AtomicU64>,
    idle: Duration,
    static_dir: Option<PathBuf>,
}

impl AppState {
    pub fn new(static_dir: Option<PathBuf>) -> Self {
        AppState {
            sessions: Arc::default(),
            next: Arc::new(AtomicU64::new(1)),
            idle: DEFAULT_IDLE,
            static_dir,
        }
    }

    pub fn with_idle(mut self, idle: Duration) -> Self {
        self.idle = idle;
        self
    }

    pub fn session_count(&self) -> usize {
        self.sessions.read().unwrap().len()
    }

    fn evict_idle(&self) {
        let now = Instant::now();
        self.sessions
            .write()
            .unwrap()
            .retain(|_, e| e.try_lock().map(|e| now.duration_since(e.used) <= self.idle).unwrap_or(true));
    }

    fn entry(&self, id: &str) -> Result<Arc<Mutex<Entry>>, ApiError> {
        self.evict_idle();
        self.sessions
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no session `{id}`")))
    }
}

pub struct ApiError {
    status: StatusCode,
    body: ErrorReport,
}

impl ApiError {
    fn new(status: StatusCode, error: impl Into<String>) -> Self {
        ApiError {
            status,
            body: ErrorReport {
                error: error.into(),
                diagnostics: Vec::new(),
            },
        }
    }

    fn bad(error: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, error)
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let status = match e {
            SessionError::Stale { .. } => StatusCode::CONFLICT,
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        json_response(self.status, &self.body)
    }
}

fn json_response<T: Serialize>(status: StatusCode, v: &T) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], canonical_json(v)).into_response()
}

fn ok<T: Serialize>(v: &T) -> Response {
    json_response(StatusCode::OK, v)
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad(format!("malformed request body: {e}")))
}

fn session_state(id: &str, s: &Session) -> SessionState {
    SessionState {
        id: id.to_string(),
        version: s.version(),
        trace_length: s.trace().len(),
        state: s.state_view(),
    }
}

pub fn router(state: AppState) -> Router {
    let api = Router::new()
        .route("/scenarios", get(scenarios))
        .route("/sessions", post(create))
        .route("/sessions/{id}", axum::routing::delete(remove))
        .route("/sessions/{id}/state", get(get_state))
        .route("/sessions/{id}/steps", get(get_steps))
        .route("/sessions/{id}/step", post(step))
        .route("/sessions/{id}/undo", post(undo))
        .route("/sessions/{id}/trace", get(get_trace))
        .route("/sessions/{id}/auto", post(auto));
    let api = match &state.static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(index)),
    };
    api.with_state(state)
}

/// Serves until interrupted.
pub async fn serve(addr: &str, state: AppState, json: bool) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    let address = listener.local_addr()?.to_string();
    if json {
        println!("{}", canonical_json(&ServeReport { address }));
    } else {
        println!("listening on http://{address}");
    }
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

async fn index() -> Html<&'static str> {
    Html(INDEX)
}

const INDEX: &str = "<!doctype html>\n<title>csmbench</title>\n<p>JSON API: <code>/scenarios</code>, \
<code>/sessions</code>. Start with <code>--static DIR</code> to serve a front end here.</p>\n";

async fn scenarios() -> Response {
    let desk: Vec<String> = desk_scenarios().iter().map(ToString::to_string).collect();
    let mut out: Vec<ScenarioEntry> = shipped_scenarios()
        .iter()
        .map(|s| ScenarioEntry {
            model: "handover".into(),
            system: s.system.clone(),
            scenario: Some(s.to_string()),
            desk: desk.contains(&s.to_string()),
            params: s.params.constants().iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        })
        .collect();
    for (name, _) in SHIPPED_MODELS.iter().filter(|(n, _)| *n != "handover") {
        if let Ok(def) = open_shipped(name, None) {
            out.push(ScenarioEntry {
                model: name.to_string(),
                system: def.name.clone(),
                scenario: None,
                desk: true,
                params: def.constants.iter().cloned().collect::<BTreeMap<_, _>>(),
            });
        }
    }
    ok(&out)
}

async fn create(State(app): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let req: NewSession = parse_body(&body)?;
    let def = match (&req.source, &req.model) {
        (Some(text), _) => compile(text, req.system.as_deref()).map_err(|e| model_error(&e))?,
        (None, Some(model)) => open_shipped(model, req.scenario.as_deref()).map_err(|e| ApiError::bad(e.to_string()))?,
        (None, None) => return Err(ApiError::bad("give `model` or `source`")),
    };
    let sys = load_system(&def).map_err(|es| {
        ApiError::bad(es.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))
    })?;
    app.evict_idle();
    let id = format!("s{}", app.next.fetch_add(1, Ordering::Relaxed));
    let session = Session::new(sys);
    let body = session_state(&id, &session);
    app.sessions.write().unwrap().insert(
        id,
        Arc::new(Mutex::new(Entry {
            session,
            used: Instant::now(),
        })),
    );
    Ok(json_response(StatusCode::CREATED, &body))
}

fn model_error(e: &csmbench::dsl::ModelError) -> ApiError {
    let mut err = ApiError::bad(e.to_string());
    if let csmbench::dsl::ModelError::Syntax(ds) = e {
        err.body.diagnostics = ds.iter().map(DiagnosticView::from).collect();
    }
    err
}

/// Runs `f` on the session with its lock held.
fn with_session<T>(app: &AppState, id: &str, f: impl FnOnce(&mut Session) -> Result<T, ApiError>) -> Result<T, ApiError> {
    let entry = app.entry(id)?;
    let mut e = entry.lock().unwrap();
    e.used = Instant::now();
    f(&mut e.session)
}

async fn remove(State(app): State<AppState>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    app.entry(&id)?;
    app.sessions.write().unwrap().remove(&id);
    Ok(StatusCode::NO_CONTENT)
}

async fn get_state(State(app): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    with_session(&app, &id, |s| Ok(ok(&session_state(&id, s))))
}

async fn get_steps(State(app): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    with_session(&app, &id, |s| Ok(ok(&s.enabled())))
}

async fn step(State(app): State<AppState>, Path(id): Path<String>, body: Bytes) -> Result<Response, ApiError> {
    let req: StepRequest = parse_body(&body)?;
    with_session(&app, &id, |s| {
        s.step(req.index, req.version)?;
        Ok(ok(&session_state(&id, s)))
    })
}

async fn undo(State(app): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    with_session(&app, &id, |s| {
        s.undo()?;
        Ok(ok(&session_state(&id, s)))
    })
}

async fn get_trace(State(app): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    with_session(&app, &id, |s| Ok(ok(&TraceView::new(s.system(), s.trace()))))
}

async fn auto(State(app): State<AppState>, Path(id): Path<String>, body: Bytes) -> Result<Response, ApiError> {
    let req: AutoRequest = parse_body(&body)?;
    if req.n > MAX_AUTO {
        return Err(ApiError::bad(format!("n must be at most {MAX_AUTO}")));
    }
    with_session(&app, &id, |s| {
        let fired = s.auto(req.n, req.seed);
        Ok(ok(&AutoReport {
            fired,
            session: session_state(&id, s),
        }))
    })
}
