//! HTTP JSON service that lets a client play kaleidoscope-roulette matches
//! one set at a time. Responses carry symbols, balance and the resonance
//! indicator only; hidden parameters and recovered values never leave the
//! server.
//!
//! Routes:
//! - `POST /session` with a scenario config returns `{id, snapshot}`
//! - `GET /session/{id}/snapshot`
//! - `POST /session/{id}/action` with `{bet: {symbol, stake}, control: [..]}`
//! - `POST /session/{id}/advance` plays the pending action and returns the snapshot
//!
//! Requests on one session are served in arrival order.

pub mod protocol;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use kr_core::harness::{Action, LiveMatch, ScenarioConfig};
use tokio::sync::Mutex;

pub use protocol::{Accepted, ControlBounds, Created, ErrorBody, Phase, Snapshot, WordView};

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("no session with id {0}")]
    UnknownSession(String),
    #[error("{0}")]
    WrongPhase(String),
    #[error("malformed request body: {0}")]
    Parse(String),
    #[error(transparent)]
    Core(#[from] kr_core::Error),
}

impl ServiceError {
    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::UnknownSession(_) => StatusCode::NOT_FOUND,
            ServiceError::WrongPhase(_) => StatusCode::CONFLICT,
            ServiceError::Parse(_) => StatusCode::BAD_REQUEST,
            ServiceError::Core(e) if e.is_validation() => StatusCode::BAD_REQUEST,
            ServiceError::Core(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    pub fn body(&self) -> ErrorBody {
        let (code, field) = match self {
            ServiceError::UnknownSession(_) => ("unknown_session", None),
            ServiceError::WrongPhase(_) => ("wrong_phase", None),
            ServiceError::Parse(_) => ("parse", None),
            ServiceError::Core(e) => (e.code(), e.field().map(String::from)),
        };
        ErrorBody {
            code: code.to_string(),
            field,
            message: self.to_string(),
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        (self.status(), Json(self.body())).into_response()
    }
}

type Reply<T> = std::result::Result<Json<T>, ServiceError>;

struct Session {
    live: LiveMatch,
    pending: Option<Action>,
}

impl Session {
    fn phase(&self) -> Phase {
        if self.live.finished() {
            Phase::Finished
        } else {
            Phase::AwaitingAction
        }
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot::of(&self.live, self.phase())
    }

    /// The submitted action, with a missing control replaced by the point of
    /// the control box nearest zero.
    fn committed_action(&mut self) -> Action {
        let mut action = self.pending.take().unwrap_or_default();
        if action.control.is_none() {
            let [lo, hi] = self.live.config().control_bounds;
            let dim = self.live.scenario().game.control_dim;
            action.control = Some(vec![0.0f64.clamp(lo, hi); dim]);
        }
        action
    }
}

/// Shared server state: the live sessions and an optional config used when
/// `POST /session` arrives with an empty body.
#[derive(Clone, Default)]
pub struct AppState {
    sessions: Arc<RwLock<HashMap<String, Arc<Mutex<Session>>>>>,
    default_config: Option<Arc<ScenarioConfig>>,
}

impl AppState {
    pub fn new(default_config: Option<ScenarioConfig>) -> Self {
        AppState {
            sessions: Arc::default(),
            default_config: default_config.map(Arc::new),
        }
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ServiceError> {
        self.sessions
            .read()
            .expect("session table poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/session", post(create_session))
        .route("/session/{id}/snapshot", get(snapshot))
        .route("/session/{id}/action", post(submit_action))
        .route("/session/{id}/advance", post(advance))
        .with_state(state)
}

pub async fn serve(addr: SocketAddr, default_config: Option<ScenarioConfig>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(AppState::new(default_config))).await
}

async fn create_session(State(state): State<AppState>, body: Bytes) -> Reply<Created> {
    let config = if body.iter().all(u8::is_ascii_whitespace) {
        match &state.default_config {
            Some(c) => (**c).clone(),
            None => return Err(ServiceError::Parse("expected a scenario config".into())),
        }
    } else {
        let text = std::str::from_utf8(&body).map_err(|e| ServiceError::Parse(e.to_string()))?;
        ScenarioConfig::from_json_str(text)?
    };
    let live = tokio::task::spawn_blocking(move || LiveMatch::new(&config).map(LiveMatch::with_indicator))
        .await
        .expect("session setup panicked")?;
    let session = Session { live, pending: None };
    let snapshot = session.snapshot();
    let id = uuid::Uuid::new_v4().simple().to_string();
    state
        .sessions
        .write()
        .expect("session table poisoned")
        .insert(id.clone(), Arc::new(Mutex::new(session)));
    Ok(Json(Created { id, snapshot }))
}

async fn snapshot(State(state): State<AppState>, Path(id): Path<String>) -> Reply<Snapshot> {
    let session = state.session(&id)?;
    let guard = session.lock().await;
    Ok(Json(guard.snapshot()))
}

async fn submit_action(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> Reply<Accepted> {
    let action: Action = serde_json::from_slice(&body).map_err(|e| ServiceError::Parse(e.to_string()))?;
    let session = state.session(&id)?;
    let mut guard = session.lock().await;
    if guard.live.finished() {
        return Err(ServiceError::WrongPhase("the match is finished".into()));
    }
    guard.live.validate_action(&action)?;
    guard.pending = Some(action);
    Ok(Json(Accepted {
        accepted: true,
        set_index: guard.live.set_index(),
    }))
}

async fn advance(State(state): State<AppState>, Path(id): Path<String>) -> Reply<Snapshot> {
    let session = state.session(&id)?;
    let mut guard = session.lock_owned().await;
    if guard.live.finished() {
        return Err(ServiceError::WrongPhase("the match is finished".into()));
    }
    tokio::task::spawn_blocking(move || {
        let action = guard.committed_action();
        guard.live.play_set(&action)?;
        Ok(Json(guard.snapshot()))
    })
    .await
    .expect("set integration panicked")
}
