// SPDX-License-Identifier: MIT
//! HTTP front end over [`SessionManager`].
//!
//! | method | path                          | body            | success |
//! |--------|-------------------------------|-----------------|---------|
//! | POST   | `/sessions`                   | `CreateSession` | 201 + snapshot |
//! | GET    | `/sessions/{id}`              |                 | 200 + snapshot |
//! | POST   | `/sessions/{id}/answers`      | `AnswerRequest` | 200 + snapshot |
//! | GET    | `/sessions/{id}/transcript`   |                 | 200 + NDJSON transcript |
//! | DELETE | `/sessions/{id}`              |                 | 200 + snapshot (aborted) |
//!
//! Errors are `{"error": kind, "message": text}` with status 404 (unknown session), 409
//! (stale or conflicting answer), 422 (malformed or inadmissible input) or 504 (engine
//! timeout).

use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use confsel::session::{
    AnswerRequest, CreateSession, SessionError, SessionId, SessionManager, SessionSnapshot,
};
use serde::Serialize;

use crate::error::CliError;

/// Shared server state. Optionally mirrors one session's transcript to a file after
/// every change.
#[derive(Clone)]
pub struct AppState {
    manager: Arc<SessionManager>,
    autosave: Option<(SessionId, Arc<PathBuf>)>,
}

impl AppState {
    pub fn new(manager: SessionManager) -> Self {
        AppState {
            manager: Arc::new(manager),
            autosave: None,
        }
    }

    pub fn with_autosave(mut self, id: SessionId, path: Option<PathBuf>) -> Self {
        self.autosave = path.map(|p| (id, Arc::new(p)));
        self
    }

    pub fn manager(&self) -> &SessionManager {
        &self.manager
    }

    fn save(&self, id: SessionId) -> Result<(), ApiError> {
        if let Some((saved, path)) = &self.autosave {
            if *saved == id {
                let transcript = self.manager.transcript(id).map_err(ApiError::Session)?;
                std::fs::write(path.as_path(), transcript.encode())
                    .map_err(|e| ApiError::Internal(format!("{}: {e}", path.display())))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug)]
enum ApiError {
    Session(SessionError),
    Body(String),
    Internal(String),
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
    message: String,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, kind, message) = match self {
            ApiError::Session(e) => {
                let (status, kind) = match &e {
                    SessionError::NotFound(_) => (StatusCode::NOT_FOUND, "not_found"),
                    SessionError::Conflict(_) => (StatusCode::CONFLICT, "conflict"),
                    SessionError::Validation(_) => (StatusCode::UNPROCESSABLE_ENTITY, "validation"),
                    SessionError::Timeout => (StatusCode::GATEWAY_TIMEOUT, "timeout"),
                };
                (status, kind, e.to_string())
            }
            ApiError::Body(message) => (StatusCode::UNPROCESSABLE_ENTITY, "validation", message),
            ApiError::Internal(message) => (StatusCode::INTERNAL_SERVER_ERROR, "internal", message),
        };
        (
            status,
            Json(ErrorBody {
                error: kind,
                message,
            }),
        )
            .into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(rejection: JsonRejection) -> Self {
        ApiError::Body(rejection.body_text())
    }
}

/// Runs a blocking manager call off the async executor.
async fn blocking<T, F>(state: &AppState, f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce(&SessionManager) -> Result<T, SessionError> + Send + 'static,
{
    let state = state.clone();
    tokio::task::spawn_blocking(move || f(&state.manager))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?
        .map_err(ApiError::Session)
}

async fn create(
    State(state): State<AppState>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> Result<(StatusCode, Json<SessionSnapshot>), ApiError> {
    let Json(request) = body?;
    let snapshot = blocking(&state, move |m| m.create(&request)).await?;
    Ok((StatusCode::CREATED, Json(snapshot)))
}

async fn show(
    State(state): State<AppState>,
    Path(id): Path<SessionId>,
) -> Result<Json<SessionSnapshot>, ApiError> {
    Ok(Json(blocking(&state, move |m| m.snapshot(id)).await?))
}

async fn answer(
    State(state): State<AppState>,
    Path(id): Path<SessionId>,
    body: Result<Json<AnswerRequest>, JsonRejection>,
) -> Result<Json<SessionSnapshot>, ApiError> {
    let Json(request) = body?;
    let snapshot = blocking(&state, move |m| m.answer(id, &request)).await?;
    state.save(id)?;
    Ok(Json(snapshot))
}

async fn transcript(
    State(state): State<AppState>,
    Path(id): Path<SessionId>,
) -> Result<Response, ApiError> {
    let transcript = blocking(&state, move |m| m.transcript(id)).await?;
    Ok((
        [(header::CONTENT_TYPE, "application/x-ndjson")],
        transcript.encode(),
    )
        .into_response())
}

async fn abort(
    State(state): State<AppState>,
    Path(id): Path<SessionId>,
) -> Result<Json<SessionSnapshot>, ApiError> {
    let snapshot = blocking(&state, move |m| m.abort(id)).await?;
    state.save(id)?;
    Ok(Json(snapshot))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(show).delete(abort))
        .route("/sessions/{id}/answers", post(answer))
        .route("/sessions/{id}/transcript", get(transcript))
        .with_state(state)
}

/// Serves until Ctrl-C, then writes the autosaved transcript one last time.
pub async fn serve(listener: tokio::net::TcpListener, state: AppState) -> Result<(), CliError> {
    let app = router(state.clone());
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    if let Some((id, _)) = &state.autosave {
        state
            .save(*id)
            .map_err(|e| CliError::Server(format!("{e:?}")))?;
    }
    Ok(())
}
