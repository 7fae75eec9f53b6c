//! HTTP+JSON routes over the quiz service.
//!
//! | method | path | body | reply |
//! |---|---|---|---|
//! | POST | `/games` | `{"editor": profile}` | game |
//! | GET | `/games` | | list of games |
//! | GET | `/games/{id}` | | game |
//! | POST | `/games/{id}/steps` | wizard step, tagged by `"step"` | game |
//! | POST | `/games/{id}/suggestions` | `{"secret_word", "synonyms"}` | list of suggestions |
//! | POST | `/games/{id}/publish` | | game |
//! | POST | `/games/{id}/sessions` | `{"player": profile}` | session |
//! | GET | `/sessions/{id}` | | session |
//! | POST | `/sessions/{id}/roll` | | `{"topic", "card", "clue_count"}` |
//! | POST | `/sessions/{id}/reveal` | `{"index"}` (1-based) | `{"index", "clue"}` |
//! | POST | `/sessions/{id}/guess` | `{"guess"}` | `{"outcome", "records"}` |
//! | GET | `/statements/export` | | export lines, `text/plain` |
//!
//! Errors reply `{"error": kind, "message": text}` with a 4xx or 5xx status.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use commonsense_core::error::GameError;
use commonsense_core::game::{GameService, WizardStep};
use commonsense_core::profile::ProfileAttrs;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

type Service = Arc<GameService>;

pub fn router(service: Service) -> Router {
    Router::new()
        .route("/games", post(create_game).get(list_games))
        .route("/games/{id}", get(game))
        .route("/games/{id}/steps", post(advance))
        .route("/games/{id}/suggestions", post(suggestions))
        .route("/games/{id}/publish", post(publish))
        .route("/games/{id}/sessions", post(start_session))
        .route("/sessions/{id}", get(session))
        .route("/sessions/{id}/roll", post(roll))
        .route("/sessions/{id}/reveal", post(reveal))
        .route("/sessions/{id}/guess", post(guess))
        .route("/statements/export", get(export))
        .with_state(service)
}

pub struct ApiError {
    status: StatusCode,
    kind: &'static str,
    message: String,
}

impl From<GameError> for ApiError {
    fn from(e: GameError) -> Self {
        use GameError::*;
        let (status, kind) = match &e {
            UnknownGame(_) => (StatusCode::NOT_FOUND, "unknown_game"),
            UnknownSession(_) => (StatusCode::NOT_FOUND, "unknown_session"),
            OutOfOrder { .. } => (StatusCode::CONFLICT, "out_of_order"),
            AlreadyPublished => (StatusCode::CONFLICT, "already_published"),
            NotPublished => (StatusCode::CONFLICT, "not_published"),
            AlreadyRevealed(_) => (StatusCode::CONFLICT, "already_revealed"),
            NeedsReveal(_) => (StatusCode::CONFLICT, "needs_reveal"),
            InvalidTheme(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_theme"),
            InvalidTopics(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_topics"),
            InvalidCard(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_card"),
            EmptyTopic(_) => (StatusCode::UNPROCESSABLE_ENTITY, "empty_topic"),
            DuplicateSynonym(_) => (StatusCode::UNPROCESSABLE_ENTITY, "duplicate_synonym"),
            NoSynonyms => (StatusCode::UNPROCESSABLE_ENTITY, "no_synonyms"),
            ClueOutOfRange { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "clue_out_of_range"),
            EmptyGuess => (StatusCode::UNPROCESSABLE_ENTITY, "empty_guess"),
            Store(_) => (StatusCode::INTERNAL_SERVER_ERROR, "store"),
            Network(_) => (StatusCode::INTERNAL_SERVER_ERROR, "network"),
        };
        Self { status, kind, message: e.to_string() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({"error": self.kind, "message": self.message}))).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

fn body<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(bytes).map_err(|e| ApiError {
        status: StatusCode::BAD_REQUEST,
        kind: "bad_request",
        message: e.to_string(),
    })
}

/// Runs a service call off the async workers; wizard steps may build a network.
async fn blocking<T, F>(f: F) -> ApiResult<T>
where
    F: FnOnce() -> Result<T, GameError> + Send + 'static,
    T: Send + 'static,
{
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => r.map(Json).map_err(ApiError::from),
        Err(e) => Err(ApiError { status: StatusCode::INTERNAL_SERVER_ERROR, kind: "internal", message: e.to_string() }),
    }
}

#[derive(Deserialize)]
struct EditorBody {
    editor: ProfileAttrs,
}

#[derive(Deserialize)]
struct PlayerBody {
    player: ProfileAttrs,
}

#[derive(Deserialize)]
struct SuggestBody {
    secret_word: String,
    #[serde(default)]
    synonyms: Vec<String>,
}

#[derive(Deserialize)]
struct RevealBody {
    index: usize,
}

#[derive(Serialize)]
struct Revealed {
    index: usize,
    clue: String,
}

#[derive(Deserialize)]
struct GuessBody {
    guess: String,
}

async fn create_game(State(s): State<Service>, bytes: Bytes) -> Result<impl IntoResponse, ApiError> {
    let b: EditorBody = body(&bytes)?;
    Ok((StatusCode::CREATED, Json(s.create_game(b.editor))))
}

async fn list_games(State(s): State<Service>) -> impl IntoResponse {
    Json(s.games())
}

async fn game(State(s): State<Service>, Path(id): Path<String>) -> impl IntoResponse {
    blocking(move || s.game(&id)).await
}

async fn advance(
    State(s): State<Service>,
    Path(id): Path<String>,
    bytes: Bytes,
) -> Result<impl IntoResponse, ApiError> {
    let step: WizardStep = body(&bytes)?;
    blocking(move || s.wizard_advance(&id, step)).await
}

async fn suggestions(
    State(s): State<Service>,
    Path(id): Path<String>,
    bytes: Bytes,
) -> Result<impl IntoResponse, ApiError> {
    let b: SuggestBody = body(&bytes)?;
    blocking(move || s.suggest_clues(&id, &b.secret_word, &b.synonyms)).await
}

// the body is read so the connection can be reused
async fn publish(State(s): State<Service>, Path(id): Path<String>, _body: Bytes) -> impl IntoResponse {
    blocking(move || s.wizard_advance(&id, WizardStep::Publish)).await
}

async fn start_session(
    State(s): State<Service>,
    Path(id): Path<String>,
    bytes: Bytes,
) -> Result<impl IntoResponse, ApiError> {
    let b: PlayerBody = body(&bytes)?;
    let session = blocking(move || s.start_session(&id, b.player)).await?;
    Ok((StatusCode::CREATED, session))
}

async fn session(State(s): State<Service>, Path(id): Path<String>) -> impl IntoResponse {
    blocking(move || s.session(&id)).await
}

async fn roll(State(s): State<Service>, Path(id): Path<String>, _body: Bytes) -> impl IntoResponse {
    blocking(move || s.roll(&id)).await
}

async fn reveal(State(s): State<Service>, Path(id): Path<String>, bytes: Bytes) -> Result<impl IntoResponse, ApiError> {
    let b: RevealBody = body(&bytes)?;
    blocking(move || s.reveal_clue(&id, b.index).map(|clue| Revealed { index: b.index, clue })).await
}

async fn guess(State(s): State<Service>, Path(id): Path<String>, bytes: Bytes) -> Result<impl IntoResponse, ApiError> {
    let b: GuessBody = body(&bytes)?;
    blocking(move || s.submit_guess(&id, &b.guess)).await
}

async fn export(State(s): State<Service>) -> impl IntoResponse {
    let mut text = s.store().export_corpus().join("\n");
    if !text.is_empty() {
        text.push('\n');
    }
    ([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], text)
}
