//! HTTP + JSON surface of [`SyncService`].
//!
//! | method | path                                   | who            |
//! |--------|----------------------------------------|----------------|
//! | GET    | `/api/catalog`                         | anyone         |
//! | POST   | `/api/lecture/{lectureId}/allocation`  | student        |
//! | POST   | `/api/answers`                         | student        |
//! | GET    | `/api/class/{classId}/progress`        | tutor or admin |
//! | GET    | `/api/export/answers?lecture=…`        | admin          |
//! | POST   | `/api/users`                           | admin          |
//!
//! Credentials are `Authorization: Bearer <token>`.

use super::service::{Caller, SyncService};
use super::wire::{NewUser, UploadBatch};
use super::SyncError;
use crate::allocation::AllocationError;
use crate::content::LectureId;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use std::sync::Arc;

pub struct ApiError(SyncError);

impl From<SyncError> for ApiError {
    fn from(e: SyncError) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            SyncError::UnknownLecture(_) => StatusCode::NOT_FOUND,
            SyncError::Unauthorized => StatusCode::UNAUTHORIZED,
            SyncError::Forbidden => StatusCode::FORBIDDEN,
            SyncError::UserExists(_) => StatusCode::CONFLICT,
            SyncError::InvalidRequest(_) | SyncError::Policy(_) | SyncError::Catalog(_) => StatusCode::BAD_REQUEST,
            SyncError::Allocation(AllocationError::EmptyLecture | AllocationError::EmptyAllocation) => {
                StatusCode::CONFLICT
            }
            SyncError::Store(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        if status.is_server_error() {
            tracing::error!(error = %self.0, "request failed");
        }
        (status, Json(serde_json::json!({ "error": self.0.to_string() }))).into_response()
    }
}

type Svc = Arc<SyncService>;

fn caller(svc: &SyncService, headers: &HeaderMap) -> Result<Caller, ApiError> {
    headers
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .and_then(|t| svc.authenticate(t.trim()))
        .ok_or(ApiError(SyncError::Unauthorized))
}

async fn blocking<T, F>(svc: Svc, f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce(&SyncService) -> Result<T, SyncError> + Send + 'static,
{
    tokio::task::spawn_blocking(move || f(&svc))
        .await
        .map_err(|e| ApiError(SyncError::InvalidRequest(format!("worker failed: {e}"))))?
        .map_err(ApiError)
}

async fn catalog(State(svc): State<Svc>) -> impl IntoResponse {
    Json(svc.catalog())
}

async fn allocation(
    State(svc): State<Svc>,
    headers: HeaderMap,
    Path(lecture): Path<String>,
) -> Result<impl IntoResponse, ApiError> {
    let Caller::User(student) = caller(&svc, &headers)? else {
        return Err(ApiError(SyncError::Forbidden));
    };
    let lecture = LectureId::from(lecture.as_str());
    let payload = blocking(svc, move |s| s.get_allocation(&student, &lecture)).await?;
    Ok(Json(payload))
}

async fn answers(
    State(svc): State<Svc>,
    headers: HeaderMap,
    Json(batch): Json<UploadBatch>,
) -> Result<impl IntoResponse, ApiError> {
    let who = caller(&svc, &headers)?;
    let ack = blocking(svc, move |s| s.ingest_batch(&who, batch)).await?;
    Ok(Json(ack))
}

async fn progress(
    State(svc): State<Svc>,
    headers: HeaderMap,
    Path(class): Path<String>,
) -> Result<impl IntoResponse, ApiError> {
    let who = caller(&svc, &headers)?;
    Ok(Json(svc.class_progress(&who, &class)?))
}

#[derive(Deserialize)]
struct ExportQuery {
    lecture: Option<String>,
}

async fn export(
    State(svc): State<Svc>,
    headers: HeaderMap,
    Query(q): Query<ExportQuery>,
) -> Result<impl IntoResponse, ApiError> {
    let who = caller(&svc, &headers)?;
    let lecture = q.lecture.as_deref().map(LectureId::from);
    let body = svc.export_answers(&who, lecture.as_ref())?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], body))
}

async fn users(
    State(svc): State<Svc>,
    headers: HeaderMap,
    Json(new): Json<NewUser>,
) -> Result<impl IntoResponse, ApiError> {
    let who = caller(&svc, &headers)?;
    let id = new.id.clone();
    let token = blocking(svc, move |s| s.create_user(&who, new)).await?;
    Ok((
        StatusCode::CREATED,
        Json(serde_json::json!({ "id": id, "token": token })),
    ))
}

pub fn router(svc: Arc<SyncService>) -> Router {
    Router::new()
        .route("/api/catalog", get(catalog))
        .route("/api/lecture/{lecture_id}/allocation", post(allocation))
        .route("/api/answers", post(answers))
        .route("/api/class/{class_id}/progress", get(progress))
        .route("/api/export/answers", get(export))
        .route("/api/users", post(users))
        .with_state(svc)
}
