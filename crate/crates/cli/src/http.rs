//! JSON API over a [`Service`].

use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::State;
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::Value;
use tower_http::cors::CorsLayer;

use crate::service::{ApiError, Service};

#[derive(Deserialize)]
struct TaskRequest {
    text: String,
}

#[derive(Deserialize)]
struct LabelRequest {
    text: String,
    category: String,
}

struct Reply(Result<Value, ApiError>);

impl IntoResponse for Reply {
    fn into_response(self) -> Response {
        match self.0 {
            Ok(v) => (StatusCode::OK, Json(v)).into_response(),
            Err(e) => {
                let status = StatusCode::from_u16(e.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
                (status, Json(e.to_json())).into_response()
            }
        }
    }
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| ApiError::bad_request(e.body_text()))
}

async fn blocking<F>(service: Arc<Service>, f: F) -> Reply
where
    F: FnOnce(&Service) -> Result<Value, ApiError> + Send + 'static,
{
    match tokio::task::spawn_blocking(move || f(&service)).await {
        Ok(r) => Reply(r),
        Err(e) => Reply(Err(ApiError {
            status: 500,
            code: "internal",
            message: e.to_string(),
        })),
    }
}

async fn post_task(State(s): State<Arc<Service>>, payload: Result<Json<TaskRequest>, JsonRejection>) -> Reply {
    match body(payload) {
        Ok(req) => blocking(s, move |s| s.task(&req.text)).await,
        Err(e) => Reply(Err(e)),
    }
}

async fn post_label(State(s): State<Arc<Service>>, payload: Result<Json<LabelRequest>, JsonRejection>) -> Reply {
    match body(payload) {
        Ok(req) => blocking(s, move |s| s.label(&req.text, &req.category)).await,
        Err(e) => Reply(Err(e)),
    }
}

async fn get_rules(State(s): State<Arc<Service>>) -> Reply {
    Reply(Ok(s.rules()))
}

async fn get_history(State(s): State<Arc<Service>>) -> Reply {
    Reply(Ok(s.history()))
}

async fn delete_session(State(s): State<Arc<Service>>) -> Reply {
    blocking(s, |s| s.reset()).await
}

async fn fallback() -> Reply {
    Reply(Err(ApiError::not_found("no such endpoint")))
}

/// Routes under `/api`. With `allow_origin`, browsers on that origin may call
/// the API.
pub fn router(service: Arc<Service>, allow_origin: Option<HeaderValue>) -> Router {
    let app = Router::new()
        .route("/api/tasks", post(post_task))
        .route("/api/labels", post(post_label))
        .route("/api/rules", get(get_rules))
        .route("/api/history", get(get_history))
        .route("/api/session", delete(delete_session))
        .fallback(fallback)
        .with_state(service);
    match allow_origin {
        Some(origin) => app.layer(
            CorsLayer::new()
                .allow_origin(origin)
                .allow_methods([Method::GET, Method::POST, Method::DELETE])
                .allow_headers([header::CONTENT_TYPE]),
        ),
        None => app,
    }
}
