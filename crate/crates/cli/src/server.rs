use std::sync::Arc;

use a11yrev_core::TrainedModel;
use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const DEFAULT_BODY_LIMIT: usize = 1 << 20;

#[derive(Debug, Deserialize)]
struct ClassifyRequest {
    text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub label: String,
    pub score: f64,
}

/// Score one text with a model that carries its feature pipeline.
pub fn classify(model: &TrainedModel, text: &str) -> a11yrev_core::Result<Classification> {
    let pipeline = model
        .pipeline
        .as_ref()
        .ok_or_else(|| a11yrev_core::Error::InvalidArgument("model carries no feature pipeline".into()))?;
    let score = model.predict_score(&pipeline.transform_text(text)?)?;
    Ok(Classification {
        label: model.label_for_score(score).to_string(),
        score,
    })
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(serde_json::json!({ "error": message.into() }))).into_response()
}

async fn classify_handler(State(model): State<Arc<TrainedModel>>, body: Bytes) -> Response {
    let value: Value = match serde_json::from_slice(&body) {
        Ok(v) => v,
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("malformed JSON: {e}")),
    };
    let batch = value.is_array();
    let requests: Vec<ClassifyRequest> = if batch {
        match serde_json::from_value(value) {
            Ok(r) => r,
            Err(e) => return error(StatusCode::BAD_REQUEST, format!("expected [{{\"text\": ...}}]: {e}")),
        }
    } else {
        match serde_json::from_value(value) {
            Ok(r) => vec![r],
            Err(e) => return error(StatusCode::BAD_REQUEST, format!("expected {{\"text\": ...}}: {e}")),
        }
    };
    let mut out = Vec::with_capacity(requests.len());
    for r in &requests {
        match classify(&model, &r.text) {
            Ok(c) => out.push(c),
            Err(e) => return error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
        }
    }
    if batch {
        Json(out).into_response()
    } else {
        Json(out.remove(0)).into_response()
    }
}

async fn health() -> &'static str {
    "ok"
}

/// `POST /classify` and `GET /health` over a shared read-only model.
pub fn router(model: Arc<TrainedModel>, body_limit: usize) -> Router {
    Router::new()
        .route("/classify", post(classify_handler))
        .route("/health", get(health))
        .layer(DefaultBodyLimit::max(body_limit))
        .with_state(model)
}
