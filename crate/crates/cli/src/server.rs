//! Read-only HTTP API over one artifact.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Path, Query, State};
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};
use skillprice_core::ModelArtifact;

use crate::api::{self, RecommendRequest, SkillsQuery, WhatIfRequest};
use crate::diag::Failure;

type Shared = Arc<ModelArtifact>;

/// Builds the `/api/v1` router.
pub fn router(artifact: ModelArtifact) -> Router {
    Router::new()
        .route("/api/v1/meta", get(meta))
        .route("/api/v1/skills", get(skills))
        .route("/api/v1/skills/{slug}", get(skill))
        .route("/api/v1/skills/{slug}/neighbors", get(neighbors))
        .route("/api/v1/communities", get(communities))
        .route("/api/v1/trends/{slug}", get(trend))
        .route("/api/v1/whatif", post(whatif))
        .route("/api/v1/recommend", post(recommend))
        .fallback(not_found)
        .with_state(Arc::new(artifact))
}

pub async fn serve(artifact: ModelArtifact, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(artifact))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

fn with_headers(art: &ModelArtifact, status: StatusCode, body: Value) -> Response {
    let mut resp = (status, Json(body)).into_response();
    let h = resp.headers_mut();
    h.insert("x-schema-version", HeaderValue::from(art.schema_version));
    h.insert("x-build-timestamp", HeaderValue::from(art.build_timestamp));
    resp
}

fn reply(art: &ModelArtifact, result: Result<Value, Failure>) -> Response {
    match result {
        Ok(body) => with_headers(art, StatusCode::OK, body),
        Err(f) => {
            let status = match f.code.as_str() {
                "unknown_slug" | "not_found" => StatusCode::NOT_FOUND,
                _ if f.validation => StatusCode::BAD_REQUEST,
                _ => StatusCode::INTERNAL_SERVER_ERROR,
            };
            with_headers(art, status, json!({ "error": f }))
        }
    }
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, Failure> {
    serde_json::from_slice(body).map_err(|e| Failure::validation("malformed_request", e.to_string()))
}

async fn meta(State(art): State<Shared>) -> Response {
    reply(&art, Ok(api::meta(&art)))
}

async fn skills(State(art): State<Shared>, q: Result<Query<SkillsQuery>, QueryRejection>) -> Response {
    match q {
        Ok(q) => reply(&art, api::skills(&art, &q)),
        Err(e) => reply(&art, Err(Failure::validation("invalid_query", e.body_text()))),
    }
}

async fn skill(State(art): State<Shared>, Path(slug): Path<String>) -> Response {
    reply(&art, api::skill(&art, &slug))
}

#[derive(Debug, Deserialize)]
struct NeighborsQuery {
    k: Option<usize>,
}

async fn neighbors(
    State(art): State<Shared>,
    Path(slug): Path<String>,
    q: Result<Query<NeighborsQuery>, QueryRejection>,
) -> Response {
    match q {
        Ok(Query(q)) => reply(&art, api::neighbors(&art, &slug, q.k.unwrap_or(10))),
        Err(e) => reply(&art, Err(Failure::validation("invalid_query", e.body_text()))),
    }
}

async fn communities(State(art): State<Shared>) -> Response {
    reply(&art, Ok(api::communities(&art)))
}

async fn trend(State(art): State<Shared>, Path(slug): Path<String>) -> Response {
    reply(&art, api::trend(&art, &slug))
}

async fn whatif(State(art): State<Shared>, body: Bytes) -> Response {
    let result = parse_body::<WhatIfRequest>(&body).and_then(|req| api::whatif(&art, &req));
    reply(&art, result)
}

async fn recommend(State(art): State<Shared>, body: Bytes) -> Response {
    let result = parse_body::<RecommendRequest>(&body).and_then(|req| api::recommend(&art, &req));
    reply(&art, result)
}

async fn not_found(State(art): State<Shared>) -> Response {
    reply(&art, Err(Failure::validation("not_found", "no such endpoint")))
}
