//! JSON-over-HTTP front end. Every response, including errors and unknown routes, is an [`Envelope`].

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::de::DeserializeOwned;

use crate::api::{
    ApiError, ApiResult, CompleteRequest, Envelope, EvaluateRequest, EvidenceRequest, ExecuteRequest, ForwardQuery,
    Service, UnitBatch, WhatIfRequest,
};

pub const DEFAULT_PORT: u16 = 7468;

type Shared = State<Arc<Service>>;
type Params = Query<HashMap<String, String>>;

fn respond(result: ApiResult) -> Response {
    let status = match &result {
        Ok(_) => StatusCode::OK,
        Err(e) => StatusCode::from_u16(e.code.http_status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR),
    };
    let body = crate::api::render(&Envelope::from(result));
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(bytes).map_err(|e| ApiError::invalid(format!("malformed request body: {e}")))
}

fn flag(params: &HashMap<String, String>, name: &str) -> Result<bool, ApiError> {
    match params.get(name).map(String::as_str) {
        None | Some("false") | Some("0") => Ok(false),
        Some("true") | Some("1") | Some("") => Ok(true),
        Some(other) => Err(ApiError::invalid(format!("{name}: expected true or false, got {other:?}"))),
    }
}

fn required<'a>(params: &'a HashMap<String, String>, name: &str) -> Result<&'a str, ApiError> {
    params
        .get(name)
        .map(String::as_str)
        .ok_or_else(|| ApiError::invalid(format!("missing query parameter {name}")))
}

async fn get_unit(State(s): Shared, Path(id): Path<String>) -> Response {
    respond(s.get_unit(&id))
}

async fn list_units(State(s): Shared, Query(p): Params) -> Response {
    respond(s.list_units(p.get("kind").map(String::as_str), p.get("class").map(String::as_str)))
}

async fn put_units(State(s): Shared, bytes: Bytes) -> Response {
    respond(body::<UnitBatch>(&bytes).and_then(|b| s.put_units(b)))
}

async fn add_assertion(State(s): Shared, Path(id): Path<String>, bytes: Bytes) -> Response {
    respond(body(&bytes).and_then(|a| s.add_assertion(&id, a)))
}

async fn evaluate(State(s): Shared, bytes: Bytes) -> Response {
    respond(body::<EvaluateRequest>(&bytes).and_then(|r| s.evaluate(&r)))
}

async fn discover_forward(State(s): Shared, Query(p): Params) -> Response {
    let query = || -> Result<ForwardQuery, ApiError> {
        Ok(ForwardQuery {
            context: required(&p, "context")?.to_string(),
            class: p.get("class").cloned(),
            tags: p.get("tags").cloned(),
            include_inapplicable: flag(&p, "include_inapplicable")?,
        })
    };
    respond(query().and_then(|q| s.discover_forward(&q)))
}

async fn discover_reverse(State(s): Shared, Query(p): Params) -> Response {
    respond(required(&p, "action_unit").and_then(|au| s.discover_reverse(au)))
}

async fn what_if(State(s): Shared, bytes: Bytes) -> Response {
    respond(body::<WhatIfRequest>(&bytes).and_then(|r| s.what_if(&r)))
}

async fn execute(State(s): Shared, bytes: Bytes) -> Response {
    respond(body::<ExecuteRequest>(&bytes).and_then(|r| s.execute(&r)))
}

async fn get_execution(State(s): Shared, Path(id): Path<String>) -> Response {
    respond(s.get_execution(&id))
}

async fn list_tasks(State(s): Shared, Query(p): Params) -> Response {
    respond(s.list_tasks(p.get("execution").map(String::as_str)))
}

async fn complete_task(State(s): Shared, Path((execution, step)): Path<(String, String)>, bytes: Bytes) -> Response {
    let request = if bytes.is_empty() { Ok(CompleteRequest::empty()) } else { body(&bytes) };
    respond(request.and_then(|r| s.complete_task(&execution, &step, r)))
}

async fn add_evidence(State(s): Shared, bytes: Bytes) -> Response {
    respond(body::<EvidenceRequest>(&bytes).and_then(|r| s.add_evidence(r)))
}

async fn affordances(State(s): Shared, Query(p): Params) -> Response {
    respond(required(&p, "schema").and_then(|schema| s.affordances(schema)))
}

async fn unknown_route() -> Response {
    respond(Err(ApiError::not_found("no such endpoint")))
}

async fn wrong_method() -> Response {
    respond(Err(ApiError::invalid("method not allowed on this endpoint")))
}

pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/units", get(list_units).post(put_units))
        .route("/units/{id}", get(get_unit))
        .route("/contexts/{id}/assertions", post(add_assertion))
        .route("/evaluate", post(evaluate))
        .route("/discover/forward", get(discover_forward))
        .route("/discover/reverse", get(discover_reverse))
        .route("/whatif", post(what_if))
        .route("/execute", post(execute))
        .route("/executions/{id}", get(get_execution))
        .route("/tasks", get(list_tasks))
        .route("/tasks/{execution}/{step}/complete", post(complete_task))
        .route("/evidence", post(add_evidence))
        .route("/affordances", get(affordances))
        .fallback(unknown_route)
        .method_not_allowed_fallback(wrong_method)
        .with_state(service)
}

/// Serves until the process is stopped.
pub async fn serve(service: Arc<Service>, port: u16) -> std::io::Result<()> {
    let addr = SocketAddr::from(([127, 0, 0, 1], port));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(%addr, readonly = service.is_readonly(), "aku gateway listening");
    axum::serve(listener, router(service)).await
}
