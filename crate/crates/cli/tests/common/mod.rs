// SPDX-License-Identifier: MIT
//! Helpers shared by the CLI integration tests.

#![allow(dead_code)]

use std::path::PathBuf;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use confsel::session::SessionManager;
use confsel::{Admg, Answer, GraphOracle, Oracle, Query};
use confsel_cli::server::{router, AppState};
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

pub fn graph_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../graphs")
        .join(name)
}

pub fn graph(name: &str) -> Admg {
    let path = graph_path(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    Admg::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn app() -> Router {
    router(AppState::new(SessionManager::new()))
}

/// Sends one request and returns the status with the body parsed as JSON (or as a JSON
/// string when it is not JSON).
pub async fn call(
    app: &Router,
    method: Method,
    uri: &str,
    body: Option<&str>,
) -> (StatusCode, Value) {
    let mut request = Request::builder().method(method).uri(uri);
    if body.is_some() {
        request = request.header("content-type", "application/json");
    }
    let request = request
        .body(
            body.map(|b| Body::from(b.to_string()))
                .unwrap_or_else(Body::empty),
        )
        .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    let text = String::from_utf8(bytes.to_vec()).unwrap();
    let value = serde_json::from_str(&text).unwrap_or(Value::String(text));
    (status, value)
}

pub async fn create(app: &Router, x: &str, y: &str) -> Value {
    let (status, body) = call(
        app,
        Method::POST,
        "/sessions",
        Some(&format!(r#"{{"x":"{x}","y":"{y}"}}"#)),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    body
}

pub async fn send_answer(
    app: &Router,
    id: u64,
    query_id: u64,
    answer: &Answer,
) -> (StatusCode, Value) {
    let body = serde_json::json!({ "query_id": query_id, "answer": answer }).to_string();
    call(
        app,
        Method::POST,
        &format!("/sessions/{id}/answers"),
        Some(&body),
    )
    .await
}

/// Answers every pending query from `truth` until the session stops; returns the final
/// snapshot and the number of answers sent.
pub async fn drive(app: &Router, truth: &Admg, x: &str, y: &str) -> (Value, usize) {
    let mut oracle = GraphOracle::new(truth);
    oracle.begin(x, y).unwrap();
    let mut snapshot = create(app, x, y).await;
    let id = snapshot["id"].as_u64().unwrap();
    let mut answered = 0;
    while let Some(pending) = snapshot["pending"].as_object().cloned() {
        let query: Query = serde_json::from_value(pending["query"].clone()).unwrap();
        let answer = oracle.answer(&query).unwrap();
        let (status, next) = send_answer(app, id, pending["id"].as_u64().unwrap(), &answer).await;
        assert_eq!(status, StatusCode::OK, "{next}");
        snapshot = next;
        answered += 1;
    }
    (snapshot, answered)
}
