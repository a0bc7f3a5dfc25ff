//! Helpers shared by the gateway integration tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;

use aku_core::{fixtures, save_bundle};
use aku_gateway::api::{default_engine, Envelope, Service};
use aku_gateway::http::router;
use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

pub fn fixture_app() -> Router {
    router(Arc::new(Service::new(default_engine(), fixtures::fixture_store())))
}

/// A fresh copy of the fixture bundle in a temporary directory.
pub fn fixture_bundle() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fixture.bundle.json");
    save_bundle(&fixtures::fixture_store(), &path).unwrap();
    (dir, path)
}

pub struct Reply {
    pub status: StatusCode,
    pub raw: String,
    pub envelope: Envelope,
}

impl Reply {
    pub fn data(&self) -> &Value {
        self.envelope.data.as_ref().unwrap_or_else(|| panic!("no data in {}", self.raw))
    }

    pub fn code(&self) -> String {
        let error = self.envelope.error.as_ref().unwrap_or_else(|| panic!("no error in {}", self.raw));
        serde_json::to_value(error.code).unwrap().as_str().unwrap().to_string()
    }
}

pub async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> Reply {
    let request = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(match body {
            Some(v) => Body::from(v.to_string()),
            None => Body::empty(),
        })
        .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    let raw = String::from_utf8(bytes.to_vec()).unwrap();
    let envelope: Envelope = serde_json::from_str(&raw).unwrap_or_else(|e| panic!("{method} {uri}: {e}: {raw:?}"));
    assert_ne!(envelope.data.is_some(), envelope.error.is_some(), "{raw}");
    assert_eq!(envelope.ok, envelope.data.is_some());
    Reply { status, raw, envelope }
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the `aku` binary against `bundle`.
pub fn aku(bundle: &Path, args: &[&str]) -> Run {
    let output = Command::new(env!("CARGO_BIN_EXE_aku"))
        .args(args)
        .env("AKU_BUNDLE", bundle)
        .env_remove("RUST_LOG")
        .output()
        .unwrap();
    Run {
        code: output.status.code().unwrap(),
        stdout: String::from_utf8(output.stdout).unwrap(),
        stderr: String::from_utf8(output.stderr).unwrap(),
    }
}
