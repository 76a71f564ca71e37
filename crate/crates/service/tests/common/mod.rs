#![allow(dead_code)]

use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use pano_agents::{BackendSuite, RetryPolicy};
use pano_service::{router, AppState, JobPhase, JobStatus, ServiceConfig, SessionStore};
use serde_json::Value;
use tower::ServiceExt;

pub struct TestApp {
    pub dir: tempfile::TempDir,
    pub state: Arc<AppState>,
    pub router: Router,
}

pub fn backends() -> BackendSuite {
    BackendSuite::mock().with_retry(RetryPolicy::immediate(0))
}

impl TestApp {
    pub fn new(backends: BackendSuite) -> Self {
        let dir = tempfile::tempdir().unwrap();
        Self::open(dir, backends)
    }

    pub fn open(dir: tempfile::TempDir, backends: BackendSuite) -> Self {
        let store = SessionStore::open(dir.path()).unwrap();
        let state = AppState::open(store, backends, ServiceConfig::default()).unwrap();
        let router = router(state.clone());
        Self { dir, state, router }
    }

    /// Drops the running state and reloads everything from disk.
    pub fn restart(self, backends: BackendSuite) -> Self {
        let TestApp { dir, .. } = self;
        Self::open(dir, backends)
    }

    pub async fn call(&self, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
        let mut req = Request::builder().method(method).uri(uri);
        let body = match body {
            Some(v) => {
                req = req.header("content-type", "application/json");
                Body::from(serde_json::to_vec(&v).unwrap())
            }
            None => Body::empty(),
        };
        self.raw(req.body(body).unwrap()).await
    }

    pub async fn raw(&self, req: Request<Body>) -> (StatusCode, Vec<u8>) {
        let resp = self.router.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
        (status, bytes)
    }

    pub async fn json(&self, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
        let (status, bytes) = self.call(method, uri, body).await;
        let value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
        (status, value)
    }

    pub async fn create(&self, body: Value) -> String {
        let (status, v) = self.json("POST", "/api/v1/sessions", Some(body)).await;
        assert_eq!(status, StatusCode::CREATED, "{v}");
        v["session_id"].as_str().unwrap().to_owned()
    }

    /// Polls the job list until the newest job for `segment` settles.
    pub async fn wait_job(&self, id: &str, segment: usize) -> JobStatus {
        let deadline = Instant::now() + Duration::from_secs(60);
        loop {
            let (_, v) = self.json("GET", &format!("/api/v1/sessions/{id}/jobs"), None).await;
            let jobs: Vec<JobStatus> = serde_json::from_value(v).unwrap();
            if let Some(job) = jobs.iter().rev().find(|j| j.segment_index == segment) {
                if matches!(job.phase, JobPhase::Done | JobPhase::Error) {
                    return job.clone();
                }
            }
            assert!(Instant::now() < deadline, "job for segment {segment} never settled");
            tokio::time::sleep(Duration::from_millis(5)).await;
        }
    }

    /// Starts generation and waits for it.
    pub async fn generate(&self, id: &str, segment: usize) -> JobStatus {
        let (status, v) = self
            .json("POST", &format!("/api/v1/sessions/{id}/segments/{segment}/generate"), None)
            .await;
        assert_eq!(status, StatusCode::ACCEPTED, "{v}");
        self.wait_job(id, segment).await
    }
}

/// Small sessions keep the suite fast: 64x32 frames, 4 frames per segment.
pub fn small_session(text: &str) -> Value {
    serde_json::json!({
        "text": text,
        "params": { "out_width": 64 },
        "segment_duration_s": 0.5,
        "fps": 8,
        "seed": 3,
    })
}
