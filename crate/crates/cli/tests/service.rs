mod support;

use std::time::Duration;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use csmbench_cli::service::{router, AppState};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use support::assert_schema;
use tower::ServiceExt;

async fn call(app: &axum::Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    let v = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    if status.is_client_error() {
        assert_schema("error", &v);
    }
    (status, v)
}

fn app() -> axum::Router {
    router(AppState::new(None))
}

async fn ping_pong(app: &axum::Router) -> String {
    let (s, v) = call(app, Method::POST, "/sessions", Some(json!({"model": "ping_pong"}))).await;
    assert_eq!(s, StatusCode::CREATED);
    assert_schema("session_state", &v);
    v["id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn create_list_step() {
    let app = app();
    let id = ping_pong(&app).await;
    let (s, steps) = call(&app, Method::GET, &format!("/sessions/{id}/steps"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_schema("steps", &steps);
    assert_eq!(steps["steps"][0]["step"]["rule"], "serve");
    assert_eq!(steps["steps"][0]["step"]["source"], "serve: IDLE -> WAIT { / P2.ping }");
    let version = steps["version"].clone();
    let (s, st) = call(&app, Method::POST, &format!("/sessions/{id}/step"), Some(json!({"index": 0, "version": version}))).await;
    assert_eq!(s, StatusCode::OK);
    assert_schema("session_state", &st);
    assert_eq!(st["trace_length"], 1);
    assert_eq!(st["state"]["instances"][0]["state"], "WAIT");
    let (_, state) = call(&app, Method::GET, &format!("/sessions/{id}/state"), None).await;
    assert_eq!(state, st);
    let (_, trace) = call(&app, Method::GET, &format!("/sessions/{id}/trace"), None).await;
    assert_schema("trace", &trace);
    assert_eq!(trace["length"], 1);
    assert!(trace["text"].as_str().unwrap().contains("P1 -> P2 : ping\n"));
}

#[tokio::test]
async fn stale_version_conflicts() {
    let app = app();
    let id = ping_pong(&app).await;
    let (_, steps) = call(&app, Method::GET, &format!("/sessions/{id}/steps"), None).await;
    let stale = json!({"index": 0, "version": steps["version"]});
    let url = format!("/sessions/{id}/step");
    assert_eq!(call(&app, Method::POST, &url, Some(stale.clone())).await.0, StatusCode::OK);
    let (s, e) = call(&app, Method::POST, &url, Some(stale)).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert!(e["error"].as_str().unwrap().contains("stale"));
    let (_, trace) = call(&app, Method::GET, &format!("/sessions/{id}/trace"), None).await;
    assert_eq!(trace["length"], 1);
}

#[tokio::test]
async fn undo_restores_state() {
    let app = app();
    let id = ping_pong(&app).await;
    let (_, before) = call(&app, Method::GET, &format!("/sessions/{id}/state"), None).await;
    let undo = format!("/sessions/{id}/undo");
    assert_eq!(call(&app, Method::POST, &undo, None).await.0, StatusCode::BAD_REQUEST);
    call(&app, Method::POST, &format!("/sessions/{id}/step"), Some(json!({"index": 0, "version": 0}))).await;
    let (s, after) = call(&app, Method::POST, &undo, None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(after["state"], before["state"]);
    assert_eq!(after["trace_length"], 0);
    assert_ne!(after["version"], before["version"]);
}

#[tokio::test]
async fn seeded_auto_is_repeatable() {
    let app = app();
    let mut traces = Vec::new();
    for _ in 0..2 {
        let (_, v) = call(&app, Method::POST, "/sessions", Some(json!({"model": "handover", "scenario": "Full.baseline"}))).await;
        let id = v["id"].as_str().unwrap().to_string();
        assert_eq!(v["state"]["instances"].as_array().unwrap().len(), 8);
        let (s, auto) = call(&app, Method::POST, &format!("/sessions/{id}/auto"), Some(json!({"n": 5, "seed": 7}))).await;
        assert_eq!(s, StatusCode::OK);
        assert_schema("auto", &auto);
        assert_eq!(auto["fired"], 5);
        let (_, t) = call(&app, Method::GET, &format!("/sessions/{id}/trace"), None).await;
        traces.push(t);
    }
    assert_eq!(traces[0], traces[1]);
}

#[tokio::test]
async fn errors() {
    let app = app();
    assert_eq!(call(&app, Method::GET, "/sessions/nope/state", None).await.0, StatusCode::NOT_FOUND);
    assert_eq!(call(&app, Method::DELETE, "/sessions/nope", None).await.0, StatusCode::NOT_FOUND);
    let (s, _) = call(&app, Method::POST, "/sessions", Some(json!({"model": "nope"}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = call(&app, Method::POST, "/sessions", Some(json!({"nonsense": true}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, e) = call(&app, Method::POST, "/sessions", Some(json!({"source": "class A {"}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert!(!e["diagnostics"].as_array().unwrap().is_empty());
    let id = ping_pong(&app).await;
    let req = Request::builder()
        .method(Method::POST)
        .uri(format!("/sessions/{id}/step"))
        .body(Body::from("{not json"))
        .unwrap();
    assert_eq!(app.clone().oneshot(req).await.unwrap().status(), StatusCode::BAD_REQUEST);
    let (s, _) = call(&app, Method::POST, &format!("/sessions/{id}/step"), Some(json!({"index": 7, "version": 0}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = call(&app, Method::POST, &format!("/sessions/{id}/auto"), Some(json!({"n": 1_000_000}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(call(&app, Method::DELETE, &format!("/sessions/{id}"), None).await.0, StatusCode::NO_CONTENT);
    assert_eq!(call(&app, Method::GET, &format!("/sessions/{id}/state"), None).await.0, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn inline_source_sessions() {
    let app = app();
    let src = "class A { states initial S, T; transitions go: S -> T { } } system One { a: A; }";
    let (s, v) = call(&app, Method::POST, "/sessions", Some(json!({"source": src}))).await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(v["state"]["system"], "One");
}

#[tokio::test]
async fn scenarios_listing() {
    let (s, v) = call(&app(), Method::GET, "/scenarios", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_schema("scenarios", &v);
    let list = v.as_array().unwrap();
    let baseline = list.iter().find(|e| e["scenario"] == "Full.baseline").unwrap();
    assert_eq!(baseline["desk"], true);
    assert_eq!(baseline["params"]["max_receiveTimer"], 5);
    assert!(list.iter().any(|e| e["scenario"] == "Full.full_scale" && e["desk"] == false));
    assert!(list.iter().any(|e| e["model"] == "ping_pong" && e["scenario"].is_null()));
}

#[tokio::test]
async fn idle_sessions_are_evicted() {
    let state = AppState::new(None).with_idle(Duration::from_millis(20));
    let app = router(state.clone());
    let id = ping_pong(&app).await;
    tokio::time::sleep(Duration::from_millis(60)).await;
    assert_eq!(call(&app, Method::GET, &format!("/sessions/{id}/state"), None).await.0, StatusCode::NOT_FOUND);
    assert_eq!(state.session_count(), 0);
}

#[tokio::test]
async fn static_files_and_index() {
    let (s, v) = call(&app(), Method::GET, "/", None).await;
    assert_eq!(s, StatusCode::OK);
    assert!(v.as_str().unwrap().contains("/scenarios"));
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<p>hello</p>").unwrap();
    let app = router(AppState::new(Some(dir.path().to_path_buf())));
    let (s, v) = call(&app, Method::GET, "/", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v, "<p>hello</p>");
    assert_eq!(call(&app, Method::GET, "/scenarios", None).await.0, StatusCode::OK);
}

#[tokio::test]
async fn sessions_do_not_interfere() {
    let app = app();
    let a = ping_pong(&app).await;
    let b = ping_pong(&app).await;
    assert_ne!(a, b);
    let tasks: Vec<_> = [a.clone(), b.clone()]
        .into_iter()
        .map(|id| {
            let app = app.clone();
            tokio::spawn(async move {
                call(&app, Method::POST, &format!("/sessions/{id}/auto"), Some(json!({"n": 3, "seed": 1}))).await
            })
        })
        .collect();
    for t in tasks {
        assert_eq!(t.await.unwrap().0, StatusCode::OK);
    }
    let (_, ta) = call(&app, Method::GET, &format!("/sessions/{a}/trace"), None).await;
    let (_, tb) = call(&app, Method::GET, &format!("/sessions/{b}/trace"), None).await;
    assert_eq!(ta, tb);
    assert_eq!(ta["length"], 3);
}
