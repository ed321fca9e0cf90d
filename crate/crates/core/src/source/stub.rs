//! A local MediaWiki-compatible API server backed by a fixture corpus.
//!
//! Used by tests and examples to exercise the live client without network
//! access. It logs every request so callers can check request counts and
//! rates.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde_json::{json, Value};
use tokio::task::JoinHandle;

use super::{FixtureSource, WikiSource};

struct StubState {
    corpus: FixtureSource,
    requests: AtomicU64,
    log: Mutex<Vec<Instant>>,
    page_size: AtomicUsize,
    unavailable: AtomicBool,
    fail_next: AtomicU64,
}

pub struct StubWiki {
    addr: SocketAddr,
    state: Arc<StubState>,
    task: JoinHandle<()>,
}

impl StubWiki {
    /// Binds to an ephemeral localhost port.
    pub async fn start(corpus_dir: impl AsRef<Path>) -> std::io::Result<Self> {
        let state = Arc::new(StubState {
            corpus: FixtureSource::new(corpus_dir),
            requests: AtomicU64::new(0),
            log: Mutex::new(Vec::new()),
            page_size: AtomicUsize::new(500),
            unavailable: AtomicBool::new(false),
            fail_next: AtomicU64::new(0),
        });
        let app = Router::new().route("/w/api.php", get(api)).with_state(state.clone());
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
        let addr = listener.local_addr()?;
        let task = tokio::spawn(async move {
            let _ = axum::serve(listener, app).await;
        });
        Ok(StubWiki { addr, state, task })
    }

    pub fn endpoint(&self) -> String {
        format!("http://{}/w/api.php", self.addr)
    }

    pub fn request_count(&self) -> u64 {
        self.state.requests.load(Ordering::SeqCst)
    }

    pub fn request_times(&self) -> Vec<Instant> {
        self.state.log.lock().unwrap().clone()
    }

    /// Backlinks returned per response before a continuation token.
    pub fn set_backlink_page_size(&self, n: usize) {
        self.state.page_size.store(n.max(1), Ordering::SeqCst);
    }

    /// While set, every request gets HTTP 503.
    pub fn set_unavailable(&self, down: bool) {
        self.state.unavailable.store(down, Ordering::SeqCst);
    }

    /// The next `n` requests get HTTP 503.
    pub fn fail_next(&self, n: u64) {
        self.state.fail_next.store(n, Ordering::SeqCst);
    }
}

impl Drop for StubWiki {
    fn drop(&mut self) {
        self.task.abort();
    }
}

fn error(code: &str, info: &str) -> Response {
    Json(json!({"error": {"code": code, "info": info}})).into_response()
}

async fn api(State(state): State<Arc<StubState>>, Query(params): Query<HashMap<String, String>>) -> Response {
    state.requests.fetch_add(1, Ordering::SeqCst);
    state.log.lock().unwrap().push(Instant::now());
    if state.unavailable.load(Ordering::SeqCst)
        || state.fail_next.fetch_update(Ordering::SeqCst, Ordering::SeqCst, |n| n.checked_sub(1)).is_ok()
    {
        return StatusCode::SERVICE_UNAVAILABLE.into_response();
    }
    if params.get("action").map(String::as_str) != Some("query") {
        return error("badvalue", "only action=query is supported");
    }
    if params.get("list").map(String::as_str) == Some("backlinks") {
        let Some(title) = params.get("bltitle") else { return error("missingparam", "bltitle") };
        let list = match state.corpus.fetch_backlinks(title, None).await {
            Ok(l) => l,
            Err(e) => return error("internal", &e.to_string()),
        };
        let size = state.page_size.load(Ordering::SeqCst);
        let offset: usize = params
            .get("blcontinue")
            .and_then(|c| c.split('|').nth(1))
            .and_then(|n| n.parse().ok())
            .unwrap_or(0);
        let page: Vec<Value> = list
            .backlinks
            .iter()
            .skip(offset)
            .take(size)
            .map(|t| json!({"pageid": 1, "ns": 0, "title": t}))
            .collect();
        let mut body = json!({"batchcomplete": "", "query": {"backlinks": page}});
        if offset + size < list.backlinks.len() {
            body["continue"] = json!({"blcontinue": format!("0|{}", offset + size), "continue": "-||"});
        }
        return Json(body).into_response();
    }
    if params.get("prop").map(String::as_str) == Some("revisions") {
        let Some(title) = params.get("titles") else { return error("missingparam", "titles") };
        let fetch = match state.corpus.fetch_page_source(title).await {
            Ok(f) => f,
            Err(e) => return error("internal", &e.to_string()),
        };
        let page = match fetch.wikitext {
            None => json!({"-1": {"ns": 0, "title": fetch.resolved_title, "missing": ""}}),
            Some(text) => json!({"1": {
                "pageid": 1, "ns": 0, "title": fetch.resolved_title,
                "revisions": [{"revid": 1000 + text.len() as u64, "parentid": 0,
                    "slots": {"main": {"contentmodel": "wikitext", "contentformat": "text/x-wiki", "*": text}}}]
            }}),
        };
        return Json(json!({"batchcomplete": "", "query": {"pages": page}})).into_response();
    }
    error("badvalue", "unsupported query")
}
