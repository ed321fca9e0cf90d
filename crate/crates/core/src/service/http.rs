use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::Ordering;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde_json::json;
use tokio::task::JoinHandle;
use tower_http::services::ServeDir;

use super::negotiate::{negotiate, NegotiatedFormat, RESOURCE_FORMATS};
use super::{render, KnowledgeGraph, ServiceConfig, ServiceError};
use crate::extraction::ExtractionError;
use crate::query::{bindings_to_sparql_json, QueryError};
use crate::rdf::Iri;

#[derive(Clone)]
struct AppState {
    kg: Arc<KnowledgeGraph>,
    ui_assets: Option<PathBuf>,
}

fn json_error(status: StatusCode, body: serde_json::Value) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body.to_string()).into_response()
}

fn plain_error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, [(header::CONTENT_TYPE, "text/plain; charset=utf-8")], message.into()).into_response()
}

fn extraction_status(e: &ExtractionError) -> StatusCode {
    match e {
        ExtractionError::ResourceMissing(_) => StatusCode::NOT_FOUND,
        ExtractionError::ForeignIri(_) => StatusCode::BAD_REQUEST,
        ExtractionError::RedirectLoop(_) | ExtractionError::SourceFailure(_) => StatusCode::BAD_GATEWAY,
    }
}

fn parse_overrides(params: &HashMap<String, String>) -> Result<(Option<bool>, Option<usize>), String> {
    let include = match params.get("include_ingoing").map(String::as_str) {
        None => None,
        Some("true" | "1") => Some(true),
        Some("false" | "0") => Some(false),
        Some(other) => return Err(format!("include_ingoing must be true or false, got {other:?}")),
    };
    let max = match params.get("max_backlinks") {
        None => None,
        Some(v) => Some(v.parse::<usize>().map_err(|_| format!("max_backlinks must be a count, got {v:?}"))?),
    };
    Ok((include, max))
}

async fn resource(
    State(state): State<AppState>,
    uri: Uri,
    headers: HeaderMap,
    Query(params): Query<HashMap<String, String>>,
) -> Response {
    let kg = &state.kg;
    kg.metrics.requests.fetch_add(1, Ordering::Relaxed);
    let local = uri.path().strip_prefix("/resource/").unwrap_or_default();
    if local.is_empty() {
        return plain_error(StatusCode::NOT_FOUND, "no resource name");
    }
    let Ok(iri) = Iri::new(format!("{}{local}", kg.namespaces().resource_base)) else {
        return plain_error(StatusCode::BAD_REQUEST, "malformed resource name");
    };
    let (include, max) = match parse_overrides(&params) {
        Ok(o) => o,
        Err(msg) => return plain_error(StatusCode::BAD_REQUEST, msg),
    };
    let accept = headers.get(header::ACCEPT).and_then(|v| v.to_str().ok());
    let Some(format) = negotiate(accept, RESOURCE_FORMATS) else {
        return plain_error(
            StatusCode::NOT_ACCEPTABLE,
            "supported: text/turtle, application/n-triples, application/json, text/html",
        );
    };
    if format == NegotiatedFormat::Html {
        if let Some(dir) = &state.ui_assets {
            if let Ok(index) = tokio::fs::read(dir.join("index.html")).await {
                return ([(header::CONTENT_TYPE, format.content_type())], index).into_response();
            }
        }
    }
    let opts = kg.options(include, max);
    let (graph, status) = match kg.resource(&iri, &opts).await {
        Ok(r) => r,
        Err(e) => return plain_error(extraction_status(&e), e.to_string()),
    };
    let ns = kg.namespaces();
    let body = match format {
        NegotiatedFormat::NTriples => render::ntriples(&graph, ns),
        NegotiatedFormat::Turtle => render::turtle(&graph, ns),
        NegotiatedFormat::JsonGraph => render::json_graph(&graph).to_string().into_bytes(),
        _ => render::html_table(&graph, ns).into_bytes(),
    };
    let mut response = ([(header::CONTENT_TYPE, format.content_type())], body).into_response();
    let h = response.headers_mut();
    h.insert("x-pages-processed", HeaderValue::from(graph.provenance.pages_processed));
    h.insert("x-backlink-count", HeaderValue::from(graph.provenance.backlink_count));
    h.insert("x-cache", HeaderValue::from_static(status.as_str()));
    h.insert(header::VARY, HeaderValue::from_static("accept"));
    response
}

fn form_query(body: &[u8]) -> Option<String> {
    url_form(body).remove("query")
}

fn url_form(body: &[u8]) -> HashMap<String, String> {
    let text = String::from_utf8_lossy(body);
    text.split('&')
        .filter_map(|pair| {
            let (k, v) = pair.split_once('=').unwrap_or((pair, ""));
            let decode = |s: &str| percent_encoding::percent_decode_str(&s.replace('+', " ")).decode_utf8_lossy().into_owned();
            (!k.is_empty()).then(|| (decode(k), decode(v)))
        })
        .collect()
}

async fn run_query(kg: &KnowledgeGraph, query: Option<String>) -> Response {
    kg.metrics.requests.fetch_add(1, Ordering::Relaxed);
    let Some(text) = query.filter(|q| !q.trim().is_empty()) else {
        return json_error(StatusCode::BAD_REQUEST, json!({"error": "missing-query", "reason": "no query parameter"}));
    };
    match kg.query(&text).await {
        Ok(bindings) => {
            ([(header::CONTENT_TYPE, NegotiatedFormat::SparqlJson.content_type())], bindings_to_sparql_json(&bindings))
                .into_response()
        }
        Err(QueryError::Parse { position, expected }) => json_error(
            StatusCode::BAD_REQUEST,
            json!({"error": "parse", "position": position, "expected": expected}),
        ),
        Err(e @ QueryError::Evaluation { .. }) => {
            let QueryError::Evaluation { anchor, cause } = &e else { unreachable!() };
            let status = match cause {
                ExtractionError::ResourceMissing(_) => StatusCode::NOT_FOUND,
                _ => StatusCode::BAD_GATEWAY,
            };
            json_error(status, json!({"error": "extraction", "anchor": anchor.as_str(), "reason": cause.to_string()}))
        }
        Err(e) => {
            let reason = e.unsupported_reason().expect("remaining errors are rejections");
            json_error(
                StatusCode::BAD_REQUEST,
                json!({
                    "error": "unsupported",
                    "reason": reason.kind(),
                    "pattern_index": reason.pattern_index(),
                    "detail": reason.to_string(),
                }),
            )
        }
    }
}

async fn sparql_get(State(state): State<AppState>, Query(mut params): Query<HashMap<String, String>>) -> Response {
    run_query(&state.kg, params.remove("query")).await
}

async fn sparql_post(State(state): State<AppState>, headers: HeaderMap, uri: Uri, body: Bytes) -> Response {
    let content_type = headers.get(header::CONTENT_TYPE).and_then(|v| v.to_str().ok()).unwrap_or_default();
    let query = if content_type.starts_with("application/sparql-query") {
        Some(String::from_utf8_lossy(&body).into_owned())
    } else {
        form_query(&body).or_else(|| uri.query().and_then(|q| form_query(q.as_bytes())))
    };
    run_query(&state.kg, query).await
}

async fn reload(State(state): State<AppState>) -> Response {
    match state.kg.reload_mappings() {
        Ok(ms) => json_error(StatusCode::OK, json!({"version": ms.version(), "templates": ms.len()})),
        Err(e) => plain_error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

async fn healthz(State(state): State<AppState>) -> Response {
    let ms = state.kg.mappings();
    (StatusCode::OK, format!("ok mappings={} templates={}\n", ms.version(), ms.len())).into_response()
}

async fn metrics(State(state): State<AppState>) -> Response {
    let kg = &state.kg;
    let m = &kg.metrics;
    let body = format!(
        "kgod_requests_total {}\nkgod_cache_hits_total {}\nkgod_cache_misses_total {}\n\
         kgod_extractions_total {}\nkgod_pages_fetched_total {}\nkgod_extraction_ms_mean {:.3}\nkgod_cache_entries {}\n",
        m.requests.load(Ordering::Relaxed),
        m.cache_hits.load(Ordering::Relaxed),
        m.cache_misses.load(Ordering::Relaxed),
        m.extractions.load(Ordering::Relaxed),
        kg.source().request_count(),
        m.mean_extraction_ms(),
        kg.cache_len(),
    );
    ([(header::CONTENT_TYPE, "text/plain; version=0.0.4")], body).into_response()
}

pub fn router(kg: Arc<KnowledgeGraph>, ui_assets: Option<PathBuf>) -> Router {
    let state = AppState { kg, ui_assets: ui_assets.clone() };
    let app = Router::new()
        .route("/resource/{*name}", get(resource))
        .route("/sparql", get(sparql_get).post(sparql_post))
        .route("/admin/reload-mappings", post(reload))
        .route("/healthz", get(healthz))
        .route("/metrics", get(metrics))
        .with_state(state);
    match ui_assets {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

pub struct RunningServer {
    pub addr: SocketAddr,
    pub kg: Arc<KnowledgeGraph>,
    task: JoinHandle<()>,
}

impl RunningServer {
    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Runs until the server stops.
    pub async fn wait(mut self) {
        let task = std::mem::replace(&mut self.task, tokio::spawn(async {}));
        let _ = task.await;
    }
}

impl Drop for RunningServer {
    fn drop(&mut self) {
        self.task.abort();
    }
}

/// Binds `cfg.listen` and serves in a background task.
pub async fn spawn(cfg: &ServiceConfig) -> Result<RunningServer, ServiceError> {
    let kg = Arc::new(KnowledgeGraph::from_config(cfg)?);
    spawn_with(kg, cfg.listen, cfg.ui_assets.clone()).await
}

pub async fn spawn_with(
    kg: Arc<KnowledgeGraph>,
    listen: SocketAddr,
    ui_assets: Option<PathBuf>,
) -> Result<RunningServer, ServiceError> {
    let listener = tokio::net::TcpListener::bind(listen).await?;
    let addr = listener.local_addr()?;
    let app = router(kg.clone(), ui_assets);
    let task = tokio::spawn(async move {
        if let Err(e) = axum::serve(listener, app).await {
            tracing::error!("server stopped: {e}");
        }
    });
    Ok(RunningServer { addr, kg, task })
}
