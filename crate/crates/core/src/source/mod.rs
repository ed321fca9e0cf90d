//! Page sources and backlinks, from a MediaWiki API or a fixture corpus on
//! disk.

mod cache;
mod fixture;
mod live;
pub mod stub;

use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, SystemTime};

use async_trait::async_trait;
use futures::stream::{self, StreamExt};
use thiserror::Error;

pub use cache::{Cache, CacheStatus};
pub use fixture::{fixture_file_name, FixtureSource};
pub use live::LiveSource;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageFetch {
    pub title: String,
    pub resolved_title: String,
    pub wikitext: Option<String>,
    pub revision_id: Option<u64>,
    pub fetched_at: SystemTime,
    pub missing: bool,
}

impl PageFetch {
    pub fn found(title: &str, resolved: String, wikitext: String, revision_id: Option<u64>) -> Self {
        PageFetch {
            title: title.to_string(),
            resolved_title: resolved,
            wikitext: Some(wikitext),
            revision_id,
            fetched_at: SystemTime::now(),
            missing: false,
        }
    }

    pub fn missing(title: &str, resolved: String) -> Self {
        PageFetch {
            title: title.to_string(),
            resolved_title: resolved,
            wikitext: None,
            revision_id: None,
            fetched_at: SystemTime::now(),
            missing: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BacklinkList {
    pub title: String,
    pub backlinks: Vec<String>,
    pub truncated: bool,
}

#[derive(Debug, Clone, Error)]
pub enum SourceError {
    #[error("network error: {0}")]
    Network(String),
    #[error("API error {code}: {message}")]
    Api { code: String, message: String },
    #[error("cannot read corpus file {path}: {reason}")]
    Corpus { path: PathBuf, reason: String },
    #[error("invalid source configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiveConfig {
    pub api_endpoint: String,
    pub user_agent: String,
    /// Requests per second.
    pub rate_limit: f64,
    pub timeout: Duration,
    /// Total attempts per request.
    pub retries: u32,
    /// First retry delay; doubles on every further attempt.
    pub backoff_base: Duration,
}

impl LiveConfig {
    pub fn new(api_endpoint: impl Into<String>) -> Self {
        LiveConfig {
            api_endpoint: api_endpoint.into(),
            user_agent: format!("kgod/{} (on-demand knowledge graph)", env!("CARGO_PKG_VERSION")),
            rate_limit: 10.0,
            timeout: Duration::from_secs(30),
            retries: 3,
            backoff_base: Duration::from_millis(500),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SourceMode {
    Live(LiveConfig),
    Fixture(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceConfig {
    pub mode: SourceMode,
    /// `None` means every backlink is processed.
    pub max_backlinks: Option<usize>,
    pub fetch_parallelism: usize,
}

impl SourceConfig {
    pub fn fixture(dir: impl Into<PathBuf>) -> Self {
        SourceConfig { mode: SourceMode::Fixture(dir.into()), max_backlinks: None, fetch_parallelism: 8 }
    }

    pub fn validate(&self) -> Result<(), SourceError> {
        if self.fetch_parallelism == 0 {
            return Err(SourceError::Config("fetch_parallelism must be at least 1".into()));
        }
        if let SourceMode::Live(live) = &self.mode {
            if !(live.rate_limit > 0.0 && live.rate_limit.is_finite()) {
                return Err(SourceError::Config("rate_limit must be positive".into()));
            }
            if live.retries == 0 {
                return Err(SourceError::Config("retries must be at least 1".into()));
            }
        }
        Ok(())
    }

    /// Builds the configured backend.
    pub fn open(&self) -> Result<Arc<dyn WikiSource>, SourceError> {
        self.validate()?;
        Ok(match &self.mode {
            SourceMode::Fixture(dir) => Arc::new(FixtureSource::new(dir)),
            SourceMode::Live(live) => Arc::new(LiveSource::new(live.clone())?),
        })
    }
}

#[async_trait]
pub trait WikiSource: Send + Sync {
    /// Latest wikitext of a page. A page that does not exist is reported
    /// through `PageFetch::missing`, not as an error.
    async fn fetch_page_source(&self, title: &str) -> Result<PageFetch, SourceError>;

    /// Main-namespace pages linking to `title`, in source order, cut at `cap`.
    async fn fetch_backlinks(&self, title: &str, cap: Option<usize>) -> Result<BacklinkList, SourceError>;

    /// Number of upstream reads performed so far.
    fn request_count(&self) -> u64;
}

/// Fetches `titles` with at most `parallelism` requests in flight. Results
/// are in input order.
pub async fn fetch_many(
    source: &dyn WikiSource,
    titles: &[String],
    parallelism: usize,
) -> Vec<Result<PageFetch, SourceError>> {
    let pending: Vec<_> = titles.iter().map(|t| source.fetch_page_source(t)).collect();
    stream::iter(pending).buffered(parallelism.max(1)).collect().await
}

/// Dedupes, drops the target itself and applies the cap.
pub(crate) fn finish_backlinks(title: &str, found: impl IntoIterator<Item = String>, cap: Option<usize>) -> BacklinkList {
    let target = crate::rdf::normalize_title(title);
    let mut seen = std::collections::HashSet::new();
    let mut backlinks = Vec::new();
    let mut truncated = false;
    for raw in found {
        let t = crate::rdf::normalize_title(&raw);
        if t.is_empty() || t == target || !seen.insert(t.clone()) {
            continue;
        }
        if cap.is_some_and(|c| backlinks.len() >= c) {
            truncated = true;
            break;
        }
        backlinks.push(t);
    }
    BacklinkList { title: target, backlinks, truncated }
}
