//! HTTP service: Linked Data resources, the SPARQL endpoint, admin routes.

mod config;
mod http;
mod negotiate;
pub mod render;

use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};
use std::time::{Duration, Instant};

use async_trait::async_trait;
use thiserror::Error;

use crate::extraction::{ExtractionError, ExtractionOptions, Extractor, ResourceGraph};
use crate::mappings::{load_mappings, MappingError, MappingSet};
use crate::query::{evaluate, parse_query, BindingSet, QueryError, ResourceExtractor};
use crate::rdf::{title_to_iri, Iri, NamespaceConfig};
use crate::source::{Cache, CacheStatus, SourceError, WikiSource};

pub use config::{ConfigError, ServiceConfig, DEFAULT_API, ENV_PREFIX, KEYS};
pub use http::{router, spawn, spawn_with, RunningServer};
pub use negotiate::{negotiate, NegotiatedFormat, RESOURCE_FORMATS};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot read mapping file {path}: {reason}")]
    MappingFile { path: PathBuf, reason: String },
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error(transparent)]
    Source(#[from] SourceError),
    #[error("server error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Default)]
pub struct Metrics {
    pub requests: AtomicU64,
    pub cache_hits: AtomicU64,
    pub cache_misses: AtomicU64,
    pub extractions: AtomicU64,
    extraction_micros: AtomicU64,
}

impl Metrics {
    pub fn mean_extraction_ms(&self) -> f64 {
        let n = self.extractions.load(Ordering::Relaxed);
        if n == 0 {
            return 0.0;
        }
        self.extraction_micros.load(Ordering::Relaxed) as f64 / n as f64 / 1000.0
    }
}

/// The on-demand graph shared by all requests: extractor, result cache and
/// the current mapping set.
pub struct KnowledgeGraph {
    extractor: Extractor,
    mappings: RwLock<Arc<MappingSet>>,
    mappings_path: Option<PathBuf>,
    cache: Cache<Arc<ResourceGraph>>,
    ttl: Duration,
    defaults: ExtractionOptions,
    pub metrics: Metrics,
}

pub fn read_mappings(path: &std::path::Path, ns: &NamespaceConfig) -> Result<MappingSet, ServiceError> {
    let bytes = std::fs::read(path)
        .map_err(|e| ServiceError::MappingFile { path: path.to_path_buf(), reason: e.to_string() })?;
    Ok(load_mappings(&bytes, ns)?)
}

impl KnowledgeGraph {
    pub fn new(
        source: Arc<dyn WikiSource>,
        ns: NamespaceConfig,
        mappings: MappingSet,
        defaults: ExtractionOptions,
        fetch_parallelism: usize,
        cache_capacity: usize,
        ttl: Duration,
    ) -> Self {
        KnowledgeGraph {
            extractor: Extractor::new(source, ns, fetch_parallelism),
            mappings: RwLock::new(Arc::new(mappings)),
            mappings_path: None,
            cache: Cache::new(cache_capacity),
            ttl,
            defaults,
            metrics: Metrics::default(),
        }
    }

    pub fn from_config(cfg: &ServiceConfig) -> Result<Self, ServiceError> {
        cfg.validate()?;
        let mappings = read_mappings(&cfg.mappings_path, &cfg.namespaces)?;
        let source = cfg.source.open()?;
        let mut kg = KnowledgeGraph::new(
            source,
            cfg.namespaces.clone(),
            mappings,
            cfg.extraction.clone(),
            cfg.source.fetch_parallelism,
            cfg.cache_capacity,
            cfg.cache_ttl,
        );
        kg.mappings_path = Some(cfg.mappings_path.clone());
        Ok(kg)
    }

    pub fn namespaces(&self) -> &NamespaceConfig {
        self.extractor.namespaces()
    }

    pub fn source(&self) -> &Arc<dyn WikiSource> {
        self.extractor.source()
    }

    pub fn defaults(&self) -> &ExtractionOptions {
        &self.defaults
    }

    pub fn mappings(&self) -> Arc<MappingSet> {
        self.mappings.read().unwrap().clone()
    }

    pub fn cache_len(&self) -> usize {
        self.cache.len()
    }

    /// Installs a new mapping set and drops every cached graph.
    pub fn swap_mappings(&self, mappings: MappingSet) {
        *self.mappings.write().unwrap() = Arc::new(mappings);
        self.cache.clear();
    }

    /// Reloads the mapping file. On failure the current set stays active.
    pub fn reload_mappings(&self) -> Result<Arc<MappingSet>, ServiceError> {
        let path = self
            .mappings_path
            .as_ref()
            .ok_or_else(|| ServiceError::MappingFile { path: PathBuf::new(), reason: "no mapping file configured".into() })?;
        let fresh = read_mappings(path, self.namespaces())?;
        self.swap_mappings(fresh);
        Ok(self.mappings())
    }

    /// Default options with per-request overrides. `max_backlinks` can only
    /// be lowered.
    pub fn options(&self, include_ingoing: Option<bool>, max_backlinks: Option<usize>) -> ExtractionOptions {
        let mut opts = self.defaults.clone();
        if let Some(i) = include_ingoing {
            opts.include_ingoing = i;
        }
        if let Some(m) = max_backlinks {
            opts.max_backlinks = Some(opts.max_backlinks.map_or(m, |cap| cap.min(m)));
        }
        opts
    }

    /// Accepts a full IRI or a page title.
    pub fn resolve(&self, iri_or_title: &str) -> Result<Iri, crate::rdf::RdfError> {
        let base = self.namespaces().resource_base.as_str();
        if iri_or_title.starts_with(base) {
            return Iri::new(iri_or_title);
        }
        title_to_iri(iri_or_title, self.namespaces())
    }

    pub async fn resource(
        &self,
        iri: &Iri,
        opts: &ExtractionOptions,
    ) -> Result<(Arc<ResourceGraph>, CacheStatus), ExtractionError> {
        let mappings = self.mappings();
        let key = format!("{}|{}|{}", iri, mappings.version(), opts.digest());
        let result = self
            .cache
            .get_or_compute(&key, self.ttl, || async {
                let started = Instant::now();
                let g = self.extractor.extract_resource(iri, &mappings, opts).await?;
                self.metrics.extractions.fetch_add(1, Ordering::Relaxed);
                self.metrics.extraction_micros.fetch_add(started.elapsed().as_micros() as u64, Ordering::Relaxed);
                Ok(Arc::new(g))
            })
            .await;
        if let Ok((_, status)) = &result {
            let counter = match status {
                CacheStatus::Hit => &self.metrics.cache_hits,
                CacheStatus::Miss => &self.metrics.cache_misses,
            };
            counter.fetch_add(1, Ordering::Relaxed);
        }
        result
    }

    pub async fn query(&self, text: &str) -> Result<BindingSet, QueryError> {
        let ast = parse_query(text, self.namespaces())?;
        evaluate(&ast, self, self.namespaces()).await
    }
}

#[async_trait]
impl ResourceExtractor for KnowledgeGraph {
    async fn extract(&self, iri: &Iri) -> Result<Arc<ResourceGraph>, ExtractionError> {
        let opts = self.defaults.clone();
        self.resource(iri, &opts).await.map(|(g, _)| g)
    }
}
