use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use thiserror::Error;

use crate::extraction::ExtractionOptions;
use crate::rdf::{Iri, NamespaceConfig};
use crate::source::{LiveConfig, SourceConfig, SourceMode};

pub const ENV_PREFIX: &str = "KGOD_";

pub const DEFAULT_API: &str = "https://en.wikipedia.org/w/api.php";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("bad value for {key}: {reason}")]
    Invalid { key: String, reason: String },
    #[error("cannot read {path}: {reason}")]
    Io { path: PathBuf, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    pub namespaces: NamespaceConfig,
    pub source: SourceConfig,
    pub extraction: ExtractionOptions,
    pub cache_capacity: usize,
    pub cache_ttl: Duration,
    pub mappings_path: PathBuf,
    pub ui_assets: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            listen: SocketAddr::from(([127, 0, 0, 1], 8080)),
            namespaces: NamespaceConfig::default(),
            source: SourceConfig {
                mode: SourceMode::Live(LiveConfig::new(DEFAULT_API)),
                max_backlinks: None,
                fetch_parallelism: 8,
            },
            extraction: ExtractionOptions::default(),
            cache_capacity: 1024,
            cache_ttl: Duration::from_secs(300),
            mappings_path: PathBuf::from("mappings.txt"),
            ui_assets: None,
        }
    }
}

pub const KEYS: &[&str] = &[
    "listen",
    "resource_base",
    "ontology_base",
    "abstract_predicate",
    "type_predicate",
    "label_predicate",
    "redirect_predicate",
    "label_language",
    "source",
    "corpus",
    "api_endpoint",
    "user_agent",
    "rate_limit",
    "timeout_secs",
    "retries",
    "backoff_ms",
    "max_backlinks",
    "fetch_parallelism",
    "abstract_sentences",
    "abstract_language",
    "follow_redirects",
    "include_ingoing",
    "cache_capacity",
    "cache_ttl_secs",
    "mappings",
    "ui_assets",
];

/// A raw setting and the directory relative paths in it resolve against.
type Settings = BTreeMap<String, (String, PathBuf)>;

fn parse_lines(text: &str, base: &Path, settings: &mut Settings) -> Result<(), ConfigError> {
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax { line: idx + 1, reason: "expected key = value".into() })?;
        let key = key.trim().to_ascii_lowercase();
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey(key));
        }
        settings.insert(key, (value.trim().to_string(), base.to_path_buf()));
    }
    Ok(())
}

fn parsed<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::Invalid { key: key.into(), reason: e.to_string() })
}

fn boolean(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(ConfigError::Invalid { key: key.into(), reason: format!("{value:?} is not a boolean") }),
    }
}

fn iri(key: &str, value: &str) -> Result<Iri, ConfigError> {
    Iri::new(value).map_err(|e| ConfigError::Invalid { key: key.into(), reason: e.to_string() })
}

impl ServiceConfig {
    /// Reads a `key = value` file, then applies `KGOD_*` overrides from
    /// `env`. Relative paths in the file resolve against its directory.
    pub fn load(path: Option<&Path>, env: impl IntoIterator<Item = (String, String)>) -> Result<Self, ConfigError> {
        let mut settings = Settings::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError::Io { path: path.to_path_buf(), reason: e.to_string() })?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            parse_lines(&text, &base, &mut settings)?;
        }
        for (name, value) in env {
            let Some(key) = name.strip_prefix(ENV_PREFIX) else { continue };
            let key = key.to_ascii_lowercase();
            if key == "config" || key.is_empty() {
                continue;
            }
            if !KEYS.contains(&key.as_str()) {
                return Err(ConfigError::UnknownKey(name));
            }
            settings.insert(key, (value, PathBuf::new()));
        }
        Self::from_settings(&settings)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let mut settings = Settings::new();
        parse_lines(text, base, &mut settings)?;
        Self::from_settings(&settings)
    }

    fn from_settings(settings: &Settings) -> Result<Self, ConfigError> {
        let mut cfg = ServiceConfig::default();
        let mut live = LiveConfig::new(DEFAULT_API);
        let mut corpus: Option<PathBuf> = None;
        let mut kind = "live".to_string();
        let path = |v: &str, base: &Path| {
            let p = PathBuf::from(v);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };
        for (key, (value, base)) in settings {
            let v = value.as_str();
            let k = key.as_str();
            let ns = &mut cfg.namespaces;
            match k {
                "listen" => cfg.listen = parsed(k, v)?,
                "resource_base" => ns.resource_base = iri(k, v)?,
                "ontology_base" => ns.ontology_base = iri(k, v)?,
                "abstract_predicate" => ns.abstract_predicate = iri(k, v)?,
                "type_predicate" => ns.type_predicate = iri(k, v)?,
                "label_predicate" => ns.label_predicate = iri(k, v)?,
                "redirect_predicate" => ns.redirect_predicate = iri(k, v)?,
                "label_language" => ns.label_language = v.to_string(),
                "source" => kind = v.to_ascii_lowercase(),
                "corpus" => corpus = Some(path(v, base)),
                "api_endpoint" => live.api_endpoint = v.to_string(),
                "user_agent" => live.user_agent = v.to_string(),
                "rate_limit" => live.rate_limit = parsed(k, v)?,
                "timeout_secs" => live.timeout = Duration::from_secs_f64(parsed(k, v)?),
                "retries" => live.retries = parsed(k, v)?,
                "backoff_ms" => live.backoff_base = Duration::from_millis(parsed(k, v)?),
                "max_backlinks" => {
                    cfg.source.max_backlinks = match v.to_ascii_lowercase().as_str() {
                        "unlimited" | "all" | "" => None,
                        n => Some(parsed(k, n)?),
                    }
                }
                "fetch_parallelism" => cfg.source.fetch_parallelism = parsed(k, v)?,
                "abstract_sentences" => cfg.extraction.abstract_sentences = parsed(k, v)?,
                "abstract_language" => cfg.extraction.abstract_language = v.to_string(),
                "follow_redirects" => cfg.extraction.follow_redirects = parsed(k, v)?,
                "include_ingoing" => cfg.extraction.include_ingoing = boolean(k, v)?,
                "cache_capacity" => cfg.cache_capacity = parsed(k, v)?,
                "cache_ttl_secs" => cfg.cache_ttl = Duration::from_secs_f64(parsed(k, v)?),
                "mappings" => cfg.mappings_path = path(v, base),
                "ui_assets" => cfg.ui_assets = (!v.is_empty()).then(|| path(v, base)),
                _ => return Err(ConfigError::UnknownKey(key.clone())),
            }
        }
        cfg.source.mode = match kind.as_str() {
            "live" => SourceMode::Live(live),
            "fixture" => SourceMode::Fixture(corpus.ok_or_else(|| ConfigError::Invalid {
                key: "corpus".into(),
                reason: "fixture source needs a corpus directory".into(),
            })?),
            other => return Err(ConfigError::Invalid { key: "source".into(), reason: format!("{other:?} is not live or fixture") }),
        };
        cfg.extraction.max_backlinks = cfg.source.max_backlinks;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |key: &str, reason: String| ConfigError::Invalid { key: key.into(), reason };
        self.namespaces.validate().map_err(|e| invalid("namespaces", e.to_string()))?;
        self.source.validate().map_err(|e| invalid("source", e.to_string()))?;
        if self.extraction.abstract_sentences == 0 {
            return Err(invalid("abstract_sentences", "must be at least 1".into()));
        }
        if !crate::rdf::is_language_tag(&self.extraction.abstract_language) {
            return Err(invalid("abstract_language", "not a language tag".into()));
        }
        if self.listen.port() == 0 && self.listen.ip().is_unspecified() {
            return Err(invalid("listen", "needs an address".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fixture_config() {
        let text = "# comment\nsource = fixture\ncorpus = corpus\nmappings = corpus/mappings.txt\n\
                    listen = 127.0.0.1:0\nmax_backlinks = 5\ncache_ttl_secs = 0\ninclude_ingoing = false\n";
        let cfg = ServiceConfig::parse(text, Path::new("/srv/kg")).unwrap();
        assert_eq!(cfg.source.mode, SourceMode::Fixture(PathBuf::from("/srv/kg/corpus")));
        assert_eq!(cfg.mappings_path, PathBuf::from("/srv/kg/corpus/mappings.txt"));
        assert_eq!(cfg.source.max_backlinks, Some(5));
        assert_eq!(cfg.extraction.max_backlinks, Some(5));
        assert_eq!(cfg.cache_ttl, Duration::ZERO);
        assert!(!cfg.extraction.include_ingoing);
    }

    #[test]
    fn defaults_are_live() {
        let cfg = ServiceConfig::parse("", Path::new(".")).unwrap();
        assert!(matches!(cfg.source.mode, SourceMode::Live(ref l) if l.api_endpoint == DEFAULT_API && l.retries == 3));
        assert_eq!(cfg.cache_ttl, Duration::from_secs(300));
        assert_eq!(cfg.extraction.abstract_sentences, 3);
    }

    #[test]
    fn env_overrides_file() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("kgod.conf");
        std::fs::write(&file, "source = fixture\ncorpus = c\nrate_limit = 2\n").unwrap();
        let env = [
            ("KGOD_RATE_LIMIT".to_string(), "7.5".to_string()),
            ("KGOD_SOURCE".to_string(), "live".to_string()),
            ("PATH".to_string(), "/bin".to_string()),
        ];
        let cfg = ServiceConfig::load(Some(&file), env).unwrap();
        assert!(matches!(cfg.source.mode, SourceMode::Live(ref l) if l.rate_limit == 7.5));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(ServiceConfig::parse("nonsense", Path::new(".")), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(ServiceConfig::parse("colour = red", Path::new(".")), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(ServiceConfig::parse("rate_limit = 0", Path::new(".")), Err(ConfigError::Invalid { .. })));
        assert!(matches!(ServiceConfig::parse("fetch_parallelism = 0", Path::new(".")), Err(ConfigError::Invalid { .. })));
        assert!(matches!(ServiceConfig::parse("source = fixture", Path::new(".")), Err(ConfigError::Invalid { .. })));
        assert!(matches!(ServiceConfig::parse("listen = nowhere", Path::new(".")), Err(ConfigError::Invalid { .. })));
        let env = [("KGOD_BOGUS".to_string(), "1".to_string())];
        assert!(matches!(ServiceConfig::load(None, env), Err(ConfigError::UnknownKey(_))));
    }
}
