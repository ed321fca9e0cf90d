use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use async_trait::async_trait;
use serde_json::Value;
use tokio::time::Instant;

use super::{finish_backlinks, BacklinkList, LiveConfig, PageFetch, SourceError, WikiSource};
use crate::rdf::normalize_title;

/// Client for the MediaWiki action API.
pub struct LiveSource {
    client: reqwest::Client,
    cfg: LiveConfig,
    next_slot: Mutex<Option<Instant>>,
    requests: AtomicU64,
}

impl LiveSource {
    pub fn new(cfg: LiveConfig) -> Result<Self, SourceError> {
        let client = reqwest::Client::builder()
            .user_agent(cfg.user_agent.clone())
            .timeout(cfg.timeout)
            .build()
            .map_err(|e| SourceError::Config(e.to_string()))?;
        Ok(LiveSource { client, cfg, next_slot: Mutex::new(None), requests: AtomicU64::new(0) })
    }

    /// Waits until the rate limiter grants a request slot.
    async fn acquire_slot(&self) {
        // 5% headroom so arrival jitter at the server stays under the limit
        let interval = Duration::from_secs_f64(1.05 / self.cfg.rate_limit);
        let slot = {
            let mut next = self.next_slot.lock().unwrap();
            let now = Instant::now();
            let slot = next.map_or(now, |n| n.max(now));
            *next = Some(slot + interval);
            slot
        };
        tokio::time::sleep_until(slot).await;
    }

    async fn get(&self, params: &[(String, String)]) -> Result<Value, SourceError> {
        let mut last_error = String::new();
        for attempt in 0..self.cfg.retries {
            if attempt > 0 {
                tokio::time::sleep(self.cfg.backoff_base * 2u32.pow(attempt - 1)).await;
            }
            self.acquire_slot().await;
            self.requests.fetch_add(1, Ordering::Relaxed);
            let response = match self.client.get(&self.cfg.api_endpoint).query(params).send().await {
                Ok(r) => r,
                Err(e) => {
                    last_error = e.to_string();
                    continue;
                }
            };
            let status = response.status();
            if status.is_server_error() {
                last_error = format!("HTTP {status}");
                continue;
            }
            if !status.is_success() {
                return Err(SourceError::Api { code: format!("http-{}", status.as_u16()), message: status.to_string() });
            }
            let body = match response.bytes().await {
                Ok(b) => b,
                Err(e) => {
                    last_error = e.to_string();
                    continue;
                }
            };
            let json: Value = serde_json::from_slice(&body)
                .map_err(|e| SourceError::Network(format!("malformed API response: {e}")))?;
            if let Some(err) = json.get("error") {
                let field = |k: &str| err.get(k).and_then(Value::as_str).unwrap_or_default().to_string();
                return Err(SourceError::Api { code: field("code"), message: field("info") });
            }
            return Ok(json);
        }
        Err(SourceError::Network(format!("{} attempts failed; last: {last_error}", self.cfg.retries)))
    }
}

fn base_params() -> Vec<(String, String)> {
    vec![("action".into(), "query".into()), ("format".into(), "json".into())]
}

/// Accepts both the legacy (object keyed by page id) and formatversion=2
/// (array) shapes of `query.pages`.
fn first_page(json: &Value) -> Option<&Value> {
    match json.pointer("/query/pages")? {
        Value::Object(map) => map.values().next(),
        Value::Array(list) => list.first(),
        _ => None,
    }
}

fn flag(page: &Value, key: &str) -> bool {
    match page.get(key) {
        None | Some(Value::Bool(false)) | Some(Value::Null) => false,
        Some(_) => true,
    }
}

pub(crate) fn parse_page_response(title: &str, json: &Value) -> Result<PageFetch, SourceError> {
    let malformed = || SourceError::Network("malformed API response: no page".into());
    let page = first_page(json).ok_or_else(malformed)?;
    let resolved = page.get("title").and_then(Value::as_str).map(normalize_title).unwrap_or_else(|| normalize_title(title));
    if flag(page, "missing") || flag(page, "invalid") {
        return Ok(PageFetch::missing(title, resolved));
    }
    let revision = page.pointer("/revisions/0").ok_or_else(malformed)?;
    let main = revision.pointer("/slots/main").unwrap_or(revision);
    let text = main
        .get("content")
        .or_else(|| main.get("*"))
        .and_then(Value::as_str)
        .ok_or_else(malformed)?;
    let revid = revision.get("revid").and_then(Value::as_u64);
    Ok(PageFetch::found(title, resolved, text.to_string(), revid))
}

#[async_trait]
impl WikiSource for LiveSource {
    async fn fetch_page_source(&self, title: &str) -> Result<PageFetch, SourceError> {
        let mut params = base_params();
        params.extend([
            ("prop".into(), "revisions".into()),
            ("rvprop".into(), "content|ids".into()),
            ("rvslots".into(), "main".into()),
            ("titles".into(), title.to_string()),
        ]);
        let json = self.get(&params).await?;
        parse_page_response(title, &json)
    }

    async fn fetch_backlinks(&self, title: &str, cap: Option<usize>) -> Result<BacklinkList, SourceError> {
        let mut found: Vec<String> = Vec::new();
        let mut continuation: Vec<(String, String)> = Vec::new();
        loop {
            let mut params = base_params();
            params.extend([
                ("list".into(), "backlinks".into()),
                ("bltitle".into(), title.to_string()),
                ("blnamespace".into(), "0".into()),
                ("bllimit".into(), "max".into()),
            ]);
            params.extend(continuation.iter().cloned());
            let json = self.get(&params).await?;
            if let Some(Value::Array(items)) = json.pointer("/query/backlinks") {
                found.extend(
                    items
                        .iter()
                        .filter(|i| i.get("ns").and_then(Value::as_i64).unwrap_or(0) == 0)
                        .filter_map(|i| i.get("title").and_then(Value::as_str).map(str::to_string)),
                );
            }
            let enough = cap.is_some_and(|c| finish_backlinks(title, found.iter().cloned(), None).backlinks.len() > c);
            match json.get("continue").and_then(Value::as_object) {
                Some(next) if !enough => {
                    continuation = next
                        .iter()
                        .map(|(k, v)| (k.clone(), v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string())))
                        .collect();
                }
                Some(_) => {
                    // the cap was reached before the list ran out
                    let mut list = finish_backlinks(title, found, cap);
                    list.truncated = true;
                    return Ok(list);
                }
                None => return Ok(finish_backlinks(title, found, cap)),
            }
        }
    }

    fn request_count(&self) -> u64 {
        self.requests.load(Ordering::Relaxed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn legacy_response_shape() {
        let body = json!({"batchcomplete": "", "query": {"pages": {"42": {
            "pageid": 42, "ns": 0, "title": "Lost Highway",
            "revisions": [{"revid": 7, "slots": {"main": {"contentmodel": "wikitext", "*": "text"}}}]
        }}}});
        let page = parse_page_response("lost_highway", &body).unwrap();
        assert_eq!(page.resolved_title, "Lost Highway");
        assert_eq!(page.wikitext.as_deref(), Some("text"));
        assert_eq!(page.revision_id, Some(7));
    }

    #[test]
    fn v2_response_shape_and_missing() {
        let body = json!({"query": {"pages": [{"ns": 0, "title": "X",
            "revisions": [{"revid": 1, "slots": {"main": {"content": "abc"}}}]}]}});
        assert_eq!(parse_page_response("X", &body).unwrap().wikitext.as_deref(), Some("abc"));

        let missing = json!({"query": {"pages": {"-1": {"ns": 0, "title": "Nope", "missing": ""}}}});
        assert!(parse_page_response("Nope", &missing).unwrap().missing);
        let missing2 = json!({"query": {"pages": [{"title": "Nope", "missing": true}]}});
        assert!(parse_page_response("Nope", &missing2).unwrap().missing);
    }
}
