use std::collections::HashMap;
use std::future::Future;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use lru::LruCache;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Miss,
}

impl CacheStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CacheStatus::Hit => "HIT",
            CacheStatus::Miss => "MISS",
        }
    }
}

struct Entry<V> {
    value: V,
    stored_at: Instant,
    ttl: Duration,
}

/// LRU cache with per-entry TTL and single-flight computation per key.
pub struct Cache<V> {
    entries: Mutex<Option<LruCache<String, Entry<V>>>>,
    inflight: Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
}

impl<V: Clone> Cache<V> {
    /// A capacity of zero stores nothing.
    pub fn new(capacity: usize) -> Self {
        Cache {
            entries: Mutex::new(NonZeroUsize::new(capacity).map(LruCache::new)),
            inflight: Mutex::new(HashMap::new()),
        }
    }

    fn fresh(&self, key: &str) -> Option<V> {
        let mut guard = self.entries.lock().unwrap();
        let lru = guard.as_mut()?;
        let entry = lru.get(key)?;
        if entry.stored_at.elapsed() < entry.ttl {
            return Some(entry.value.clone());
        }
        lru.pop(key);
        None
    }

    /// Returns the cached value for `key` if younger than `ttl`, otherwise
    /// runs `compute` and stores its result. Concurrent callers with the same
    /// key wait for a single computation. Errors are not cached.
    pub async fn get_or_compute<E, F, Fut>(&self, key: &str, ttl: Duration, compute: F) -> Result<(V, CacheStatus), E>
    where
        F: FnOnce() -> Fut,
        Fut: Future<Output = Result<V, E>>,
    {
        if ttl.is_zero() {
            return compute().await.map(|v| (v, CacheStatus::Miss));
        }
        if let Some(v) = self.fresh(key) {
            return Ok((v, CacheStatus::Hit));
        }
        let lock = {
            let mut inflight = self.inflight.lock().unwrap();
            inflight.entry(key.to_string()).or_default().clone()
        };
        let result = {
            let _turn = lock.lock().await;
            match self.fresh(key) {
                Some(v) => Ok((v, CacheStatus::Hit)),
                None => match compute().await {
                    Ok(v) => {
                        if let Some(lru) = self.entries.lock().unwrap().as_mut() {
                            lru.put(key.to_string(), Entry { value: v.clone(), stored_at: Instant::now(), ttl });
                        }
                        Ok((v, CacheStatus::Miss))
                    }
                    Err(e) => Err(e),
                },
            }
        };
        let mut inflight = self.inflight.lock().unwrap();
        if Arc::strong_count(&lock) == 2 {
            inflight.remove(key);
        }
        result
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().as_ref().map_or(0, LruCache::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn clear(&self) {
        if let Some(lru) = self.entries.lock().unwrap().as_mut() {
            lru.clear();
        }
    }
}
