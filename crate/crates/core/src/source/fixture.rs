use std::io::ErrorKind;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use async_trait::async_trait;

use super::{finish_backlinks, BacklinkList, PageFetch, SourceError, WikiSource};
use crate::rdf::{encode_local_name, normalize_title};

/// File name of a page in `<corpus>/pages`: the resource local name, with
/// `/` escaped too.
pub fn fixture_file_name(title: &str) -> String {
    format!("{}.wiki", encode_local_name(&normalize_title(title)).replace('/', "%2F"))
}

/// Offline corpus: `pages/<encoded title>.wiki` plus `backlinks.tsv` with
/// `target<TAB>source` lines. Files are read on every call, so edits to the
/// corpus are picked up without a restart.
#[derive(Debug)]
pub struct FixtureSource {
    dir: PathBuf,
    reads: AtomicU64,
}

impl FixtureSource {
    pub fn new(dir: impl AsRef<Path>) -> Self {
        FixtureSource { dir: dir.as_ref().to_path_buf(), reads: AtomicU64::new(0) }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn page_path(&self, title: &str) -> PathBuf {
        self.dir.join("pages").join(fixture_file_name(title))
    }

    // Corpus files are small and local; a plain read is cheaper and steadier
    // than a trip through the blocking pool.
    async fn read_optional(&self, path: &Path) -> Result<Option<String>, SourceError> {
        self.reads.fetch_add(1, Ordering::Relaxed);
        match std::fs::read(path) {
            Ok(bytes) => Ok(Some(String::from_utf8_lossy(&bytes).into_owned())),
            Err(e) if e.kind() == ErrorKind::NotFound => Ok(None),
            Err(e) => Err(SourceError::Corpus { path: path.to_path_buf(), reason: e.to_string() }),
        }
    }
}

#[async_trait]
impl WikiSource for FixtureSource {
    async fn fetch_page_source(&self, title: &str) -> Result<PageFetch, SourceError> {
        let resolved = normalize_title(title);
        if resolved.is_empty() {
            return Ok(PageFetch::missing(title, resolved));
        }
        let path = self.page_path(&resolved);
        Ok(match self.read_optional(&path).await? {
            Some(text) => PageFetch::found(title, resolved, text, None),
            None => PageFetch::missing(title, resolved),
        })
    }

    async fn fetch_backlinks(&self, title: &str, cap: Option<usize>) -> Result<BacklinkList, SourceError> {
        let target = normalize_title(title);
        let index = self.read_optional(&self.dir.join("backlinks.tsv")).await?.unwrap_or_default();
        let sources = index.lines().filter_map(|line| {
            let (t, s) = line.split_once('\t')?;
            (normalize_title(t) == target).then(|| s.trim().to_string())
        });
        Ok(finish_backlinks(&target, sources, cap))
    }

    fn request_count(&self) -> u64 {
        self.reads.load(Ordering::Relaxed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus() -> FixtureSource {
        FixtureSource::new(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/corpus"))
    }

    #[test]
    fn file_names() {
        assert_eq!(fixture_file_name("Lost Highway"), "Lost_Highway.wiki");
        assert_eq!(fixture_file_name("AC/DC"), "AC%2FDC.wiki");
        assert_eq!(fixture_file_name("café"), "Caf%C3%A9.wiki");
    }

    #[tokio::test]
    async fn reads_pages() {
        let src = corpus();
        let page = src.fetch_page_source("Lost Highway").await.unwrap();
        assert!(!page.missing);
        let expected = std::fs::read_to_string(src.page_path("Lost_Highway")).unwrap();
        assert_eq!(page.wikitext.as_deref(), Some(expected.as_str()));
        assert_eq!(page.resolved_title, "Lost Highway");

        let missing = src.fetch_page_source("No Such Page Xyz").await.unwrap();
        assert!(missing.missing && missing.wikitext.is_none());
    }

    #[tokio::test]
    async fn reads_backlinks() {
        let src = corpus();
        let all = src.fetch_backlinks("Lost Highway", None).await.unwrap();
        assert_eq!(all.backlinks, ["David Lynch", "Bill Pullman", "Patricia Arquette"]);
        assert!(!all.truncated);

        let two = src.fetch_backlinks("Lost_Highway", Some(2)).await.unwrap();
        assert_eq!(two.backlinks, ["David Lynch", "Bill Pullman"]);
        assert!(two.truncated);

        let none = src.fetch_backlinks("No Such Page", None).await.unwrap();
        assert!(none.backlinks.is_empty() && !none.truncated);
    }

    #[tokio::test]
    async fn deterministic_reads() {
        let src = corpus();
        let a = src.fetch_page_source("David Lynch").await.unwrap();
        let b = src.fetch_page_source("David_Lynch").await.unwrap();
        assert_eq!(a.wikitext, b.wikitext);
        assert_eq!(src.request_count(), 2);
    }
}
