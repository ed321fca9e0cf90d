//! The live source against a local MediaWiki-style stub: pagination,
//! retries on 503, and request spacing.

use std::path::Path;
use std::time::Duration;

use kgod::source::stub::StubWiki;
use kgod::source::{LiveConfig, LiveSource, WikiSource};

#[tokio::main]
async fn main() {
    let stub = StubWiki::start(Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/corpus")).await.unwrap();
    stub.set_backlink_page_size(1);
    let mut cfg = LiveConfig::new(stub.endpoint());
    cfg.rate_limit = 20.0;
    cfg.backoff_base = Duration::from_millis(10);
    let live = LiveSource::new(cfg).unwrap();

    let page = live.fetch_page_source("Lost_Highway").await.unwrap();
    println!("{} revision {:?}, {} bytes", page.resolved_title, page.revision_id, page.wikitext.as_deref().map_or(0, str::len));
    let links = live.fetch_backlinks("Lost_Highway", None).await.unwrap();
    println!("backlinks {:?}", links.backlinks);

    stub.set_unavailable(true);
    println!("while down: {}", live.fetch_page_source("Lost_Highway").await.unwrap_err());
    stub.set_unavailable(false);

    let times = stub.request_times();
    let gaps: Vec<u128> = times.windows(2).map(|w| (w[1] - w[0]).as_millis()).collect();
    println!("{} requests, gaps {gaps:?} ms", stub.request_count());
}
