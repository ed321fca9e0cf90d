mod common;

use std::time::Duration;

use common::*;
use kgod::source::stub::StubWiki;
use kgod::source::{fetch_many, LiveConfig, LiveSource, SourceError, WikiSource};

#[tokio::test]
async fn page_and_missing_page() {
    let stub = StubWiki::start(fixture_dir()).await.unwrap();
    let live = live_source(&stub.endpoint());
    let page = live.fetch_page_source("Lost Highway").await.unwrap();
    assert!(!page.missing);
    assert_eq!(page.resolved_title, "Lost Highway");
    assert!(page.wikitext.unwrap().contains("{{Infobox film"));
    assert!(page.revision_id.is_some());
    let gone = live.fetch_page_source("No Such Page").await.unwrap();
    assert!(gone.missing && gone.wikitext.is_none());
    assert_eq!(live.request_count(), 2);
}

#[tokio::test]
async fn unavailable_server_exhausts_retries() {
    let stub = StubWiki::start(fixture_dir()).await.unwrap();
    stub.set_unavailable(true);
    let live = live_source(&stub.endpoint());
    let err = live.fetch_page_source("Lost_Highway").await.unwrap_err();
    assert!(matches!(err, SourceError::Network(_)), "{err:?}");
    assert_eq!(stub.request_count(), 3);
}

#[tokio::test]
async fn transient_failures_are_retried() {
    let stub = StubWiki::start(fixture_dir()).await.unwrap();
    stub.fail_next(2);
    let live = live_source(&stub.endpoint());
    assert!(live.fetch_page_source("Lost_Highway").await.is_ok());
    assert_eq!(stub.request_count(), 3);
}

#[tokio::test]
async fn backoff_doubles() {
    let stub = StubWiki::start(fixture_dir()).await.unwrap();
    stub.set_unavailable(true);
    let mut cfg = LiveConfig::new(stub.endpoint());
    cfg.rate_limit = 1000.0;
    cfg.backoff_base = Duration::from_millis(40);
    let live = LiveSource::new(cfg).unwrap();
    assert!(live.fetch_page_source("Lost_Highway").await.is_err());
    let t = stub.request_times();
    assert_eq!(t.len(), 3);
    assert!(t[1] - t[0] >= Duration::from_millis(40));
    assert!(t[2] - t[1] >= Duration::from_millis(80));
}

#[tokio::test]
async fn request_rate_stays_under_the_limit() {
    let stub = StubWiki::start(fixture_dir()).await.unwrap();
    let mut cfg = LiveConfig::new(stub.endpoint());
    cfg.rate_limit = 25.0;
    let live = LiveSource::new(cfg).unwrap();
    let titles: Vec<String> = (0..12).map(|i| FIXTURE_PAGES[i % 4].to_string()).collect();
    let results = fetch_many(&live, &titles, 6).await;
    assert!(results.iter().all(Result::is_ok));
    let times = stub.request_times();
    assert_eq!(times.len(), 12);
    let min_gap = Duration::from_secs_f64(1.0 / 25.0);
    for w in times.windows(2) {
        assert!(w[1] - w[0] >= min_gap, "gap {:?}", w[1] - w[0]);
    }
    let span = (*times.last().unwrap() - times[0]).as_secs_f64();
    assert!((times.len() - 1) as f64 / span <= 25.0);
}

#[tokio::test]
async fn fetch_many_keeps_input_order() {
    let stub = StubWiki::start(fixture_dir()).await.unwrap();
    let live = live_source(&stub.endpoint());
    let titles: Vec<String> = ["David_Lynch", "Nope", "Bill_Pullman", "Lost_Highway"].map(String::from).to_vec();
    let results = fetch_many(&live, &titles, 3).await;
    let resolved: Vec<(String, bool)> = results.into_iter().map(|r| r.unwrap()).map(|p| (p.resolved_title, p.missing)).collect();
    assert_eq!(
        resolved,
        [("David Lynch", false), ("Nope", true), ("Bill Pullman", false), ("Lost Highway", false)]
            .map(|(t, m)| (t.to_string(), m))
    );
}

#[tokio::test]
async fn backlinks_follow_continuation() {
    let stub = StubWiki::start(fixture_dir()).await.unwrap();
    stub.set_backlink_page_size(1);
    let live = live_source(&stub.endpoint());
    let all = live.fetch_backlinks("Lost_Highway", None).await.unwrap();
    assert_eq!(all.backlinks, ["David Lynch", "Bill Pullman", "Patricia Arquette"]);
    assert!(!all.truncated);
    assert_eq!(stub.request_count(), 3);

    let capped = live.fetch_backlinks("Lost_Highway", Some(2)).await.unwrap();
    assert_eq!(capped.backlinks.len(), 2);
    assert!(capped.truncated);
    let none = live.fetch_backlinks("Nothing_Links_Here", None).await.unwrap();
    assert!(none.backlinks.is_empty());
}

#[tokio::test]
async fn live_and_fixture_sources_agree() {
    let stub = StubWiki::start(fixture_dir()).await.unwrap();
    let live = graph_over(std::sync::Arc::new(live_source(&stub.endpoint())), &fixture_dir(), Duration::ZERO);
    let local = fixture_graph(Duration::ZERO);
    for page in FIXTURE_PAGES {
        let (a, _) = live.resource(&dbr(page), live.defaults()).await.unwrap();
        let (b, _) = local.resource(&dbr(page), local.defaults()).await.unwrap();
        assert_eq!(a.to_graph(&ns()), b.to_graph(&ns()), "{page}");
    }
}
