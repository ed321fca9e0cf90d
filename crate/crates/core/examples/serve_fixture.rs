//! Serve the fixture corpus over HTTP and make a few requests against it.
//! Pass `--forever` to keep serving.

use std::path::Path;

use kgod::service::{spawn, ServiceConfig};

#[tokio::main]
async fn main() {
    let conf = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/corpus/kgod.conf");
    let mut cfg = ServiceConfig::load(Some(&conf), std::iter::empty()).unwrap();
    cfg.listen = "127.0.0.1:0".parse().unwrap();
    let server = spawn(&cfg).await.unwrap();
    let base = server.base_url();
    println!("serving on {base}");

    let client = reqwest::Client::new();
    for accept in ["application/n-triples", "application/json"] {
        let r = client.get(format!("{base}/resource/Lost_Highway")).header("accept", accept).send().await.unwrap();
        println!("--- {accept} ({}, x-cache {:?})", r.status(), r.headers()["x-cache"]);
        println!("{}", r.text().await.unwrap());
    }
    let r = client
        .get(format!("{base}/sparql"))
        .query(&[("query", "SELECT ?s WHERE { ?s ?p ?o }")])
        .send()
        .await
        .unwrap();
    println!("--- unsupported query: {} {}", r.status(), r.text().await.unwrap());
    println!("--- metrics\n{}", client.get(format!("{base}/metrics")).send().await.unwrap().text().await.unwrap());

    if std::env::args().any(|a| a == "--forever") {
        server.wait().await;
    }
}
