//! Extract a resource from live Wikipedia. Needs network access.
//!
//!     cargo run --example live_wikipedia -- "Lost Highway (film)"

use std::path::Path;
use std::sync::Arc;

use kgod::extraction::{ExtractionOptions, Extractor};
use kgod::mappings::load_mappings;
use kgod::rdf::{serialize_turtle, title_to_iri, NamespaceConfig};
use kgod::source::{LiveConfig, LiveSource};
use kgod::service::DEFAULT_API;

#[tokio::main]
async fn main() {
    let title = std::env::args().nth(1).unwrap_or_else(|| "Lost Highway (film)".into());
    let ns = NamespaceConfig::default();
    let file = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/corpus/mappings.txt");
    let mappings = load_mappings(&std::fs::read(file).unwrap(), &ns).unwrap();
    let source = LiveSource::new(LiveConfig::new(DEFAULT_API)).expect("http client");
    let extractor = Extractor::new(Arc::new(source), ns.clone(), 4);

    let iri = title_to_iri(&title, &ns).unwrap();
    let opts = ExtractionOptions { max_backlinks: Some(20), ..Default::default() };
    match extractor.extract_resource(&iri, &mappings, &opts).await {
        Ok(g) => {
            print!("{}", String::from_utf8_lossy(&serialize_turtle(&g.to_graph(&ns), &ns)));
            eprintln!("{} pages, revision {:?}", g.provenance.pages_processed, g.provenance.revision_id);
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}
