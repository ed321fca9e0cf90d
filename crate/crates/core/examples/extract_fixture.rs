//! Extract a resource graph from the bundled fixture corpus.

use std::path::Path;
use std::sync::Arc;

use kgod::extraction::{ExtractionOptions, Extractor};
use kgod::mappings::load_mappings;
use kgod::rdf::{title_to_iri, NamespaceConfig};
use kgod::source::FixtureSource;

#[tokio::main]
async fn main() {
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/corpus");
    let ns = NamespaceConfig::default();
    let mappings = load_mappings(&std::fs::read(corpus.join("mappings.txt")).unwrap(), &ns).unwrap();
    let extractor = Extractor::new(Arc::new(FixtureSource::new(&corpus)), ns.clone(), 4);

    let iri = title_to_iri("Lost Highway", &ns).unwrap();
    let g = extractor.extract_resource(&iri, &mappings, &ExtractionOptions::default()).await.unwrap();
    println!("outgoing {}, ingoing {}", g.outgoing.len(), g.ingoing.len());
    println!("abstract: {:?}", g.abstract_text.as_ref().map(|a| a.lexical()));
    println!("pages processed: {}", g.provenance.pages_processed);

    let capped = ExtractionOptions { max_backlinks: Some(1), ..Default::default() };
    let g = extractor.extract_resource(&iri, &mappings, &capped).await.unwrap();
    println!("capped: ingoing {}, truncated {}", g.ingoing.len(), g.provenance.backlinks_truncated);
}
