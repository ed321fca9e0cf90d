//! Classify and answer queries in the restricted SPARQL fragment.

use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use kgod::extraction::ExtractionOptions;
use kgod::mappings::load_mappings;
use kgod::query::{bindings_to_sparql_json, classify, parse_query, Classification};
use kgod::rdf::NamespaceConfig;
use kgod::service::KnowledgeGraph;
use kgod::source::FixtureSource;

const QUERIES: &[&str] = &[
    "SELECT ?p ?o WHERE { <http://dbpedia.org/resource/Lost_Highway> ?p ?o }",
    "SELECT ?s WHERE { ?s <http://dbpedia.org/ontology/starring> <http://dbpedia.org/resource/Lost_Highway> }",
    "PREFIX dbo: <http://dbpedia.org/ontology/> SELECT ?f ?d WHERE { ?f dbo:director ?d }",
    "SELECT ?x WHERE { ?x ?p ?o . FILTER(?x) }",
];

#[tokio::main]
async fn main() {
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/corpus");
    let ns = NamespaceConfig::default();
    let mappings = load_mappings(&std::fs::read(corpus.join("mappings.txt")).unwrap(), &ns).unwrap();
    let source = Arc::new(FixtureSource::new(&corpus));
    let kg = KnowledgeGraph::new(source, ns.clone(), mappings, ExtractionOptions::default(), 4, 64, Duration::from_secs(60));

    for q in QUERIES {
        println!("{q}");
        match parse_query(q, &ns) {
            Ok(ast) => match classify(&ast, &ns) {
                Classification::Supported(anchors) => {
                    println!("  anchors: {:?}", anchors.iter().map(|a| a.iri.as_str()).collect::<Vec<_>>());
                    let b = kg.query(q).await.unwrap();
                    println!("  {}", String::from_utf8(bindings_to_sparql_json(&b)).unwrap());
                }
                Classification::Unsupported(r) => println!("  rejected: {} ({r})", r.kind()),
            },
            Err(e) => println!("  rejected: {e}"),
        }
    }
}
