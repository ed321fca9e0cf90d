mod common;

use std::sync::Arc;

use common::*;
use kgod::bench::{generate_random_corpus, generate_synthetic_corpus};
use kgod::extraction::{ExtractionOptions, Extractor};
use kgod::rdf::{parse_ntriples, serialize_ntriples, title_to_iri, Term};
use kgod::source::FixtureSource;
use proptest::prelude::*;
use rand::SeedableRng;

fn block_on<F: std::future::Future>(f: F) -> F::Output {
    tokio::runtime::Builder::new_current_thread().build().unwrap().block_on(f)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn outgoing_and_ingoing_partition_the_global_graph(seed in any::<u64>(), pages in 20usize..40) {
        let dir = tempfile::tempdir().unwrap();
        let titles = generate_random_corpus(dir.path(), pages, seed).unwrap();
        let global = materialize(dir.path(), false);
        let ns = ns();
        let extractor = Extractor::new(Arc::new(FixtureSource::new(dir.path())), ns.clone(), 4);
        let mappings = corpus_mappings(dir.path());
        let mut union = kgod::rdf::Graph::new();
        for title in &titles {
            let s = title_to_iri(title, &ns).unwrap();
            let Ok(g) = block_on(extractor.extract_resource(&s, &mappings, &ExtractionOptions::default())) else { continue };
            if !g.redirected_from.is_empty() {
                continue;
            }
            let st = Term::Iri(s.clone());
            prop_assert!(g.outgoing.iter().all(|t| t.subject == s));
            prop_assert!(g.ingoing.iter().all(|t| t.object == st && t.subject != s));
            prop_assert_eq!(&g.outgoing, &global.filter(|t| t.subject == s));
            prop_assert_eq!(&g.ingoing, &global.filter(|t| t.object == st && t.subject != s));
            union.extend_from(&g.outgoing);
        }
        // every page's triples are reachable from its own subject
        prop_assert_eq!(union, global);
    }

    #[test]
    fn cap_bounds_pages_processed(k in 0usize..30, m in proptest::option::of(0usize..40)) {
        let dir = tempfile::tempdir().unwrap();
        generate_synthetic_corpus(&[k], dir.path(), k as u64).unwrap();
        let ns = ns();
        let extractor = Extractor::new(Arc::new(FixtureSource::new(dir.path())), ns.clone(), 8);
        let iri = title_to_iri(&format!("Target {k}"), &ns).unwrap();
        let opts = ExtractionOptions { max_backlinks: m, ..Default::default() };
        let g = block_on(extractor.extract_resource(&iri, &corpus_mappings(dir.path()), &opts)).unwrap();
        prop_assert_eq!(g.provenance.pages_processed, 1 + m.map_or(k, |m| m.min(k)));
        prop_assert_eq!(g.provenance.backlinks_truncated, m.is_some_and(|m| m < k));
        prop_assert_eq!(g.ingoing.len(), m.map_or(k, |m| m.min(k)));
    }

    #[test]
    fn fuzzed_graphs_round_trip(seed in any::<u64>()) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g = fuzz_graph(&mut rng);
        let bytes = serialize_ntriples(&g);
        prop_assert_eq!(parse_ntriples(&bytes).unwrap(), g.clone());
        prop_assert_eq!(oxttl_triples(&bytes, false).len(), g.len());
    }
}
