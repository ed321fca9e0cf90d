#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use kgod::extraction::{extract_abstract, extract_outgoing, ExtractionOptions};
use kgod::mappings::{load_mappings, MappingSet};
use kgod::query::{PatternTerm, QueryAst, TriplePattern};
use kgod::rdf::{title_to_iri, xsd, Graph, Iri, Literal, NamespaceConfig, Term, Triple};
use kgod::service::KnowledgeGraph;
use kgod::source::{FixtureSource, LiveConfig, LiveSource, WikiSource};
use kgod::wikitext::parse_wikitext;

pub const FIXTURE_PAGES: [&str; 4] = ["Lost_Highway", "David_Lynch", "Bill_Pullman", "Patricia_Arquette"];

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/corpus")
}

pub fn ns() -> NamespaceConfig {
    NamespaceConfig::default()
}

pub fn dbr(local: &str) -> Iri {
    Iri::new(format!("http://dbpedia.org/resource/{local}")).unwrap()
}

pub fn dbo(local: &str) -> Iri {
    ns().ontology(local)
}

pub fn corpus_mappings(dir: &Path) -> MappingSet {
    load_mappings(&std::fs::read(dir.join("mappings.txt")).unwrap(), &ns()).unwrap()
}

pub fn graph_over(source: Arc<dyn WikiSource>, dir: &Path, ttl: Duration) -> KnowledgeGraph {
    KnowledgeGraph::new(source, ns(), corpus_mappings(dir), ExtractionOptions::default(), 4, 256, ttl)
}

pub fn fixture_graph(ttl: Duration) -> KnowledgeGraph {
    let dir = fixture_dir();
    graph_over(Arc::new(FixtureSource::new(&dir)), &dir, ttl)
}

/// Live client against a stub endpoint, fast enough for tests.
pub fn live_source(endpoint: &str) -> LiveSource {
    let mut cfg = LiveConfig::new(endpoint);
    cfg.rate_limit = 1000.0;
    cfg.backoff_base = Duration::from_millis(5);
    LiveSource::new(cfg).unwrap()
}

/// Every triple the corpus would produce if fully materialized: each page's
/// mapped triples, plus its abstract when asked. Built page by page from the
/// files, without backlinks or the query engine.
pub fn materialize(dir: &Path, with_abstracts: bool) -> Graph {
    let ns = ns();
    let mappings = corpus_mappings(dir);
    let mut g = Graph::new();
    for entry in std::fs::read_dir(dir.join("pages")).unwrap() {
        let path = entry.unwrap().path();
        let stem = path.file_stem().unwrap().to_string_lossy().replace("%2F", "/");
        let title = percent_encoding::percent_decode_str(&stem).decode_utf8_lossy().replace('_', " ");
        let page = parse_wikitext(&title, &std::fs::read_to_string(&path).unwrap());
        if page.is_redirect() {
            continue;
        }
        let subject = title_to_iri(&title, &ns).unwrap();
        g.extend_from(&extract_outgoing(&page, &subject, &mappings, &ns));
        if !with_abstracts {
            continue;
        }
        if let Some(a) = extract_abstract(&page, &ExtractionOptions::default()) {
            g.insert(Triple::new(subject, ns.abstract_predicate.clone(), a));
        }
    }
    g
}

pub type Solution = BTreeMap<String, Term>;

fn unify(sol: &mut Solution, pattern: &PatternTerm, value: &Term) -> bool {
    match pattern {
        PatternTerm::Var(v) => match sol.get(v) {
            Some(bound) => bound == value,
            None => {
                sol.insert(v.clone(), value.clone());
                true
            }
        },
        PatternTerm::Iri(i) => matches!(value, Term::Iri(x) if x == i),
        PatternTerm::Literal(l) => matches!(value, Term::Literal(x) if x == l),
    }
}

/// Nested-loop BGP evaluation over a whole graph.
pub fn naive_eval(patterns: &[TriplePattern], vars: &[String], g: &Graph) -> BTreeSet<Vec<Term>> {
    let mut sols = vec![Solution::new()];
    for p in patterns {
        let mut next = Vec::new();
        for sol in &sols {
            for t in g.iter() {
                let mut s = sol.clone();
                if unify(&mut s, &p.subject, &Term::Iri(t.subject.clone()))
                    && unify(&mut s, &p.predicate, &Term::Iri(t.predicate.clone()))
                    && unify(&mut s, &p.object, &t.object)
                {
                    next.push(s);
                }
            }
        }
        sols = next;
    }
    sols.iter().map(|s| vars.iter().map(|v| s[v].clone()).collect()).collect()
}

fn term_text(t: &PatternTerm) -> String {
    match t {
        PatternTerm::Var(v) => format!("?{v}"),
        PatternTerm::Iri(i) => format!("<{}>", i.as_str()),
        PatternTerm::Literal(l) => match (l.language(), l.datatype()) {
            (Some(lang), _) => format!("{:?}@{lang}", l.lexical()),
            (None, Some(dt)) => format!("{:?}^^<{}>", l.lexical(), dt.as_str()),
            (None, None) => format!("{:?}", l.lexical()),
        },
    }
}

pub fn query_text(patterns: &[TriplePattern]) -> String {
    let body: Vec<String> = patterns
        .iter()
        .map(|p| format!("{} {} {} .", term_text(&p.subject), term_text(&p.predicate), term_text(&p.object)))
        .collect();
    format!("SELECT * WHERE {{ {} }}", body.join(" "))
}

fn var(v: &str) -> PatternTerm {
    PatternTerm::Var(v.into())
}

fn is_fixed_resource(t: &PatternTerm) -> bool {
    matches!(t, PatternTerm::Iri(i) if i.as_str().starts_with("http://dbpedia.org/resource/"))
}

fn anchored(p: &TriplePattern) -> bool {
    is_fixed_resource(&p.subject) || is_fixed_resource(&p.object)
}

fn patterns_over(subjects: &[PatternTerm], predicates: &[PatternTerm], objects: &[PatternTerm]) -> Vec<TriplePattern> {
    let mut out = Vec::new();
    for s in subjects {
        for p in predicates {
            for o in objects {
                let tp = TriplePattern { subject: s.clone(), predicate: p.clone(), object: o.clone() };
                if anchored(&tp) {
                    out.push(tp);
                }
            }
        }
    }
    out
}

/// All anchored one-pattern queries over the fixture vocabulary, then all
/// anchored two-pattern queries over a smaller one. Queries without
/// variables are left out.
pub fn enumerate_queries() -> Vec<Vec<TriplePattern>> {
    let resources: Vec<PatternTerm> = FIXTURE_PAGES.iter().map(|p| PatternTerm::Iri(dbr(p))).collect();
    let n = ns();
    let mut subjects = resources.clone();
    subjects.extend([var("a"), var("b")]);
    let predicates: Vec<PatternTerm> = [dbo("starring"), dbo("director"), dbo("runtime"), dbo("abstract"), n.type_predicate.clone(), n.label_predicate.clone()]
        .into_iter()
        .map(PatternTerm::Iri)
        .chain([var("p")])
        .collect();
    let mut objects = resources.clone();
    objects.extend([
        var("a"),
        var("b"),
        var("o"),
        PatternTerm::Iri(dbo("Film")),
        PatternTerm::Literal(Literal::typed("134", xsd("integer"))),
        PatternTerm::Literal(Literal::lang("Lost Highway", "en").unwrap()),
    ]);
    let mut out: Vec<Vec<TriplePattern>> = patterns_over(&subjects, &predicates, &objects).into_iter().map(|p| vec![p]).collect();

    let small = patterns_over(
        &[PatternTerm::Iri(dbr("Lost_Highway")), PatternTerm::Iri(dbr("Bill_Pullman")), var("a")],
        &[PatternTerm::Iri(dbo("starring")), PatternTerm::Iri(dbo("director")), var("p")],
        &[PatternTerm::Iri(dbr("Lost_Highway")), PatternTerm::Iri(dbr("David_Lynch")), var("a"), var("o")],
    );
    for x in &small {
        for y in &small {
            out.push(vec![x.clone(), y.clone()]);
        }
    }
    out.retain(|q| q.iter().any(|p| p.vars().next().is_some()));
    out
}

pub fn ast_vars(ast: &QueryAst) -> Vec<String> {
    ast.variables()
}

const IRI_CHARS: &[char] = &['a', 'Z', '0', '_', '-', '.', '~', '2', 'F', '(', ')', ',', '\'', 'é', '世', '🎬', '/', '=', '&'];
const TEXT_CHARS: &[char] = &['a', ' ', '"', '\\', '\n', '\r', '\t', '\u{1}', '\u{7f}', 'é', '世', '🎬', '<', '>', '\'', '@', '^'];

fn pick_string(rng: &mut impl rand::Rng, alphabet: &[char], max: usize) -> String {
    let n = rng.random_range(0..=max);
    (0..n).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect()
}

pub fn fuzz_iri(rng: &mut impl rand::Rng) -> Iri {
    let escape = if rng.random_bool(0.3) { "%2F" } else { "" };
    let tail = ["", "?q=1", "#frag", "?a=b&c#d"][rng.random_range(0..4)];
    Iri::new(format!("http://example.org/{}{escape}{}{tail}", pick_string(rng, IRI_CHARS, 8), pick_string(rng, IRI_CHARS, 4)))
        .unwrap()
}

pub fn fuzz_literal(rng: &mut impl rand::Rng) -> Literal {
    let text = pick_string(rng, TEXT_CHARS, 16);
    match rng.random_range(0..4) {
        0 => Literal::simple(text),
        1 => Literal::lang(text, ["en", "de", "en-US", "zh-Hant-TW"][rng.random_range(0..4)]).unwrap(),
        2 => Literal::typed(text, xsd(["integer", "date", "double", "string"][rng.random_range(0..4)])),
        _ => Literal::typed(text, fuzz_iri(rng)),
    }
}

pub fn fuzz_graph(rng: &mut impl rand::Rng) -> Graph {
    let mut g = Graph::new();
    for _ in 0..rng.random_range(0..12) {
        let object: Term = if rng.random_bool(0.5) { fuzz_iri(rng).into() } else { fuzz_literal(rng).into() };
        g.insert(Triple::new(fuzz_iri(rng), fuzz_iri(rng), object));
    }
    g
}

/// Parses with an independent RDF library, as a set of canonical strings.
pub fn oxttl_triples(bytes: &[u8], turtle: bool) -> BTreeSet<String> {
    if turtle {
        oxttl::TurtleParser::new().for_slice(bytes).map(|t| t.unwrap().to_string()).collect()
    } else {
        oxttl::NTriplesParser::new().for_slice(bytes).map(|t| t.unwrap().to_string()).collect()
    }
}
