//! The on-demand pipeline: resolve, backlinks, fetch, map, abstract.

use std::sync::Arc;
use std::time::Instant;

use thiserror::Error;

use crate::mappings::{apply_mappings, CoercionWarning, MappingSet};
use crate::rdf::{iri_to_title, title_to_iri, Graph, Iri, Literal, NamespaceConfig, Triple};
use crate::source::{fetch_many, PageFetch, SourceError, WikiSource};
use crate::wikitext::{first_sentences, parse_wikitext, strip_to_plaintext, ParsedPage};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExtractionOptions {
    pub abstract_sentences: usize,
    pub abstract_language: String,
    pub follow_redirects: usize,
    pub include_ingoing: bool,
    pub max_backlinks: Option<usize>,
}

impl Default for ExtractionOptions {
    fn default() -> Self {
        ExtractionOptions {
            abstract_sentences: 3,
            abstract_language: "en".into(),
            follow_redirects: 3,
            include_ingoing: true,
            max_backlinks: None,
        }
    }
}

impl ExtractionOptions {
    /// Stable text form used in cache keys.
    pub fn digest(&self) -> String {
        format!(
            "s{};l{};r{};i{};m{}",
            self.abstract_sentences,
            self.abstract_language,
            self.follow_redirects,
            u8::from(self.include_ingoing),
            self.max_backlinks.map_or("*".to_string(), |m| m.to_string())
        )
    }
}

pub const STEP_NAMES: [&str; 5] = ["resolve", "backlinks", "fetch", "generate", "abstract"];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Provenance {
    pub revision_id: Option<u64>,
    pub backlink_count: usize,
    pub backlinks_truncated: bool,
    pub pages_processed: usize,
    pub coercion_warnings: Vec<CoercionWarning>,
    /// Backlink pages that were not extracted, with the reason.
    pub skipped_backlinks: Vec<(String, String)>,
    /// Milliseconds per step, in `STEP_NAMES` order.
    pub elapsed_ms: [f64; 5],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResourceGraph {
    pub subject: Iri,
    pub outgoing: Graph,
    pub ingoing: Graph,
    pub abstract_text: Option<Literal>,
    /// `<from> redirect_predicate <to>` for every redirect hop followed to
    /// reach `subject`. Kept apart from `outgoing`, whose subjects are all
    /// `subject`.
    pub redirects: Graph,
    pub redirected_from: Vec<Iri>,
    pub provenance: Provenance,
}

impl ResourceGraph {
    pub fn abstract_triple(&self, ns: &NamespaceConfig) -> Option<Triple> {
        self.abstract_text
            .as_ref()
            .map(|a| Triple::new(self.subject.clone(), ns.abstract_predicate.clone(), a.clone()))
    }

    /// Outgoing, ingoing, redirect and abstract triples as one graph.
    pub fn to_graph(&self, ns: &NamespaceConfig) -> Graph {
        let mut g = self.outgoing.clone();
        g.extend_from(&self.ingoing);
        g.extend_from(&self.redirects);
        g.extend(self.abstract_triple(ns));
        g
    }
}

#[derive(Debug, Clone, Error)]
pub enum ExtractionError {
    #[error("no page for {0}")]
    ResourceMissing(Iri),
    #[error("redirect chain too long: {}", .0.iter().map(Iri::as_str).collect::<Vec<_>>().join(" -> "))]
    RedirectLoop(Vec<Iri>),
    #[error("source failure: {0}")]
    SourceFailure(#[from] SourceError),
    #[error("{0} is not in the resource namespace")]
    ForeignIri(Iri),
}

/// Mapping output of a single page.
pub fn extract_outgoing(page: &ParsedPage, subject: &Iri, mappings: &MappingSet, ns: &NamespaceConfig) -> Graph {
    apply_mappings(page, subject, mappings, ns).graph
}

/// Triples of `pages` whose object is `subject`, excluding self-links.
pub fn extract_ingoing(subject: &Iri, pages: &[ParsedPage], mappings: &MappingSet, ns: &NamespaceConfig) -> Graph {
    let mut out = Graph::new();
    for page in pages {
        let Ok(s) = title_to_iri(&page.title, ns) else { continue };
        if &s == subject {
            continue;
        }
        out.extend(extract_outgoing(page, &s, mappings, ns).filter(|t| t.object.as_iri() == Some(subject)));
    }
    out
}

pub fn extract_abstract(page: &ParsedPage, opts: &ExtractionOptions) -> Option<Literal> {
    let text = first_sentences(&strip_to_plaintext(page), opts.abstract_sentences);
    if text.is_empty() {
        return None;
    }
    Literal::lang(text, opts.abstract_language.as_str()).ok()
}

pub struct Extractor {
    source: Arc<dyn WikiSource>,
    ns: NamespaceConfig,
    fetch_parallelism: usize,
}

fn ms_since(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1000.0
}

impl Extractor {
    pub fn new(source: Arc<dyn WikiSource>, ns: NamespaceConfig, fetch_parallelism: usize) -> Self {
        Extractor { source, ns, fetch_parallelism: fetch_parallelism.max(1) }
    }

    pub fn namespaces(&self) -> &NamespaceConfig {
        &self.ns
    }

    pub fn source(&self) -> &Arc<dyn WikiSource> {
        &self.source
    }

    pub async fn extract_resource(
        &self,
        iri: &Iri,
        mappings: &MappingSet,
        opts: &ExtractionOptions,
    ) -> Result<ResourceGraph, ExtractionError> {
        let ns = &self.ns;
        let mut prov = Provenance::default();

        // 1. resolve
        let t = Instant::now();
        let title = iri_to_title(iri, ns).map_err(|_| ExtractionError::ForeignIri(iri.clone()))?;
        let mut current = title_to_iri(&title, ns).map_err(|_| ExtractionError::ForeignIri(iri.clone()))?;
        prov.elapsed_ms[0] = ms_since(t);

        // 3a. main page, following redirects
        let t = Instant::now();
        let mut chain = vec![current.clone()];
        let mut redirects = Graph::new();
        let (fetch, page) = loop {
            let title = iri_to_title(&current, ns).map_err(|_| ExtractionError::ForeignIri(current.clone()))?;
            let fetch = self.source.fetch_page_source(&title).await?;
            let Some(text) = fetch.wikitext.as_deref().filter(|_| !fetch.missing) else {
                return Err(ExtractionError::ResourceMissing(current));
            };
            let page = parse_wikitext(&fetch.resolved_title, text);
            let Some(target) = page.redirect_target.as_deref() else { break (fetch, page) };
            let next = title_to_iri(target, ns).map_err(|_| ExtractionError::ResourceMissing(current.clone()))?;
            chain.push(next.clone());
            if chain.len() > opts.follow_redirects + 1 {
                return Err(ExtractionError::RedirectLoop(chain));
            }
            redirects.insert(Triple::new(current.clone(), ns.redirect_predicate.clone(), next.clone()));
            current = next;
        };
        let subject = current;
        prov.revision_id = fetch.revision_id;
        let mut fetch_ms = ms_since(t);

        // 2. backlinks
        let t = Instant::now();
        let backlinks = if opts.include_ingoing {
            let list = self.source.fetch_backlinks(&fetch.resolved_title, opts.max_backlinks).await?;
            prov.backlinks_truncated = list.truncated;
            list.backlinks
        } else {
            Vec::new()
        };
        prov.backlink_count = backlinks.len();
        prov.elapsed_ms[1] = ms_since(t);

        // 3b. backlink sources
        let t = Instant::now();
        let fetched = fetch_many(self.source.as_ref(), &backlinks, self.fetch_parallelism).await;
        let mut backlink_pages = Vec::new();
        for (title, result) in backlinks.iter().zip(fetched) {
            match result {
                Ok(PageFetch { missing: true, .. }) => prov.skipped_backlinks.push((title.clone(), "missing".into())),
                Ok(PageFetch { wikitext: Some(text), resolved_title, .. }) => {
                    let page = parse_wikitext(&resolved_title, &text);
                    if page.is_redirect() {
                        prov.skipped_backlinks.push((title.clone(), "redirect".into()));
                    } else {
                        backlink_pages.push(page);
                    }
                }
                Ok(_) => prov.skipped_backlinks.push((title.clone(), "no content".into())),
                Err(e) => prov.skipped_backlinks.push((title.clone(), e.to_string())),
            }
        }
        fetch_ms += ms_since(t);
        prov.elapsed_ms[2] = fetch_ms;

        // 4. generate
        let t = Instant::now();
        let mapped = apply_mappings(&page, &subject, mappings, ns);
        let outgoing = mapped.graph;
        prov.coercion_warnings = mapped.warnings;
        let mut ingoing = Graph::new();
        for bp in &backlink_pages {
            let Ok(s) = title_to_iri(&bp.title, ns) else { continue };
            let mapped = apply_mappings(bp, &s, mappings, ns);
            prov.coercion_warnings.extend(mapped.warnings);
            if s != subject {
                ingoing.extend(mapped.graph.filter(|t| t.object.as_iri() == Some(&subject)));
            }
        }
        prov.pages_processed = 1 + backlink_pages.len();
        prov.elapsed_ms[3] = ms_since(t);

        // 5. abstract
        let t = Instant::now();
        let abstract_text = extract_abstract(&page, opts);
        prov.elapsed_ms[4] = ms_since(t);

        chain.pop();
        Ok(ResourceGraph { subject, outgoing, ingoing, abstract_text, redirects, redirected_from: chain, provenance: prov })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mappings::load_mappings;
    use crate::rdf::{xsd, Term};
    use crate::source::FixtureSource;

    const CORPUS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/corpus");

    fn ns() -> NamespaceConfig {
        NamespaceConfig::default()
    }

    fn res(local: &str) -> Iri {
        ns().resource_base.join(local).unwrap()
    }

    fn setup(dir: &str) -> (Extractor, MappingSet) {
        let mappings = load_mappings(&std::fs::read(format!("{CORPUS}/mappings.txt")).unwrap(), &ns()).unwrap();
        (Extractor::new(Arc::new(FixtureSource::new(dir)), ns(), 4), mappings)
    }

    #[tokio::test]
    async fn lost_highway() {
        let (ex, ms) = setup(CORPUS);
        let g = ex.extract_resource(&res("Lost_Highway"), &ms, &ExtractionOptions::default()).await.unwrap();
        let s = res("Lost_Highway");
        let outgoing: Graph = [
            Triple::new(s.clone(), ns().type_predicate, ns().ontology("Film")),
            Triple::new(s.clone(), ns().ontology("director"), res("David_Lynch")),
            Triple::new(s.clone(), ns().ontology("runtime"), Literal::typed("134", xsd("integer"))),
            Triple::new(s.clone(), ns().label_predicate, Literal::lang("Lost Highway", "en").unwrap()),
        ]
        .into_iter()
        .collect();
        assert_eq!(g.outgoing, outgoing);
        let ingoing: Graph = [
            Triple::new(res("Bill_Pullman"), ns().ontology("starring"), s.clone()),
            Triple::new(res("Patricia_Arquette"), ns().ontology("starring"), s.clone()),
        ]
        .into_iter()
        .collect();
        assert_eq!(g.ingoing, ingoing);
        assert_eq!(
            g.abstract_text,
            Some(
                Literal::lang(
                    "Lost Highway is a 1997 film directed by David Lynch. It stars Bill Pullman and Patricia Arquette.",
                    "en"
                )
                .unwrap()
            )
        );
        assert_eq!(g.provenance.pages_processed, 4);
        assert_eq!(g.provenance.backlink_count, 3);
        assert_eq!(g.to_graph(&ns()).len(), 7);
        assert!(g.provenance.elapsed_ms.iter().all(|ms| *ms >= 0.0));
    }

    #[tokio::test]
    async fn without_ingoing() {
        let (ex, ms) = setup(CORPUS);
        let opts = ExtractionOptions { include_ingoing: false, ..Default::default() };
        let g = ex.extract_resource(&res("Lost_Highway"), &ms, &opts).await.unwrap();
        assert_eq!(g.outgoing.len(), 4);
        assert!(g.ingoing.is_empty());
        assert_eq!(g.provenance.backlink_count, 0);
        assert_eq!(g.provenance.pages_processed, 1);
        assert_eq!(g.to_graph(&ns()).len(), 5);
    }

    #[tokio::test]
    async fn abstract_sentence_count() {
        let (ex, ms) = setup(CORPUS);
        let opts = ExtractionOptions { abstract_sentences: 1, include_ingoing: false, ..Default::default() };
        let g = ex.extract_resource(&res("Lost_Highway"), &ms, &opts).await.unwrap();
        assert_eq!(g.abstract_text.unwrap().lexical(), "Lost Highway is a 1997 film directed by David Lynch.");
    }

    #[tokio::test]
    async fn missing_and_foreign() {
        let (ex, ms) = setup(CORPUS);
        let err = ex.extract_resource(&res("No_Such_Page"), &ms, &ExtractionOptions::default()).await.unwrap_err();
        assert!(matches!(err, ExtractionError::ResourceMissing(i) if i == res("No_Such_Page")));
        let foreign = Iri::new("http://example.org/x").unwrap();
        let err = ex.extract_resource(&foreign, &ms, &ExtractionOptions::default()).await.unwrap_err();
        assert!(matches!(err, ExtractionError::ForeignIri(_)));
    }

    #[tokio::test]
    async fn ingoing_ignores_body_links_and_self_links() {
        let (_, ms) = setup(CORPUS);
        let pages = [
            parse_wikitext("Bill Pullman", "{{Infobox actor|notable_works=[[Lost Highway]]}}"),
            parse_wikitext("David Lynch", "{{Infobox person|occupation=Film director}} directed [[Lost Highway]]."),
            parse_wikitext("Lost Highway", "{{Infobox actor|notable_works=[[Lost Highway]]}}"),
        ];
        let g = extract_ingoing(&res("Lost_Highway"), &pages, &ms, &ns());
        assert_eq!(g.len(), 1);
        assert_eq!(g.iter().next().unwrap().subject, res("Bill_Pullman"));
        assert!(extract_ingoing(&res("Lost_Highway"), &[], &ms, &ns()).is_empty());
    }

    #[test]
    fn outgoing_examples() {
        let (_, ms) = setup(CORPUS);
        let empty = parse_wikitext("Empty", "");
        let g = extract_outgoing(&empty, &res("Empty"), &ms, &ns());
        assert_eq!(g.len(), 1);
        assert!(extract_abstract(&empty, &ExtractionOptions::default()).is_none());
        let infobox_only = parse_wikitext("F", "{{Infobox film|runtime=1}}");
        assert!(extract_abstract(&infobox_only, &ExtractionOptions::default()).is_none());
    }

    fn write_corpus(pages: &[(&str, &str)], backlinks: &[(&str, &str)]) -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir(dir.path().join("pages")).unwrap();
        for (title, text) in pages {
            std::fs::write(dir.path().join("pages").join(crate::source::fixture_file_name(title)), text).unwrap();
        }
        let tsv: String = backlinks.iter().map(|(t, s)| format!("{t}\t{s}\n")).collect();
        std::fs::write(dir.path().join("backlinks.tsv"), tsv).unwrap();
        dir
    }

    #[tokio::test]
    async fn redirects_are_followed() {
        let dir = write_corpus(
            &[
                ("Lost Highway (1997)", "#REDIRECT [[Lost Highway]]"),
                ("Lost Highway", "{{Infobox film|runtime=134}} A film."),
                ("Old name", "#REDIRECT [[Lost Highway (1997)]]"),
                ("Ghost", "#REDIRECT [[Nowhere]]"),
            ],
            &[("Lost_Highway", "Old_name"), ("Lost_Highway", "Missing_page")],
        );
        let (ex, ms) = setup(dir.path().to_str().unwrap());
        let g = ex.extract_resource(&res("Old_name"), &ms, &ExtractionOptions::default()).await.unwrap();
        assert_eq!(g.subject, res("Lost_Highway"));
        assert_eq!(g.redirected_from, [res("Old_name"), res("Lost_Highway_(1997)")]);
        assert_eq!(g.redirects.len(), 2);
        assert!(g.redirects.contains(&Triple::new(
            res("Old_name"),
            ns().redirect_predicate,
            res("Lost_Highway_(1997)")
        )));
        assert!(g.outgoing.iter().all(|t| t.subject == g.subject));
        // both backlinks skipped: one is a redirect, one is missing
        assert_eq!(g.provenance.pages_processed, 1);
        assert_eq!(g.provenance.skipped_backlinks.len(), 2);

        let opts = ExtractionOptions { follow_redirects: 1, ..Default::default() };
        let err = ex.extract_resource(&res("Old_name"), &ms, &opts).await.unwrap_err();
        let ExtractionError::RedirectLoop(chain) = err else { panic!() };
        assert!(chain.len() > 1);

        let err = ex.extract_resource(&res("Ghost"), &ms, &ExtractionOptions::default()).await.unwrap_err();
        assert!(matches!(err, ExtractionError::ResourceMissing(i) if i == res("Nowhere")));
    }

    #[tokio::test]
    async fn redirect_cycle_is_bounded() {
        let dir = write_corpus(&[("A", "#REDIRECT [[B]]"), ("B", "#REDIRECT [[A]]")], &[]);
        let (ex, ms) = setup(dir.path().to_str().unwrap());
        for depth in 0..5 {
            let opts = ExtractionOptions { follow_redirects: depth, ..Default::default() };
            let err = ex.extract_resource(&res("A"), &ms, &opts).await.unwrap_err();
            let ExtractionError::RedirectLoop(chain) = err else { panic!() };
            assert!(chain.len() > depth);
        }
    }

    #[tokio::test]
    async fn backlink_cap() {
        let (ex, ms) = setup(CORPUS);
        for m in 0..5 {
            let opts = ExtractionOptions { max_backlinks: Some(m), ..Default::default() };
            let g = ex.extract_resource(&res("Lost_Highway"), &ms, &opts).await.unwrap();
            assert_eq!(g.provenance.pages_processed, 1 + m.min(3));
            assert_eq!(g.provenance.backlinks_truncated, m < 3);
        }
    }

    #[tokio::test]
    async fn abstract_is_tagged_with_option_language() {
        let (ex, ms) = setup(CORPUS);
        let opts = ExtractionOptions { abstract_language: "de".into(), ..Default::default() };
        let g = ex.extract_resource(&res("Bill_Pullman"), &ms, &opts).await.unwrap();
        assert_eq!(g.abstract_text.unwrap().language(), Some("de"));
        assert!(g.ingoing.is_empty());
        assert!(g.outgoing.contains(&Triple::new(res("Bill_Pullman"), ns().ontology("starring"), res("Lost_Highway"))));
        assert!(g.outgoing.iter().any(|t| t.object == Term::Iri(ns().ontology("Actor"))));
    }
}
