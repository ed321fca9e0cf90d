//! The restricted SPARQL fragment: SELECT over basic graph patterns in
//! which every pattern has a fixed resource in subject or object position.

mod parser;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use async_trait::async_trait;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::extraction::{ExtractionError, ResourceGraph};
use crate::rdf::{Graph, Iri, Literal, NamespaceConfig, Term, Triple};

pub use parser::parse_query;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PatternTerm {
    Var(String),
    Iri(Iri),
    Literal(Literal),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub predicate: PatternTerm,
    pub object: PatternTerm,
}

impl TriplePattern {
    pub fn vars(&self) -> impl Iterator<Item = &str> {
        [&self.subject, &self.predicate, &self.object].into_iter().filter_map(|t| match t {
            PatternTerm::Var(v) => Some(v.as_str()),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Projection {
    Vars(Vec<String>),
    Star,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryAst {
    pub select: Projection,
    pub patterns: Vec<TriplePattern>,
}

impl QueryAst {
    /// Selected variables; for `*`, every pattern variable in order of
    /// first occurrence.
    pub fn variables(&self) -> Vec<String> {
        match &self.select {
            Projection::Vars(v) => v.clone(),
            Projection::Star => {
                let mut out: Vec<String> = Vec::new();
                for v in self.patterns.iter().flat_map(TriplePattern::vars) {
                    if !out.iter().any(|o| o == v) {
                        out.push(v.to_string());
                    }
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnchorPosition {
    Subject,
    Object,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Anchor {
    pub iri: Iri,
    pub position: AnchorPosition,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnsupportedReason {
    #[error("pattern {0} has no fixed resource in subject or object position")]
    NoFixedResource(usize),
    #[error("variable ?{0} does not occur in any pattern")]
    UnanchoredVariable(String),
    #[error("unsupported SPARQL feature: {0}")]
    UnsupportedSyntax(String),
}

impl UnsupportedReason {
    pub fn kind(&self) -> &'static str {
        match self {
            UnsupportedReason::NoFixedResource(_) => "NoFixedResource",
            UnsupportedReason::UnanchoredVariable(_) => "UnanchoredVariable",
            UnsupportedReason::UnsupportedSyntax(_) => "UnsupportedSyntax",
        }
    }

    pub fn pattern_index(&self) -> Option<usize> {
        match self {
            UnsupportedReason::NoFixedResource(i) => Some(*i),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Classification {
    /// One anchor per pattern.
    Supported(Vec<Anchor>),
    Unsupported(UnsupportedReason),
}

#[derive(Debug, Clone, Error)]
pub enum QueryError {
    #[error("parse error at byte {position}: expected {expected}")]
    Parse { position: usize, expected: String },
    #[error("unsupported SPARQL feature: {0}")]
    UnsupportedSyntax(String),
    #[error("query not supported: {0}")]
    NotSupported(UnsupportedReason),
    #[error("extracting {anchor} failed: {cause}")]
    Evaluation { anchor: Iri, cause: ExtractionError },
}

impl QueryError {
    /// The unsupported-query reason, for both syntax-level and
    /// classification-level rejections.
    pub fn unsupported_reason(&self) -> Option<UnsupportedReason> {
        match self {
            QueryError::UnsupportedSyntax(s) => Some(UnsupportedReason::UnsupportedSyntax(s.clone())),
            QueryError::NotSupported(r) => Some(r.clone()),
            _ => None,
        }
    }
}

fn resource_iri<'a>(term: &'a PatternTerm, ns: &NamespaceConfig) -> Option<&'a Iri> {
    match term {
        PatternTerm::Iri(iri) if iri.strip_prefix(&ns.resource_base).is_some_and(|l| !l.is_empty()) => Some(iri),
        _ => None,
    }
}

/// A pattern is answerable when its subject or object is a resource IRI;
/// the subject is preferred when both are.
pub fn classify(ast: &QueryAst, ns: &NamespaceConfig) -> Classification {
    let mut anchors = Vec::with_capacity(ast.patterns.len());
    if ast.patterns.is_empty() {
        return Classification::Unsupported(UnsupportedReason::NoFixedResource(0));
    }
    for (i, p) in ast.patterns.iter().enumerate() {
        let anchor = if let Some(iri) = resource_iri(&p.subject, ns) {
            Anchor { iri: iri.clone(), position: AnchorPosition::Subject }
        } else if let Some(iri) = resource_iri(&p.object, ns) {
            Anchor { iri: iri.clone(), position: AnchorPosition::Object }
        } else {
            return Classification::Unsupported(UnsupportedReason::NoFixedResource(i));
        };
        anchors.push(anchor);
    }
    if let Projection::Vars(vars) = &ast.select {
        for v in vars {
            if !ast.patterns.iter().any(|p| p.vars().any(|pv| pv == v)) {
                return Classification::Unsupported(UnsupportedReason::UnanchoredVariable(v.clone()));
            }
        }
    }
    Classification::Supported(anchors)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BindingSet {
    pub variables: Vec<String>,
    /// Each row holds one term per variable, in `variables` order.
    pub rows: Vec<Vec<Term>>,
}

/// Source of resource graphs for query evaluation.
#[async_trait]
pub trait ResourceExtractor: Send + Sync {
    async fn extract(&self, iri: &Iri) -> Result<Arc<ResourceGraph>, ExtractionError>;
}

type Row = BTreeMap<String, Term>;

fn bind(row: &mut Row, pattern: &PatternTerm, value: Term) -> bool {
    match pattern {
        PatternTerm::Var(v) => match row.get(v) {
            Some(existing) => *existing == value,
            None => {
                row.insert(v.clone(), value);
                true
            }
        },
        PatternTerm::Iri(iri) => value == Term::Iri(iri.clone()),
        PatternTerm::Literal(lit) => value == Term::Literal(lit.clone()),
    }
}

/// Solutions of one pattern over `triples`.
pub fn match_pattern<'a>(pattern: &TriplePattern, triples: impl IntoIterator<Item = &'a Triple>) -> Vec<Row> {
    triples
        .into_iter()
        .filter_map(|t| {
            let mut row = Row::new();
            let ok = bind(&mut row, &pattern.subject, Term::Iri(t.subject.clone()))
                && bind(&mut row, &pattern.predicate, Term::Iri(t.predicate.clone()))
                && bind(&mut row, &pattern.object, t.object.clone());
            ok.then_some(row)
        })
        .collect()
}

/// Natural join on shared variables.
pub fn join(left: &[Row], right: &[Row]) -> Vec<Row> {
    let mut out = Vec::new();
    for l in left {
        for r in right {
            if r.iter().all(|(k, v)| l.get(k).is_none_or(|lv| lv == v)) {
                let mut merged = l.clone();
                merged.extend(r.iter().map(|(k, v)| (k.clone(), v.clone())));
                out.push(merged);
            }
        }
    }
    out
}

/// Projects, dedupes and sorts solution rows.
pub fn project(variables: Vec<String>, rows: &[Row]) -> BindingSet {
    let unique: BTreeSet<Vec<Term>> = rows
        .iter()
        .filter_map(|r| variables.iter().map(|v| r.get(v).cloned()).collect::<Option<Vec<_>>>())
        .collect();
    BindingSet { variables, rows: unique.into_iter().collect() }
}

/// Evaluates a supported query, extracting every distinct anchor once.
pub async fn evaluate(
    ast: &QueryAst,
    extractor: &dyn ResourceExtractor,
    ns: &NamespaceConfig,
) -> Result<BindingSet, QueryError> {
    let anchors = match classify(ast, ns) {
        Classification::Supported(a) => a,
        Classification::Unsupported(reason) => return Err(QueryError::NotSupported(reason)),
    };
    let mut distinct: Vec<Iri> = Vec::new();
    for a in &anchors {
        if !distinct.contains(&a.iri) {
            distinct.push(a.iri.clone());
        }
    }
    let graphs = futures::future::join_all(distinct.iter().map(|iri| extractor.extract(iri))).await;
    let mut by_anchor = BTreeMap::new();
    for (iri, result) in distinct.into_iter().zip(graphs) {
        let graph = result.map_err(|cause| QueryError::Evaluation { anchor: iri.clone(), cause })?;
        by_anchor.insert(iri, graph);
    }

    let mut rows: Vec<Row> = vec![Row::new()];
    for (pattern, anchor) in ast.patterns.iter().zip(&anchors) {
        let rg = &by_anchor[&anchor.iri];
        let candidates: Graph = match anchor.position {
            AnchorPosition::Subject => {
                let mut g = rg.outgoing.clone();
                g.extend_from(&rg.redirects);
                g.extend(rg.abstract_triple(ns));
                g
            }
            // self-links live in outgoing, not ingoing
            AnchorPosition::Object => {
                let mut g = rg.ingoing.clone();
                g.extend(rg.outgoing.iter().filter(|t| t.object.as_iri() == Some(&anchor.iri)).cloned());
                g
            }
        };
        rows = join(&rows, &match_pattern(pattern, candidates.iter()));
        if rows.is_empty() {
            break;
        }
    }
    Ok(project(ast.variables(), &rows))
}

/// A term in the SPARQL JSON results encoding.
pub fn term_json(term: &Term) -> Value {
    match term {
        Term::Iri(iri) => json!({"type": "uri", "value": iri.as_str()}),
        Term::Literal(lit) => {
            let mut m = Map::new();
            m.insert("type".into(), "literal".into());
            m.insert("value".into(), lit.lexical().into());
            if let Some(lang) = lit.language() {
                m.insert("xml:lang".into(), lang.into());
            } else if let Some(dt) = lit.datatype() {
                m.insert("datatype".into(), dt.as_str().into());
            }
            Value::Object(m)
        }
    }
}

/// SPARQL 1.1 Query Results JSON, rows ordered by their serialized form.
pub fn bindings_to_sparql_json(b: &BindingSet) -> Vec<u8> {
    let mut rows: Vec<String> = b
        .rows
        .iter()
        .map(|row| {
            let m: Map<String, Value> = b.variables.iter().cloned().zip(row.iter().map(term_json)).collect();
            Value::Object(m).to_string()
        })
        .collect();
    rows.sort();
    format!("{{\"head\":{{\"vars\":{}}},\"results\":{{\"bindings\":[{}]}}}}", json!(b.variables), rows.join(","))
        .into_bytes()
}
