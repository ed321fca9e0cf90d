//! RDF terms, triples and graphs, plus the page-title codec and the
//! N-Triples / Turtle serializers.
//!
//! Blank nodes are not modelled: every subject is an [`Iri`] and every
//! object is either an [`Iri`] or a [`Literal`].

mod codec;
mod ntriples;
mod turtle;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub use codec::{iri_to_title, normalize_title, title_to_iri};
pub(crate) use codec::encode_local_name;
pub use ntriples::{parse_ntriples, serialize_ntriples, term_to_ntriples};
pub use turtle::serialize_turtle;

pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RdfError {
    #[error("invalid IRI {0:?}: {1}")]
    InvalidIri(String, &'static str),
    #[error("invalid language tag {0:?}")]
    InvalidLanguage(String),
    #[error("page title is empty")]
    EmptyTitle,
    #[error("IRI {iri} is outside the resource namespace {base}")]
    ForeignIri { iri: String, base: String },
    #[error("N-Triples syntax error on line {line}: {reason}")]
    Syntax { line: usize, reason: String },
}

/// An absolute IRI.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri(String);

impl Iri {
    pub fn new(value: impl Into<String>) -> Result<Self, RdfError> {
        let value = value.into();
        validate_iri(&value).map_err(|reason| RdfError::InvalidIri(value.clone(), reason))?;
        Ok(Iri(value))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }

    /// Joins a namespace prefix and a local part; the result is validated.
    pub fn join(&self, local: &str) -> Result<Iri, RdfError> {
        Iri::new(format!("{}{}", self.0, local))
    }

    /// Returns the part after `prefix` when this IRI starts with it.
    pub fn strip_prefix<'a>(&'a self, prefix: &Iri) -> Option<&'a str> {
        self.0.strip_prefix(prefix.as_str())
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Iri {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

fn validate_iri(value: &str) -> Result<(), &'static str> {
    let Some(colon) = value.find(':') else {
        return Err("missing scheme");
    };
    let scheme = &value[..colon];
    let mut chars = scheme.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return Err("scheme must start with a letter"),
    }
    if !chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.')) {
        return Err("invalid scheme character");
    }
    for c in value.chars() {
        if c.is_control() {
            return Err("control character");
        }
        if matches!(c, ' ' | '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\') {
            return Err("forbidden character");
        }
    }
    Ok(())
}

/// A literal: lexical form plus either a datatype or a language tag (or
/// neither, for a simple string).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    lexical: String,
    datatype: Option<Iri>,
    language: Option<String>,
}

impl Literal {
    pub fn simple(lexical: impl Into<String>) -> Self {
        Literal { lexical: lexical.into(), datatype: None, language: None }
    }

    pub fn typed(lexical: impl Into<String>, datatype: Iri) -> Self {
        Literal { lexical: lexical.into(), datatype: Some(datatype), language: None }
    }

    pub fn lang(lexical: impl Into<String>, language: impl Into<String>) -> Result<Self, RdfError> {
        let language = language.into();
        if !is_language_tag(&language) {
            return Err(RdfError::InvalidLanguage(language));
        }
        Ok(Literal { lexical: lexical.into(), datatype: None, language: Some(language) })
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> Option<&Iri> {
        self.datatype.as_ref()
    }

    pub fn language(&self) -> Option<&str> {
        self.language.as_deref()
    }
}

pub(crate) fn is_language_tag(tag: &str) -> bool {
    let mut parts = tag.split('-');
    let first = parts.next().unwrap_or("");
    !first.is_empty()
        && first.len() <= 8
        && first.chars().all(|c| c.is_ascii_alphabetic())
        && parts.all(|p| !p.is_empty() && p.len() <= 8 && p.chars().all(|c| c.is_ascii_alphanumeric()))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(Iri),
    Literal(Literal),
}

impl Term {
    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) => Some(iri),
            Term::Literal(_) => None,
        }
    }
}

impl From<Iri> for Term {
    fn from(iri: Iri) -> Self {
        Term::Iri(iri)
    }
}

impl From<Literal> for Term {
    fn from(lit: Literal) -> Self {
        Term::Literal(lit)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: Iri,
    pub predicate: Iri,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Iri, predicate: Iri, object: impl Into<Term>) -> Self {
        Triple { subject, predicate, object: object.into() }
    }
}

/// A duplicate-free set of triples.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    triples: BTreeSet<Triple>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns `true` if the triple was not already present.
    pub fn insert(&mut self, triple: Triple) -> bool {
        self.triples.insert(triple)
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    pub fn extend_from(&mut self, other: &Graph) {
        self.triples.extend(other.triples.iter().cloned());
    }

    pub fn filter(&self, mut keep: impl FnMut(&Triple) -> bool) -> Graph {
        self.triples.iter().filter(|t| keep(t)).cloned().collect()
    }
}

impl FromIterator<Triple> for Graph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        Graph { triples: iter.into_iter().collect() }
    }
}

impl Extend<Triple> for Graph {
    fn extend<I: IntoIterator<Item = Triple>>(&mut self, iter: I) {
        self.triples.extend(iter);
    }
}

impl IntoIterator for Graph {
    type Item = Triple;
    type IntoIter = std::collections::btree_set::IntoIter<Triple>;

    fn into_iter(self) -> Self::IntoIter {
        self.triples.into_iter()
    }
}

impl<'a> IntoIterator for &'a Graph {
    type Item = &'a Triple;
    type IntoIter = std::collections::btree_set::Iter<'a, Triple>;

    fn into_iter(self) -> Self::IntoIter {
        self.triples.iter()
    }
}

/// Namespaces and well-known predicates used when minting triples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamespaceConfig {
    pub resource_base: Iri,
    pub ontology_base: Iri,
    pub abstract_predicate: Iri,
    pub type_predicate: Iri,
    pub label_predicate: Iri,
    pub redirect_predicate: Iri,
    /// Language tag attached to `rdfs:label` values.
    pub label_language: String,
}

impl Default for NamespaceConfig {
    fn default() -> Self {
        let iri = |s: &str| Iri::new(s).expect("built-in IRI");
        NamespaceConfig {
            resource_base: iri("http://dbpedia.org/resource/"),
            ontology_base: iri("http://dbpedia.org/ontology/"),
            abstract_predicate: iri("http://dbpedia.org/ontology/abstract"),
            type_predicate: iri(&format!("{RDF}type")),
            label_predicate: iri(&format!("{RDFS}label")),
            redirect_predicate: iri("http://dbpedia.org/ontology/wikiPageRedirects"),
            label_language: "en".to_string(),
        }
    }
}

impl NamespaceConfig {
    /// Checks that both namespace prefixes end in `/` or `#`.
    pub fn validate(&self) -> Result<(), RdfError> {
        for base in [&self.resource_base, &self.ontology_base] {
            if !(base.as_str().ends_with('/') || base.as_str().ends_with('#')) {
                return Err(RdfError::InvalidIri(base.to_string(), "namespace must end in '/' or '#'"));
            }
        }
        if !is_language_tag(&self.label_language) {
            return Err(RdfError::InvalidLanguage(self.label_language.clone()));
        }
        Ok(())
    }

    pub fn ontology(&self, local: &str) -> Iri {
        self.ontology_base.join(local).expect("ontology local name")
    }

    /// Prefix table used by mapping files, queries and Turtle output.
    pub fn prefixes(&self) -> Vec<(String, Iri)> {
        vec![
            ("dbr".to_string(), self.resource_base.clone()),
            ("dbo".to_string(), self.ontology_base.clone()),
            ("rdf".to_string(), Iri(RDF.to_string())),
            ("rdfs".to_string(), Iri(RDFS.to_string())),
            ("xsd".to_string(), Iri(XSD.to_string())),
        ]
    }
}

pub fn xsd(local: &str) -> Iri {
    Iri(format!("{XSD}{local}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iri_validation() {
        assert!(Iri::new("http://dbpedia.org/resource/Lost_Highway").is_ok());
        assert!(Iri::new("urn:x").is_ok());
        assert!(Iri::new("no-scheme").is_err());
        assert!(Iri::new("http://a b").is_err());
        assert!(Iri::new("http://a\u{7}").is_err());
        assert!(Iri::new("http://a|b").is_err());
        assert!(Iri::new("1http://a").is_err());
    }

    #[test]
    fn literal_language_validation() {
        assert!(Literal::lang("x", "en").is_ok());
        assert!(Literal::lang("x", "en-GB").is_ok());
        assert!(Literal::lang("x", "").is_err());
        assert!(Literal::lang("x", "e n").is_err());
    }

    #[test]
    fn graph_has_set_semantics() {
        let ns = NamespaceConfig::default();
        let t = Triple::new(ns.resource_base.join("A").unwrap(), ns.ontology("p"), Literal::simple("v"));
        let mut g = Graph::new();
        assert!(g.insert(t.clone()));
        assert!(!g.insert(t));
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn default_namespaces_are_valid() {
        NamespaceConfig::default().validate().unwrap();
        let bad = NamespaceConfig { resource_base: Iri::new("http://x.org/res").unwrap(), ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
