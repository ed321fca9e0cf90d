use std::collections::BTreeMap;

use super::ntriples::escape_literal;
use super::{Graph, Iri, NamespaceConfig, Term, RDF};

struct Prefixes(Vec<(String, Iri)>);

impl Prefixes {
    /// Compact form when the local part is a plain PN_LOCAL (no escapes needed).
    fn compact(&self, iri: &Iri) -> Option<String> {
        // longest namespace wins
        let (name, base) = self
            .0
            .iter()
            .filter(|(_, base)| iri.as_str().starts_with(base.as_str()))
            .max_by_key(|(_, base)| base.as_str().len())?;
        let local = &iri.as_str()[base.as_str().len()..];
        is_plain_local(local).then(|| format!("{name}:{local}"))
    }

    fn render(&self, iri: &Iri) -> String {
        self.compact(iri).unwrap_or_else(|| format!("<{iri}>"))
    }
}

fn is_plain_local(local: &str) -> bool {
    let bytes = local.as_bytes();
    if bytes.is_empty() || bytes[0] == b'-' || bytes[0] == b'.' || bytes[bytes.len() - 1] == b'.' {
        return false;
    }
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'%' => {
                let hex = |j: usize| bytes.get(j).is_some_and(u8::is_ascii_hexdigit);
                if !(hex(i + 1) && hex(i + 2)) {
                    return false;
                }
                i += 3;
            }
            b if b.is_ascii_alphanumeric() || matches!(b, b'_' | b'-' | b':' | b'.') => i += 1,
            _ => return false,
        }
    }
    true
}

/// Serializes `graph` as Turtle with prefix declarations for the resource
/// and ontology namespaces. Triples are grouped by subject.
pub fn serialize_turtle(graph: &Graph, ns: &NamespaceConfig) -> Vec<u8> {
    let prefixes = Prefixes(ns.prefixes());
    let mut out = String::new();
    for (name, base) in &prefixes.0 {
        out.push_str(&format!("@prefix {name}: <{base}> .\n"));
    }
    let rdf_type = format!("{RDF}type");

    let mut by_subject: BTreeMap<String, BTreeMap<String, Vec<String>>> = BTreeMap::new();
    for t in graph {
        let predicate =
            if t.predicate.as_str() == rdf_type { "a".to_string() } else { prefixes.render(&t.predicate) };
        let object = match &t.object {
            Term::Iri(iri) => prefixes.render(iri),
            Term::Literal(lit) => {
                let mut s = String::from("\"");
                escape_literal(&mut s, lit.lexical());
                s.push('"');
                if let Some(lang) = lit.language() {
                    s.push('@');
                    s.push_str(lang);
                } else if let Some(dt) = lit.datatype() {
                    s.push_str("^^");
                    s.push_str(&prefixes.render(dt));
                }
                s
            }
        };
        by_subject
            .entry(prefixes.render(&t.subject))
            .or_default()
            .entry(predicate)
            .or_default()
            .push(object);
    }

    if !by_subject.is_empty() {
        out.push('\n');
    }
    for (subject, predicates) in by_subject {
        out.push_str(&subject);
        let count = predicates.len();
        for (i, (predicate, mut objects)) in predicates.into_iter().enumerate() {
            objects.sort();
            out.push_str(if i == 0 { " " } else { "    " });
            out.push_str(&predicate);
            out.push(' ');
            out.push_str(&objects.join(" , "));
            out.push_str(if i + 1 == count { " .\n" } else { " ;\n" });
        }
    }
    out.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::{Literal, Triple};

    fn ns() -> NamespaceConfig {
        NamespaceConfig::default()
    }

    #[test]
    fn one_triple_document() {
        let ns = ns();
        let g: Graph = [Triple::new(
            ns.resource_base.join("Lost_Highway").unwrap(),
            ns.ontology("director"),
            ns.resource_base.join("David_Lynch").unwrap(),
        )]
        .into_iter()
        .collect();
        let doc = String::from_utf8(serialize_turtle(&g, &ns)).unwrap();
        assert!(doc.contains("@prefix dbr: <http://dbpedia.org/resource/> ."));
        assert!(doc.contains("@prefix dbo: <http://dbpedia.org/ontology/> ."));
        assert!(doc.contains("dbr:Lost_Highway dbo:director dbr:David_Lynch ."), "{doc}");
    }

    #[test]
    fn empty_graph_has_only_prefixes() {
        let doc = String::from_utf8(serialize_turtle(&Graph::new(), &ns())).unwrap();
        assert!(doc.lines().all(|l| l.starts_with("@prefix")), "{doc}");
    }

    #[test]
    fn groups_predicates_of_one_subject() {
        let ns = ns();
        let s = ns.resource_base.join("Lost_Highway").unwrap();
        let g: Graph = [
            Triple::new(s.clone(), ns.ontology("director"), ns.resource_base.join("David_Lynch").unwrap()),
            Triple::new(s.clone(), ns.ontology("runtime"), Literal::typed("134", crate::rdf::xsd("integer"))),
        ]
        .into_iter()
        .collect();
        let doc = String::from_utf8(serialize_turtle(&g, &ns)).unwrap();
        assert_eq!(doc.matches("dbr:Lost_Highway").count(), 1, "{doc}");
        assert!(doc.contains(" ;\n"));
        assert!(doc.contains("\"134\"^^xsd:integer"));
    }

    #[test]
    fn unsafe_local_names_fall_back_to_full_iris() {
        assert!(is_plain_local("Lost_Highway"));
        assert!(is_plain_local("Caf%C3%A9"));
        assert!(!is_plain_local("AC/DC"));
        assert!(!is_plain_local("Lost_Highway_(film)"));
        assert!(!is_plain_local("Inc."));
        assert!(!is_plain_local("%C"));
    }
}
