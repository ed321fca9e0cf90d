//! Response bodies for resource graphs.

use serde_json::{json, Value};

use crate::extraction::{ResourceGraph, STEP_NAMES};
use crate::query::term_json;
use crate::rdf::{serialize_ntriples, serialize_turtle, NamespaceConfig, Term};

/// `{subject, outgoing: [[p, term]], ingoing: [[s, p]], abstract, provenance,
/// redirected_from}`.
pub fn json_graph(g: &ResourceGraph) -> Value {
    let outgoing: Vec<Value> = g.outgoing.iter().map(|t| json!([t.predicate.as_str(), term_json(&t.object)])).collect();
    let ingoing: Vec<Value> = g.ingoing.iter().map(|t| json!([t.subject.as_str(), t.predicate.as_str()])).collect();
    let abstract_text = g
        .abstract_text
        .as_ref()
        .map_or(Value::Null, |a| json!({"text": a.lexical(), "lang": a.language()}));
    let p = &g.provenance;
    let elapsed: serde_json::Map<String, Value> =
        STEP_NAMES.iter().zip(p.elapsed_ms).map(|(name, ms)| (name.to_string(), json!(ms))).collect();
    json!({
        "subject": g.subject.as_str(),
        "outgoing": outgoing,
        "ingoing": ingoing,
        "abstract": abstract_text,
        "redirected_from": g.redirected_from.iter().map(|i| i.as_str()).collect::<Vec<_>>(),
        "provenance": {
            "revision_id": p.revision_id,
            "backlink_count": p.backlink_count,
            "backlinks_truncated": p.backlinks_truncated,
            "pages_processed": p.pages_processed,
            "coercion_warnings": p.coercion_warnings.iter()
                .map(|w| json!({"page": w.page, "param": w.param, "reason": w.reason}))
                .collect::<Vec<_>>(),
            "skipped_backlinks": p.skipped_backlinks.iter()
                .map(|(title, reason)| json!({"title": title, "reason": reason}))
                .collect::<Vec<_>>(),
            "elapsed_ms": elapsed,
        },
    })
}

pub fn ntriples(g: &ResourceGraph, ns: &NamespaceConfig) -> Vec<u8> {
    serialize_ntriples(&g.to_graph(ns))
}

pub fn turtle(g: &ResourceGraph, ns: &NamespaceConfig) -> Vec<u8> {
    serialize_turtle(&g.to_graph(ns), ns)
}

fn escape_html(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}

fn term_html(term: &Term, ns: &NamespaceConfig) -> String {
    match term {
        Term::Iri(iri) => match iri.strip_prefix(&ns.resource_base) {
            Some(local) => format!("<a href=\"/resource/{}\">{}</a>", escape_html(local), escape_html(iri.as_str())),
            None => escape_html(iri.as_str()),
        },
        Term::Literal(lit) => {
            let suffix = lit.language().map(|l| format!("@{l}")).unwrap_or_default();
            format!("\"{}\"{}", escape_html(lit.lexical()), escape_html(&suffix))
        }
    }
}

/// Minimal triple table for browsers when no UI is installed.
pub fn html_table(g: &ResourceGraph, ns: &NamespaceConfig) -> String {
    let mut rows = String::new();
    for t in g.to_graph(ns).iter() {
        rows.push_str(&format!(
            "<tr><td>{}</td><td>{}</td><td>{}</td></tr>\n",
            term_html(&Term::Iri(t.subject.clone()), ns),
            escape_html(t.predicate.as_str()),
            term_html(&t.object, ns)
        ));
    }
    let subject = escape_html(g.subject.as_str());
    format!(
        "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>{subject}</title></head>\n<body>\n<h1>{subject}</h1>\n\
         <table>\n<tr><th>subject</th><th>predicate</th><th>object</th></tr>\n{rows}</table>\n</body></html>\n"
    )
}
