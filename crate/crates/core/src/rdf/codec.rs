//! Page title <-> resource IRI mapping.

use percent_encoding::{percent_decode_str, utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};

use super::{Iri, NamespaceConfig, RdfError};

/// Characters left unencoded in resource local names: RFC 3986 unreserved
/// plus the punctuation that shows up verbatim in DBpedia resource names.
const LOCAL_NAME: &AsciiSet = &NON_ALPHANUMERIC
    .remove(b'-')
    .remove(b'.')
    .remove(b'_')
    .remove(b'~')
    .remove(b'/')
    .remove(b':')
    .remove(b'(')
    .remove(b')')
    .remove(b',')
    .remove(b'!')
    .remove(b'*')
    .remove(b'\'');

/// MediaWiki-style title normalization: percent-escapes decoded, underscores
/// read as spaces, whitespace trimmed and collapsed, first character
/// uppercased.
pub fn normalize_title(title: &str) -> String {
    // decode to a fixpoint so that encoded and decoded spellings converge
    let mut decoded = title.to_string();
    loop {
        match percent_decode_str(&decoded).decode_utf8() {
            Ok(s) if s != decoded => decoded = s.into_owned(),
            _ => break,
        }
    }
    let spaced = decoded.replace('_', " ");
    let mut out = String::with_capacity(spaced.len());
    for word in spaced.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    uppercase_first(&out)
}

fn uppercase_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        None => String::new(),
        Some(first) => {
            let mut upper = first.to_uppercase();
            // simple case mapping only: keep characters whose uppercase form is multi-char
            let mapped = match (upper.next(), upper.next()) {
                (Some(u), None) => u,
                _ => first,
            };
            let mut out = String::with_capacity(s.len());
            out.push(mapped);
            out.push_str(chars.as_str());
            out
        }
    }
}

/// Encodes an already-normalized title as an IRI local name.
pub(crate) fn encode_local_name(normalized: &str) -> String {
    utf8_percent_encode(&normalized.replace(' ', "_"), LOCAL_NAME).to_string()
}

pub fn title_to_iri(title: &str, ns: &NamespaceConfig) -> Result<Iri, RdfError> {
    let normalized = normalize_title(title);
    if normalized.is_empty() {
        return Err(RdfError::EmptyTitle);
    }
    ns.resource_base.join(&encode_local_name(&normalized))
}

pub fn iri_to_title(iri: &Iri, ns: &NamespaceConfig) -> Result<String, RdfError> {
    let local = iri.strip_prefix(&ns.resource_base).ok_or_else(|| RdfError::ForeignIri {
        iri: iri.to_string(),
        base: ns.resource_base.to_string(),
    })?;
    let decoded = percent_decode_str(local).decode_utf8_lossy();
    Ok(decoded.replace('_', " "))
}
