//! Accept-header negotiation for resource responses.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NegotiatedFormat {
    NTriples,
    Turtle,
    SparqlJson,
    JsonGraph,
    Html,
}

impl NegotiatedFormat {
    pub fn content_type(self) -> &'static str {
        match self {
            NegotiatedFormat::NTriples => "application/n-triples",
            NegotiatedFormat::Turtle => "text/turtle; charset=utf-8",
            NegotiatedFormat::SparqlJson => "application/sparql-results+json",
            NegotiatedFormat::JsonGraph => "application/json",
            NegotiatedFormat::Html => "text/html; charset=utf-8",
        }
    }

    fn media_type(self) -> &'static str {
        self.content_type().split(';').next().unwrap_or_default()
    }
}

/// Formats a resource can be served in, in tie-break order.
pub const RESOURCE_FORMATS: &[NegotiatedFormat] =
    &[NegotiatedFormat::Turtle, NegotiatedFormat::NTriples, NegotiatedFormat::JsonGraph, NegotiatedFormat::Html];

struct Range {
    kind: String,
    subtype: String,
    q: f32,
}

fn parse_accept(header: &str) -> Vec<Range> {
    header
        .split(',')
        .filter_map(|item| {
            let mut parts = item.split(';');
            let media = parts.next()?.trim().to_ascii_lowercase();
            let (kind, subtype) = media.split_once('/')?;
            let mut q = 1.0;
            for p in parts {
                if let Some((k, v)) = p.split_once('=') {
                    if k.trim().eq_ignore_ascii_case("q") {
                        q = v.trim().parse::<f32>().ok().filter(|q| (0.0..=1.0).contains(q))?;
                    }
                }
            }
            Some(Range { kind: kind.trim().into(), subtype: subtype.trim().into(), q })
        })
        .collect()
}

/// Picks the format with the highest quality; the most specific matching
/// range decides a format's quality. An absent, empty or unparseable
/// header accepts anything.
pub fn negotiate(accept: Option<&str>, offered: &[NegotiatedFormat]) -> Option<NegotiatedFormat> {
    let accept = accept.map(str::trim).filter(|a| !a.is_empty()).unwrap_or("*/*");
    let mut ranges = parse_accept(accept);
    if ranges.is_empty() {
        // nothing parseable: treat like a missing header
        ranges = parse_accept("*/*");
    }
    let mut best: Option<(NegotiatedFormat, f32)> = None;
    for &format in offered {
        let (kind, subtype) = format.media_type().split_once('/').unwrap_or_default();
        let quality = ranges
            .iter()
            .filter_map(|r| {
                let specificity = if r.kind == kind && r.subtype == subtype {
                    2
                } else if r.kind == kind && r.subtype == "*" {
                    1
                } else if r.kind == "*" && r.subtype == "*" {
                    0
                } else {
                    return None;
                };
                Some((specificity, r.q))
            })
            .max_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)))
            .map(|(_, q)| q);
        if let Some(q) = quality.filter(|q| *q > 0.0) {
            if best.is_none_or(|(_, bq)| q > bq) {
                best = Some((format, q));
            }
        }
    }
    best.map(|(f, _)| f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use NegotiatedFormat::*;

    fn pick(accept: Option<&str>) -> Option<NegotiatedFormat> {
        negotiate(accept, RESOURCE_FORMATS)
    }

    #[test]
    fn negotiation() {
        assert_eq!(pick(None), Some(Turtle));
        assert_eq!(pick(Some("*/*")), Some(Turtle));
        assert_eq!(pick(Some("application/n-triples")), Some(NTriples));
        assert_eq!(pick(Some("text/turtle")), Some(Turtle));
        assert_eq!(pick(Some("application/json")), Some(JsonGraph));
        assert_eq!(pick(Some("text/html,application/xhtml+xml,application/xml;q=0.9,*/*;q=0.8")), Some(Html));
        assert_eq!(pick(Some("text/*;q=0.5, application/n-triples;q=0.4")), Some(Turtle));
        assert_eq!(pick(Some("application/n-triples;q=0.9, text/turtle;q=0.1")), Some(NTriples));
        assert_eq!(pick(Some("*/*;q=0.1, text/turtle;q=0")), Some(NTriples));
        assert_eq!(pick(Some("image/png")), None);
        assert_eq!(pick(Some("application/n-triples;q=2")), Some(Turtle));
    }
}
