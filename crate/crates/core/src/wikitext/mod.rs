//! A deliberately small wikitext reader.
//!
//! Only the structure needed for infobox extraction and abstracts is
//! recovered: template calls (with nesting), internal links, headings,
//! redirects and plain text. Everything else degrades to text or is
//! dropped. Parsing never fails.

mod parser;
mod plaintext;
mod preprocess;

pub use plaintext::{first_sentences, strip_to_plaintext};

/// Maximum nesting of templates and links; deeper content is kept as raw text.
pub const MAX_NESTING: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParsedPage {
    pub title: String,
    /// Top-level template calls in document order.
    pub templates: Vec<TemplateCall>,
    /// Every internal link on the page, including those inside templates.
    pub links: Vec<WikiLink>,
    pub body: Vec<ContentNode>,
    pub redirect_target: Option<String>,
}

impl ParsedPage {
    pub fn is_redirect(&self) -> bool {
        self.redirect_target.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateCall {
    /// Normalized name: trimmed, spaces collapsed, first letter uppercased.
    pub name: String,
    /// Parameters in order; positional ones are keyed "1", "2", ...
    pub params: Vec<(String, ParamValue)>,
    /// Nesting level, 1 for a template written directly in the page body.
    pub depth: usize,
}

impl TemplateCall {
    pub fn param(&self, key: &str) -> Option<&ParamValue> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParamValue {
    pub fragments: Vec<Fragment>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Fragment {
    Text(String),
    Link(WikiLink),
    Nested(TemplateCall),
}

impl ParamValue {
    pub fn is_blank(&self) -> bool {
        self.fragments.iter().all(|f| matches!(f, Fragment::Text(t) if t.trim().is_empty()))
    }

    /// Links in this value, including those inside nested templates.
    pub fn links(&self) -> Vec<&WikiLink> {
        let mut out = Vec::new();
        collect_links(self, &mut out);
        out
    }

    /// Raw text with links reduced to their anchors and nested templates dropped.
    pub fn raw_text(&self) -> String {
        let mut out = String::new();
        for fragment in &self.fragments {
            match fragment {
                Fragment::Text(t) => out.push_str(t),
                Fragment::Link(link) if !link.is_namespaced_media() => out.push_str(&link.anchor),
                Fragment::Link(_) | Fragment::Nested(_) => {}
            }
        }
        out
    }

    /// Display text with quote markup, entities and extra whitespace cleaned.
    pub fn plain_text(&self) -> String {
        plaintext::clean(&self.raw_text())
    }

    pub(crate) fn push(&mut self, fragment: Fragment) {
        if let Fragment::Text(t) = &fragment {
            if t.is_empty() {
                return;
            }
            if let Some(Fragment::Text(prev)) = self.fragments.last_mut() {
                prev.push_str(t);
                return;
            }
        }
        self.fragments.push(fragment);
    }
}

fn collect_links<'a>(value: &'a ParamValue, out: &mut Vec<&'a WikiLink>) {
    for fragment in &value.fragments {
        match fragment {
            Fragment::Link(link) => out.push(link),
            Fragment::Nested(t) => t.params.iter().for_each(|(_, v)| collect_links(v, out)),
            Fragment::Text(_) => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WikiLink {
    /// Normalized target title without the `#fragment`.
    pub target: String,
    pub anchor: String,
    pub fragment: Option<String>,
}

impl WikiLink {
    /// File, image and category links carry no article text.
    pub fn is_namespaced_media(&self) -> bool {
        let Some((prefix, _)) = self.target.split_once(':') else {
            return false;
        };
        matches!(prefix.trim().to_ascii_lowercase().as_str(), "file" | "image" | "category" | "media")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ContentNode {
    PlainText(String),
    /// Index into [`ParsedPage::links`].
    LinkRef(usize),
    /// Index into [`ParsedPage::templates`].
    TemplateRef(usize),
    Heading { level: u8, text: String },
}

/// Parses raw wikitext. Total: malformed markup degrades to text.
pub fn parse_wikitext(title: &str, source: &str) -> ParsedPage {
    let cleaned = preprocess::clean(source);
    if let Some(target) = preprocess::redirect_target(&cleaned) {
        let link = WikiLink { target: target.clone(), anchor: target.clone(), fragment: None };
        return ParsedPage {
            title: title.to_string(),
            links: vec![link],
            redirect_target: Some(target),
            ..Default::default()
        };
    }
    parser::parse_page(title, &cleaned)
}

/// Like [`parse_wikitext`] but accepts arbitrary bytes, decoding them lossily.
pub fn parse_wikitext_bytes(title: &str, source: &[u8]) -> ParsedPage {
    parse_wikitext(title, &String::from_utf8_lossy(source))
}

/// Template-name normalization shared with mapping files.
pub fn normalize_template_name(name: &str) -> String {
    let spaced = name.replace('_', " ");
    let collapsed = spaced.split_whitespace().collect::<Vec<_>>().join(" ");
    let stripped = match collapsed.split_once(':') {
        Some((ns, rest)) if ns.trim().eq_ignore_ascii_case("template") => rest.trim().to_string(),
        _ => collapsed,
    };
    let mut chars = stripped.chars();
    match chars.next() {
        Some(first) => {
            let mut upper = first.to_uppercase();
            let first = match (upper.next(), upper.next()) {
                (Some(u), None) => u,
                _ => first,
            };
            std::iter::once(first).chain(chars).collect()
        }
        None => String::new(),
    }
}

#[cfg(test)]
mod tests;
