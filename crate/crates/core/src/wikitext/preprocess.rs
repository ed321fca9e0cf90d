//! Markup removal that happens before structural parsing: comments,
//! references and HTML tags.

use std::sync::LazyLock;

use regex::Regex;

use crate::rdf::normalize_title;

static REF_SELF_CLOSING: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)<ref\b[^<>]*/\s*>").unwrap());
static REF_BLOCK: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?is)<ref\b[^<>]*>.*?</ref\s*>").unwrap());
static LINE_BREAK: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)<br\s*/?\s*>").unwrap());
static HTML_TAG: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"</?[A-Za-z][A-Za-z0-9]*(?:\s[^<>]*)?/?>").unwrap());
static REDIRECT: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)^\s*#REDIRECT\s*:?\s*\[\[([^\[\]|\n]+?)(?:\|[^\[\]\n]*)?\]\]").unwrap()
});

/// Removes `<!-- -->` comments. An unterminated comment runs to the end of
/// the text. Repeats until no comment opener is left, so removal cannot
/// leave a fresh comment behind.
pub(super) fn strip_comments(source: &str) -> String {
    let mut text = source.to_string();
    while let Some(start) = text.find("<!--") {
        let end = text[start + 4..].find("-->").map(|e| start + 4 + e + 3).unwrap_or(text.len());
        text.replace_range(start..end, "");
    }
    text
}

pub(super) fn clean(source: &str) -> String {
    let text = strip_comments(source);
    let text = REF_SELF_CLOSING.replace_all(&text, "");
    let text = REF_BLOCK.replace_all(&text, "");
    let text = LINE_BREAK.replace_all(&text, " ");
    HTML_TAG.replace_all(&text, "").into_owned()
}

pub(super) fn redirect_target(cleaned: &str) -> Option<String> {
    let caps = REDIRECT.captures(cleaned)?;
    let raw = caps.get(1)?.as_str();
    let raw = raw.split('#').next().unwrap_or(raw);
    let target = normalize_title(raw.trim().trim_start_matches(':'));
    (!target.is_empty()).then_some(target)
}
