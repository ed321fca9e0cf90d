use std::sync::LazyLock;

use regex::Regex;

use super::{ContentNode, ParsedPage};

static QUOTES: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"'{2,}").unwrap());
static LIST_MARKERS: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?m)^[ \t]*[*#:;]+[ \t]*").unwrap());
static BEHAVIOR_SWITCH: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"__[A-Z]+__").unwrap());
static RULE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?m)^-{4,}").unwrap());
static EMPTY_PARENS: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\(\s*[,;]?\s*\)").unwrap());
static SPACE_BEFORE_PUNCT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r" ([,.;:])").unwrap());
static ENTITY: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"&(#[0-9]{1,7}|#[xX][0-9a-fA-F]{1,6}|[a-zA-Z]{2,8});").unwrap());

fn decode_entity(name: &str) -> Option<String> {
    let c = match name {
        "nbsp" | "ensp" | "emsp" | "thinsp" => ' ',
        "amp" => '&',
        "lt" => '<',
        "gt" => '>',
        "quot" => '"',
        "apos" => '\'',
        "ndash" => '–',
        "mdash" => '—',
        "minus" => '−',
        "times" => '×',
        "hellip" => '…',
        _ => {
            let num = name.strip_prefix('#')?;
            let code = match num.strip_prefix(['x', 'X']) {
                Some(hex) => u32::from_str_radix(hex, 16).ok()?,
                None => num.parse().ok()?,
            };
            char::from_u32(code)?
        }
    };
    Some(c.to_string())
}

/// Unwraps inline markup from raw text: quote runs, list markers, HTML
/// entities; collapses whitespace and tidies gaps left by dropped templates.
pub(crate) fn clean(raw: &str) -> String {
    let text = LIST_MARKERS.replace_all(raw, "");
    let text = RULE.replace_all(&text, " ");
    let text = BEHAVIOR_SWITCH.replace_all(&text, "");
    let text = QUOTES.replace_all(&text, "");
    let text = ENTITY.replace_all(&text, |caps: &regex::Captures| {
        decode_entity(&caps[1]).unwrap_or_else(|| caps[0].to_string())
    });
    let collapsed = text.split_whitespace().collect::<Vec<_>>().join(" ");
    let tidied = EMPTY_PARENS.replace_all(&collapsed, "");
    let tidied = tidied.split_whitespace().collect::<Vec<_>>().join(" ");
    SPACE_BEFORE_PUNCT.replace_all(&tidied, "$1").trim().to_string()
}

/// Readable text of the page body: plain text and link anchors in document
/// order, without templates, headings or file/category links.
pub fn strip_to_plaintext(page: &ParsedPage) -> String {
    let mut raw = String::new();
    for node in &page.body {
        match node {
            ContentNode::PlainText(text) => raw.push_str(text),
            ContentNode::LinkRef(idx) => {
                if let Some(link) = page.links.get(*idx) {
                    if !link.is_namespaced_media() {
                        raw.push_str(&link.anchor);
                    }
                }
            }
            ContentNode::Heading { .. } => raw.push('\n'),
            ContentNode::TemplateRef(_) => {}
        }
    }
    clean(&raw)
}

const CLOSERS: &[char] = &['"', '\'', ')', ']', '»', '”', '’'];

/// Returns the first `n` sentences of `text` (at least one).
///
/// A sentence ends at `.`, `!` or `?` (plus any closing quotes or brackets)
/// followed by whitespace and an uppercase letter, or by the end of the
/// text. A period right after a lone capital letter is an initial, not a
/// boundary.
pub fn first_sentences(text: &str, n: usize) -> String {
    let n = n.max(1);
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut found = 0;
    let mut idx = 0;
    while idx < chars.len() {
        let c = chars[idx].1;
        if !matches!(c, '.' | '!' | '?') || (c == '.' && is_initial(&chars, idx)) {
            idx += 1;
            continue;
        }
        let mut k = idx + 1;
        while k < chars.len() && matches!(chars[k].1, '.' | '!' | '?') {
            k += 1;
        }
        while k < chars.len() && CLOSERS.contains(&chars[k].1) {
            k += 1;
        }
        let boundary = if k == chars.len() {
            true
        } else if chars[k].1.is_whitespace() {
            let m = (k..chars.len()).find(|&m| !chars[m].1.is_whitespace());
            m.is_none_or(|m| chars[m].1.is_uppercase())
        } else {
            false
        };
        if boundary {
            found += 1;
            if found == n {
                let end = chars.get(k).map_or(text.len(), |(b, _)| *b);
                return text[..end].trim().to_string();
            }
        }
        idx = k;
    }
    text.trim().to_string()
}

fn is_initial(chars: &[(usize, char)], dot: usize) -> bool {
    if dot == 0 || !chars[dot - 1].1.is_uppercase() {
        return false;
    }
    dot == 1 || !chars[dot - 2].1.is_alphanumeric()
}
