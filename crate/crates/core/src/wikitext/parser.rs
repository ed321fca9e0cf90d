//! Structural pass over preprocessed wikitext.
//!
//! Opening and closing `{{ }}` / `[[ ]]` delimiters are paired up front with
//! a single stack, so every construct knows its extent before it is parsed
//! and no backtracking is needed. Unpaired delimiters are plain text.

use std::collections::HashMap;

use super::{
    normalize_template_name, ContentNode, Fragment, ParamValue, ParsedPage, TemplateCall, WikiLink, MAX_NESTING,
};
use crate::rdf::normalize_title;

/// Names that look like templates but are magic words or parser functions.
const MAGIC_WORDS: &[&str] = &[
    "DEFAULTSORT",
    "DISPLAYTITLE",
    "PAGENAME",
    "FULLPAGENAME",
    "NAMESPACE",
    "CURRENTYEAR",
    "CURRENTMONTH",
    "CURRENTDAY",
    "SITENAME",
    "LC",
    "UC",
    "LCFIRST",
    "UCFIRST",
    "FORMATNUM",
    "PLURAL",
    "GRAMMAR",
    "INT",
    "NS",
    "FULLURL",
    "LOCALURL",
    "URLENCODE",
    "ANCHORENCODE",
    "PADLEFT",
    "PADRIGHT",
    "TAG",
    "!",
    "=",
];

enum Node {
    Text(String),
    Link { pos: usize, link: WikiLink },
    Template(TemplateCall),
    Heading { level: u8, text: String },
}

#[derive(Clone, Copy)]
enum Open {
    Brace(usize),
    Bracket(usize),
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    /// Opening `{{` position -> position of its closing `}}`.
    braces: HashMap<usize, usize>,
    /// Opening `[[` position -> position of its closing `]]`.
    brackets: HashMap<usize, usize>,
    /// Every link seen, keyed by the position of its opening delimiter.
    links: Vec<(usize, WikiLink)>,
}

pub(super) fn parse_page(title: &str, src: &str) -> ParsedPage {
    let mut parser = Parser::new(src);
    let nodes = parser.parse_range(0, src.len(), 0, true);

    parser.links.sort_by_key(|(pos, _)| *pos);
    let link_index: HashMap<usize, usize> =
        parser.links.iter().enumerate().map(|(idx, (pos, _))| (*pos, idx)).collect();

    let mut page = ParsedPage { title: title.to_string(), ..Default::default() };
    for node in nodes {
        match node {
            Node::Text(text) => page.body.push(ContentNode::PlainText(text)),
            Node::Link { pos, .. } => page.body.push(ContentNode::LinkRef(link_index[&pos])),
            Node::Template(call) => {
                page.body.push(ContentNode::TemplateRef(page.templates.len()));
                page.templates.push(call);
            }
            Node::Heading { level, text } => page.body.push(ContentNode::Heading { level, text }),
        }
    }
    page.links = parser.links.into_iter().map(|(_, link)| link).collect();
    page
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        let mut parser =
            Parser { src, bytes: src.as_bytes(), braces: HashMap::new(), brackets: HashMap::new(), links: Vec::new() };
        parser.pair_delimiters();
        parser
    }

    fn at(&self, i: usize, pat: &str) -> bool {
        self.bytes[i..].starts_with(pat.as_bytes())
    }

    fn pair_delimiters(&mut self) {
        let mut stack: Vec<Open> = Vec::new();
        let mut i = 0;
        while i + 1 < self.bytes.len() {
            if self.at(i, "{{") {
                stack.push(Open::Brace(i));
                i += 2;
            } else if self.at(i, "[[") {
                stack.push(Open::Bracket(i));
                i += 2;
            } else if self.at(i, "}}") {
                if let Some(k) = stack.iter().rposition(|o| matches!(o, Open::Brace(_))) {
                    let Open::Brace(open) = stack[k] else { unreachable!() };
                    stack.truncate(k);
                    self.braces.insert(open, i);
                }
                i += 2;
            } else if self.at(i, "]]") {
                if let Some(k) = stack.iter().rposition(|o| matches!(o, Open::Bracket(_))) {
                    let Open::Bracket(open) = stack[k] else { unreachable!() };
                    stack.truncate(k);
                    self.brackets.insert(open, i);
                }
                i += 2;
            } else {
                i += 1;
            }
        }
    }

    /// End of the paired construct starting at `i`, if one starts there and
    /// closes within `end`.
    fn span_end(&self, i: usize, end: usize) -> Option<usize> {
        let close = if self.at(i, "{{") {
            self.braces.get(&i)
        } else if self.at(i, "[[") {
            self.brackets.get(&i)
        } else {
            None
        }?;
        (close + 2 <= end).then_some(close + 2)
    }

    fn line_start(&self, i: usize) -> bool {
        i == 0 || self.bytes[i - 1] == b'\n'
    }

    fn next_char_len(&self, i: usize) -> usize {
        self.src[i..].chars().next().map_or(1, char::len_utf8)
    }

    fn parse_range(&mut self, start: usize, end: usize, depth: usize, body: bool) -> Vec<Node> {
        let mut nodes = Vec::new();
        let mut text = String::new();
        let mut i = start;
        while i < end {
            if body && self.line_start(i) {
                if let Some(next) = self.table(i, end, depth) {
                    flush(&mut text, &mut nodes);
                    i = next;
                    continue;
                }
                if let Some((next, heading)) = self.heading(i, end, depth) {
                    flush(&mut text, &mut nodes);
                    nodes.push(heading);
                    i = next;
                    continue;
                }
            }
            if self.at(i, "{{") {
                if let Some(after) = self.span_end(i, end) {
                    if depth >= MAX_NESTING {
                        text.push_str(&self.src[i..after]);
                    } else if let Some(call) = self.template(i + 2, after - 2, depth + 1) {
                        flush(&mut text, &mut nodes);
                        nodes.push(Node::Template(call));
                    }
                    i = after;
                    continue;
                }
            }
            if self.at(i, "[[") {
                if let Some(after) = self.span_end(i, end) {
                    if depth >= MAX_NESTING {
                        text.push_str(&self.src[i..after]);
                        i = after;
                        continue;
                    }
                    match self.link(i, after, end, depth + 1) {
                        LinkOutcome::Link(link, next) => {
                            flush(&mut text, &mut nodes);
                            self.links.push((i, link.clone()));
                            nodes.push(Node::Link { pos: i, link });
                            i = next;
                        }
                        LinkOutcome::Text(display) => {
                            text.push_str(&display);
                            i = after;
                        }
                        LinkOutcome::NotALink => {
                            text.push_str("[[");
                            i += 2;
                        }
                    }
                    continue;
                }
            }
            if self.bytes[i] == b'[' && !self.at(i, "[[") {
                if let Some((label, next)) = self.external_link(i, end) {
                    text.push_str(&label);
                    i = next;
                    continue;
                }
            }
            let len = self.next_char_len(i);
            text.push_str(&self.src[i..i + len]);
            i += len;
        }
        flush(&mut text, &mut nodes);
        nodes
    }

    /// Tables are skipped entirely; links inside them are still recorded.
    fn table(&mut self, i: usize, end: usize, depth: usize) -> Option<usize> {
        let indent = self.bytes[i..end].iter().take_while(|b| matches!(b, b' ' | b':')).count();
        if !self.at(i + indent, "{|") {
            return None;
        }
        let mut nesting = 0usize;
        let mut j = i;
        while j < end {
            if self.line_start(j) {
                let k = j + self.bytes[j..end].iter().take_while(|b| matches!(b, b' ' | b'\t' | b':')).count();
                if self.at(k, "{|") {
                    nesting += 1;
                } else if self.at(k, "|}") {
                    nesting -= 1;
                    if nesting == 0 {
                        let close = k + 2;
                        if depth < MAX_NESTING {
                            self.parse_range(i + indent + 2, k, depth + 1, false);
                        }
                        return Some(close);
                    }
                }
            }
            j = self.span_end(j, end).unwrap_or(j + 1);
        }
        // unclosed tables run to the end of the range
        if depth < MAX_NESTING {
            self.parse_range(i + indent + 2, end, depth + 1, false);
        }
        Some(end)
    }

    fn heading(&mut self, i: usize, end: usize, depth: usize) -> Option<(usize, Node)> {
        if self.bytes[i] != b'=' {
            return None;
        }
        let eol = self.src[i..end].find('\n').map_or(end, |e| i + e);
        let line = &self.src[i..eol];
        let trimmed = line.trim_end();
        let lead = trimmed.bytes().take_while(|&b| b == b'=').count();
        let trail = trimmed.bytes().rev().take_while(|&b| b == b'=').count();
        let level = lead.min(trail).min(6);
        if level == 0 || trimmed.len() <= 2 * level {
            return None;
        }
        let inner_start = i + level;
        let inner_end = i + trimmed.len() - level;
        let nodes = self.parse_range(inner_start, inner_end, depth + 1, false);
        let text = nodes_text(&nodes).trim().to_string();
        Some((eol, Node::Heading { level: level as u8, text }))
    }

    /// Splits `[start, end)` on `|` outside nested constructs.
    fn split_pipes(&self, start: usize, end: usize) -> Vec<(usize, usize)> {
        let mut parts = Vec::new();
        let mut part_start = start;
        let mut j = start;
        while j < end {
            if let Some(after) = self.span_end(j, end) {
                j = after;
            } else if self.bytes[j] == b'|' {
                parts.push((part_start, j));
                part_start = j + 1;
                j += 1;
            } else {
                j += 1;
            }
        }
        parts.push((part_start, end));
        parts
    }

    fn top_level_eq(&self, start: usize, end: usize) -> Option<usize> {
        let mut j = start;
        while j < end {
            if let Some(after) = self.span_end(j, end) {
                j = after;
            } else if self.bytes[j] == b'=' {
                return Some(j);
            } else {
                j += 1;
            }
        }
        None
    }

    /// Parses the inside of `{{ ... }}`. Returns `None` for parser
    /// functions, magic words and malformed names; links inside them are
    /// still recorded.
    fn template(&mut self, start: usize, end: usize, depth: usize) -> Option<TemplateCall> {
        let parts = self.split_pipes(start, end);
        let (name_start, name_end) = parts[0];
        let raw_name = &self.src[name_start..name_end];
        let name = normalize_template_name(raw_name);
        let name = strip_subst(&name);

        if !is_template_name(&name) {
            for &(s, e) in &parts {
                self.parse_range(s, e, depth, false);
            }
            return None;
        }

        let mut params: Vec<(String, ParamValue)> = Vec::new();
        let mut positional = 0usize;
        for &(s, e) in &parts[1..] {
            let (key, value_start, named) = match self.top_level_eq(s, e) {
                Some(eq) => (self.src[s..eq].trim().to_string(), eq + 1, true),
                None => {
                    positional += 1;
                    (positional.to_string(), s, false)
                }
            };
            let nodes = self.parse_range(value_start, e, depth, false);
            let mut value = ParamValue::default();
            for node in nodes {
                match node {
                    Node::Text(t) => value.push(Fragment::Text(t)),
                    Node::Link { link, .. } => value.push(Fragment::Link(link)),
                    Node::Template(call) => value.push(Fragment::Nested(call)),
                    Node::Heading { text, .. } => value.push(Fragment::Text(text)),
                }
            }
            if named {
                trim_value(&mut value);
            }
            params.retain(|(k, _)| *k != key);
            params.push((key, value));
        }
        Some(TemplateCall { name, params, depth })
    }

    fn link(&mut self, open: usize, after: usize, end: usize, depth: usize) -> LinkOutcome {
        let inner_start = open + 2;
        let inner_end = after - 2;
        let parts = self.split_pipes(inner_start, inner_end);
        let (target_start, target_end) = parts[0];
        let raw_target = &self.src[target_start..target_end];
        if raw_target.contains(['\n', '{', '}', '[', ']', '<', '>']) {
            return LinkOutcome::NotALink;
        }
        let written = raw_target.trim();
        let without_colon = written.trim_start_matches(':');
        let (page, fragment) = match without_colon.split_once('#') {
            Some((p, f)) => (p, Some(f.trim().to_string())),
            None => (without_colon, None),
        };
        let target = normalize_title(page);

        let anchor = if parts.len() > 1 {
            let anchor_start = parts[1].0;
            let nodes = self.parse_range(anchor_start, inner_end, depth, false);
            let anchor = nodes_text(&nodes);
            if anchor.trim().is_empty() && parts.len() == 2 {
                pipe_trick(without_colon)
            } else {
                anchor
            }
        } else {
            written.to_string()
        };

        // link trail: [[cat]]s renders as "cats"
        let trail = self.bytes[after..end].iter().take_while(|b| b.is_ascii_lowercase()).count();
        let anchor = format!("{anchor}{}", &self.src[after..after + trail]);

        if target.is_empty() {
            return LinkOutcome::Text(anchor);
        }
        LinkOutcome::Link(WikiLink { target, anchor, fragment }, after + trail)
    }

    fn external_link(&self, i: usize, end: usize) -> Option<(String, usize)> {
        let rest = &self.src[i + 1..end];
        let is_url = ["http://", "https://", "ftp://", "//"].iter().any(|s| rest.starts_with(s));
        if !is_url {
            return None;
        }
        let close = rest.find(']')?;
        let inner = &rest[..close];
        if inner.contains('\n') {
            return None;
        }
        let label = inner.split_once(char::is_whitespace).map_or("", |(_, l)| l);
        Some((label.to_string(), i + 1 + close + 1))
    }
}

enum LinkOutcome {
    Link(WikiLink, usize),
    /// Section-only links like `[[#History|see below]]` render as text.
    Text(String),
    NotALink,
}

fn flush(text: &mut String, nodes: &mut Vec<Node>) {
    if !text.is_empty() {
        nodes.push(Node::Text(std::mem::take(text)));
    }
}

fn nodes_text(nodes: &[Node]) -> String {
    let mut out = String::new();
    for node in nodes {
        match node {
            Node::Text(t) => out.push_str(t),
            Node::Link { link, .. } if !link.is_namespaced_media() => out.push_str(&link.anchor),
            Node::Heading { text, .. } => out.push_str(text),
            Node::Link { .. } | Node::Template(_) => {}
        }
    }
    out
}

fn trim_value(value: &mut ParamValue) {
    if let Some(Fragment::Text(t)) = value.fragments.first_mut() {
        *t = t.trim_start().to_string();
    }
    if let Some(Fragment::Text(t)) = value.fragments.last_mut() {
        *t = t.trim_end().to_string();
    }
    value.fragments.retain(|f| !matches!(f, Fragment::Text(t) if t.is_empty()));
}

fn strip_subst(name: &str) -> String {
    for prefix in ["subst:", "safesubst:", "Subst:", "Safesubst:"] {
        if let Some(rest) = name.strip_prefix(prefix) {
            return normalize_template_name(rest);
        }
    }
    name.to_string()
}

fn is_template_name(name: &str) -> bool {
    if name.is_empty() || name.starts_with('#') || name.contains(['{', '}', '[', ']', '<', '>', '\n']) {
        return false;
    }
    let head = name.split(':').next().unwrap_or(name).trim();
    !MAGIC_WORDS.iter().any(|m| head.eq_ignore_ascii_case(m))
}

/// `[[Target (qualifier)|]]` displays as "Target"; `[[Paris, Texas|]]` as "Paris".
fn pipe_trick(target: &str) -> String {
    let without_ns = match target.split_once(':') {
        Some((_, rest)) => rest,
        None => target,
    };
    let trimmed = without_ns.trim();
    if trimmed.ends_with(')') {
        if let Some(open) = trimmed.rfind('(') {
            return trimmed[..open].trim().to_string();
        }
    }
    match trimmed.split_once(',') {
        Some((head, _)) => head.trim().to_string(),
        None => trimmed.to_string(),
    }
}
