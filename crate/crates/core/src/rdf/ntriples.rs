//! W3C N-Triples reader and writer.

use std::fmt::Write as _;

use super::{is_language_tag, Graph, Iri, Literal, RdfError, Term, Triple};

pub(crate) fn escape_literal(out: &mut String, lexical: &str) {
    for c in lexical.chars() {
        match c {
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c if c.is_control() => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
}

fn write_iri(out: &mut String, iri: &Iri) {
    out.push('<');
    out.push_str(iri.as_str());
    out.push('>');
}

fn write_literal(out: &mut String, lit: &Literal) {
    out.push('"');
    escape_literal(out, lit.lexical());
    out.push('"');
    if let Some(lang) = lit.language() {
        out.push('@');
        out.push_str(lang);
    } else if let Some(dt) = lit.datatype() {
        out.push_str("^^");
        write_iri(out, dt);
    }
}

/// Renders a single term in N-Triples syntax.
pub fn term_to_ntriples(term: &Term) -> String {
    let mut out = String::new();
    match term {
        Term::Iri(iri) => write_iri(&mut out, iri),
        Term::Literal(lit) => write_literal(&mut out, lit),
    }
    out
}

fn triple_line(t: &Triple) -> String {
    let mut line = String::new();
    write_iri(&mut line, &t.subject);
    line.push(' ');
    write_iri(&mut line, &t.predicate);
    line.push(' ');
    match &t.object {
        Term::Iri(iri) => write_iri(&mut line, iri),
        Term::Literal(lit) => write_literal(&mut line, lit),
    }
    line.push_str(" .\n");
    line
}

/// Serializes `graph` with one triple per line, lines sorted bytewise.
pub fn serialize_ntriples(graph: &Graph) -> Vec<u8> {
    let mut lines: Vec<String> = graph.iter().map(triple_line).collect();
    lines.sort_unstable();
    lines.concat().into_bytes()
}

pub fn parse_ntriples(input: &[u8]) -> Result<Graph, RdfError> {
    let text = std::str::from_utf8(input).map_err(|e| {
        let line = input[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1;
        RdfError::Syntax { line, reason: "invalid UTF-8".into() }
    })?;
    let mut graph = Graph::new();
    for (idx, raw) in text.split('\n').enumerate() {
        let line = idx + 1;
        let mut cursor = Cursor { src: raw.strip_suffix('\r').unwrap_or(raw), pos: 0, line };
        cursor.skip_ws();
        if cursor.at_end() || cursor.peek() == Some('#') {
            continue;
        }
        let subject = cursor.iri()?;
        cursor.skip_ws();
        let predicate = cursor.iri()?;
        cursor.skip_ws();
        let object = match cursor.peek() {
            Some('<') => Term::Iri(cursor.iri()?),
            Some('"') => Term::Literal(cursor.literal()?),
            Some('_') => return Err(cursor.error("blank nodes are not supported")),
            _ => return Err(cursor.error("expected IRI or literal object")),
        };
        cursor.skip_ws();
        if !cursor.eat('.') {
            return Err(cursor.error("expected '.'"));
        }
        cursor.skip_ws();
        if !(cursor.at_end() || cursor.peek() == Some('#')) {
            return Err(cursor.error("trailing content after '.'"));
        }
        graph.insert(Triple { subject, predicate, object });
    }
    Ok(graph)
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
}

impl Cursor<'_> {
    fn error(&self, reason: &str) -> RdfError {
        RdfError::Syntax { line: self.line, reason: reason.to_string() }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t')) {
            self.pos += 1;
        }
    }

    fn iri(&mut self) -> Result<Iri, RdfError> {
        if !self.eat('<') {
            return Err(self.error("expected '<'"));
        }
        let mut value = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error("unterminated IRI")),
                Some('>') => break,
                Some('\\') => value.push(self.uchar()?),
                Some(c) => value.push(c),
            }
        }
        Iri::new(value).map_err(|e| self.error(&e.to_string()))
    }

    fn uchar(&mut self) -> Result<char, RdfError> {
        let width = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return Err(self.error("invalid escape")),
        };
        let end = self.pos + width;
        let hex = self.src.get(self.pos..end).ok_or_else(|| self.error("truncated \\u escape"))?;
        let code = u32::from_str_radix(hex, 16).map_err(|_| self.error("invalid hex in escape"))?;
        self.pos = end;
        char::from_u32(code).ok_or_else(|| self.error("escape is not a Unicode scalar value"))
    }

    fn literal(&mut self) -> Result<Literal, RdfError> {
        self.eat('"');
        let mut lexical = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error("unterminated literal")),
                Some('"') => break,
                Some('\\') => {
                    let c = match self.peek() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u' | 'U') => {
                            lexical.push(self.uchar()?);
                            continue;
                        }
                        _ => return Err(self.error("invalid escape")),
                    };
                    self.pos += 1;
                    lexical.push(c);
                }
                Some(c) => lexical.push(c),
            }
        }
        if self.eat('@') {
            let start = self.pos;
            while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '-') {
                self.pos += 1;
            }
            let tag = &self.src[start..self.pos];
            if !is_language_tag(tag) {
                return Err(self.error("invalid language tag"));
            }
            Literal::lang(lexical, tag).map_err(|e| self.error(&e.to_string()))
        } else if self.src[self.pos..].starts_with("^^") {
            self.pos += 2;
            Ok(Literal::typed(lexical, self.iri()?))
        } else {
            Ok(Literal::simple(lexical))
        }
    }
}
