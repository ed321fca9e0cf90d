use std::collections::HashMap;

use super::{PatternTerm, Projection, QueryAst, QueryError, TriplePattern};
use crate::rdf::{xsd, Iri, Literal, NamespaceConfig, RDF};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Var(String),
    IriRef(String),
    PName(String, String),
    Str(String),
    LangTag(String),
    Number(String),
    Punct(&'static str),
}

const PUNCT: &[&str] = &["^^", "&&", "||", "!=", "<=", ">=", "{", "}", ".", ";", ",", "*", "(", ")", "[", "]", "/", "|", "^", "!", "+", "?", "=", "<", ">", "-"];

const UNSUPPORTED_KEYWORDS: &[&str] = &[
    "OPTIONAL", "FILTER", "UNION", "MINUS", "BIND", "VALUES", "GRAPH", "SERVICE", "ORDER", "GROUP", "HAVING",
    "LIMIT", "OFFSET", "CONSTRUCT", "ASK", "DESCRIBE", "BASE", "FROM", "EXISTS", "NOT",
];

fn parse_error(position: usize, expected: impl Into<String>) -> QueryError {
    QueryError::Parse { position, expected: expected.into() }
}

fn unsupported(feature: impl Into<String>) -> QueryError {
    QueryError::UnsupportedSyntax(feature.into())
}

fn is_name_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-'
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, QueryError> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let at = |i: usize| chars.get(i).map(|&(_, c)| c);
    let pos = |i: usize| chars.get(i).map_or(src.len(), |&(p, _)| p);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i].1;
        let start = pos(i);
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            while at(i).is_some_and(|c| c != '\n') {
                i += 1;
            }
            continue;
        }
        if (c == '?' || c == '$') && at(i + 1).is_some_and(|n| is_name_start(n) || n.is_ascii_digit()) {
            let mut j = i + 1;
            while at(j).is_some_and(|c| c.is_alphanumeric() || c == '_') {
                j += 1;
            }
            out.push((start, Tok::Var(src[pos(i + 1)..pos(j)].to_string())));
            i = j;
            continue;
        }
        if c == '<' {
            // an IRI reference unless it contains characters IRIs cannot
            let mut j = i + 1;
            while at(j).is_some_and(|c| c != '>' && !c.is_whitespace() && !"<\"{}|^`".contains(c)) {
                j += 1;
            }
            if at(j) == Some('>') {
                out.push((start, Tok::IriRef(src[pos(i + 1)..pos(j)].to_string())));
                i = j + 1;
                continue;
            }
        }
        if c == '"' || c == '\'' {
            let long = at(i + 1) == Some(c) && at(i + 2) == Some(c);
            let mut j = if long { i + 3 } else { i + 1 };
            let mut value = String::new();
            loop {
                let Some(d) = at(j) else { return Err(parse_error(start, "closing quote")) };
                if long && d == c && at(j + 1) == Some(c) && at(j + 2) == Some(c) {
                    j += 3;
                    break;
                }
                if !long && d == c {
                    j += 1;
                    break;
                }
                if !long && (d == '\n' || d == '\r') {
                    return Err(parse_error(pos(j), "closing quote"));
                }
                if d == '\\' {
                    let e = at(j + 1).ok_or_else(|| parse_error(pos(j), "escape sequence"))?;
                    let simple = match e {
                        't' => Some('\t'),
                        'n' => Some('\n'),
                        'r' => Some('\r'),
                        'b' => Some('\u{8}'),
                        'f' => Some('\u{c}'),
                        '"' => Some('"'),
                        '\'' => Some('\''),
                        '\\' => Some('\\'),
                        _ => None,
                    };
                    if let Some(s) = simple {
                        value.push(s);
                        j += 2;
                        continue;
                    }
                    let len = match e {
                        'u' => 4,
                        'U' => 8,
                        _ => return Err(parse_error(pos(j), "valid escape sequence")),
                    };
                    let hex: String = (0..len).filter_map(|k| at(j + 2 + k)).collect();
                    let ch = (hex.len() == len)
                        .then(|| u32::from_str_radix(&hex, 16).ok())
                        .flatten()
                        .and_then(char::from_u32)
                        .ok_or_else(|| parse_error(pos(j), "valid unicode escape"))?;
                    value.push(ch);
                    j += 2 + len;
                    continue;
                }
                value.push(d);
                j += 1;
            }
            out.push((start, Tok::Str(value)));
            i = j;
            continue;
        }
        if c == '@' {
            let mut j = i + 1;
            while at(j).is_some_and(|c| c.is_ascii_alphanumeric() || c == '-') {
                j += 1;
            }
            if j == i + 1 {
                return Err(parse_error(start, "language tag"));
            }
            out.push((start, Tok::LangTag(src[pos(i + 1)..pos(j)].to_string())));
            i = j;
            continue;
        }
        let signed_digit = (c == '+' || c == '-') && at(i + 1).is_some_and(|n| n.is_ascii_digit());
        if c.is_ascii_digit() || signed_digit || (c == '.' && at(i + 1).is_some_and(|n| n.is_ascii_digit())) {
            let mut j = i + 1;
            while at(j).is_some_and(|c| c.is_ascii_digit()) {
                j += 1;
            }
            if at(j) == Some('.') && at(j + 1).is_some_and(|n| n.is_ascii_digit()) {
                j += 1;
                while at(j).is_some_and(|c| c.is_ascii_digit()) {
                    j += 1;
                }
            }
            if at(j).is_some_and(|e| e == 'e' || e == 'E') {
                let mut k = j + 1;
                if at(k).is_some_and(|s| s == '+' || s == '-') {
                    k += 1;
                }
                if at(k).is_some_and(|d| d.is_ascii_digit()) {
                    while at(k).is_some_and(|c| c.is_ascii_digit()) {
                        k += 1;
                    }
                    j = k;
                }
            }
            out.push((start, Tok::Number(src[start..pos(j)].to_string())));
            i = j;
            continue;
        }
        if is_name_start(c) || c == ':' {
            let mut j = i;
            while at(j).is_some_and(|c| is_name_char(c) || c == '.') {
                j += 1;
            }
            while j > i && at(j - 1) == Some('.') {
                j -= 1;
            }
            if at(j) == Some(':') {
                let prefix = src[start..pos(j)].to_string();
                let mut k = j + 1;
                while at(k).is_some_and(|c| is_name_char(c) || c == '.' || c == ':' || c == '%') {
                    k += 1;
                }
                while k > j + 1 && at(k - 1) == Some('.') {
                    k -= 1;
                }
                out.push((start, Tok::PName(prefix, src[pos(j + 1)..pos(k)].to_string())));
                i = k;
                continue;
            }
            if j > i {
                out.push((start, Tok::Word(src[start..pos(j)].to_string())));
                i = j;
                continue;
            }
        }
        if let Some(p) = PUNCT.iter().find(|p| src[start..].starts_with(**p)) {
            out.push((start, Tok::Punct(p)));
            i += p.chars().count();
            continue;
        }
        return Err(parse_error(start, "a SPARQL token"));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    idx: usize,
    end: usize,
    prefixes: HashMap<String, Iri>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(_, t)| t)
    }

    fn position(&self) -> usize {
        self.toks.get(self.idx).map_or(self.end, |(p, _)| *p)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(_, t)| t.clone());
        self.idx += 1;
        t
    }

    fn keyword(&self) -> Option<String> {
        match self.peek() {
            Some(Tok::Word(w)) => Some(w.to_ascii_uppercase()),
            _ => None,
        }
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Some(Tok::Punct(q)) if *q == p)
    }

    fn expect_punct(&mut self, p: &str, expected: &str) -> Result<(), QueryError> {
        if self.is_punct(p) {
            self.idx += 1;
            Ok(())
        } else {
            Err(parse_error(self.position(), expected))
        }
    }

    /// Reports a recognized-but-unsupported keyword at the cursor.
    fn reject_unsupported_keyword(&self) -> Result<(), QueryError> {
        match self.keyword() {
            Some(k) if UNSUPPORTED_KEYWORDS.contains(&k.as_str()) => Err(unsupported(k)),
            _ => Ok(()),
        }
    }

    fn resolve(&self, prefix: &str, local: &str, at: usize) -> Result<Iri, QueryError> {
        let base = self.prefixes.get(prefix).ok_or_else(|| parse_error(at, format!("declared prefix for {prefix:?}")))?;
        base.join(local).map_err(|_| parse_error(at, "valid IRI"))
    }

    fn query(mut self) -> Result<QueryAst, QueryError> {
        loop {
            match self.keyword().as_deref() {
                Some("PREFIX") => {
                    self.idx += 1;
                    let at = self.position();
                    let (Some(Tok::PName(name, local)), Some(Tok::IriRef(iri))) = (self.next(), self.next()) else {
                        return Err(parse_error(at, "PREFIX name: <iri>"));
                    };
                    if !local.is_empty() {
                        return Err(parse_error(at, "prefix name ending in ':'"));
                    }
                    let iri = Iri::new(iri).map_err(|_| parse_error(at, "valid IRI"))?;
                    self.prefixes.insert(name, iri);
                }
                Some("SELECT") => {
                    self.idx += 1;
                    break;
                }
                Some(_) => {
                    self.reject_unsupported_keyword()?;
                    return Err(parse_error(self.position(), "PREFIX or SELECT"));
                }
                None => return Err(parse_error(self.position(), "PREFIX or SELECT")),
            }
        }
        if matches!(self.keyword().as_deref(), Some("DISTINCT" | "REDUCED")) {
            self.idx += 1;
        }
        let select = if self.is_punct("*") {
            self.idx += 1;
            Projection::Star
        } else {
            let mut vars = Vec::new();
            loop {
                match self.peek() {
                    Some(Tok::Var(v)) => {
                        if !vars.contains(v) {
                            vars.push(v.clone());
                        }
                        self.idx += 1;
                    }
                    Some(Tok::Punct("(")) => return Err(unsupported("SELECT expressions")),
                    _ => break,
                }
            }
            if vars.is_empty() {
                return Err(parse_error(self.position(), "variable or '*'"));
            }
            Projection::Vars(vars)
        };
        if self.keyword().as_deref() == Some("FROM") {
            return Err(unsupported("FROM"));
        }
        if self.keyword().as_deref() == Some("WHERE") {
            self.idx += 1;
        }
        self.expect_punct("{", "'{'")?;
        let patterns = self.group()?;
        self.expect_punct("}", "'}'")?;
        if self.peek().is_some() {
            self.reject_unsupported_keyword()?;
            return Err(parse_error(self.position(), "end of query"));
        }
        Ok(QueryAst { select, patterns })
    }

    fn group(&mut self) -> Result<Vec<TriplePattern>, QueryError> {
        let mut patterns = Vec::new();
        loop {
            self.reject_unsupported_keyword()?;
            match self.peek() {
                Some(Tok::Punct("}")) | None => break,
                Some(Tok::Punct("{")) => return Err(unsupported("nested group patterns")),
                _ => {}
            }
            self.triples(&mut patterns)?;
            if self.is_punct(".") {
                self.idx += 1;
            } else {
                break;
            }
        }
        if patterns.is_empty() {
            return Err(parse_error(self.position(), "triple pattern"));
        }
        Ok(patterns)
    }

    fn triples(&mut self, out: &mut Vec<TriplePattern>) -> Result<(), QueryError> {
        let subject = self.term()?;
        if let PatternTerm::Literal(_) = subject {
            return Err(parse_error(self.toks[self.idx - 1].0, "subject (variable or IRI)"));
        }
        loop {
            let predicate = self.predicate()?;
            loop {
                let object = self.term()?;
                out.push(TriplePattern { subject: subject.clone(), predicate: predicate.clone(), object });
                if self.is_punct(",") {
                    self.idx += 1;
                } else {
                    break;
                }
            }
            if self.is_punct(";") {
                self.idx += 1;
                while self.is_punct(";") {
                    self.idx += 1;
                }
                if self.is_punct(".") || self.is_punct("}") {
                    break;
                }
            } else {
                break;
            }
        }
        Ok(())
    }

    fn predicate(&mut self) -> Result<PatternTerm, QueryError> {
        if let Some(Tok::Punct("^" | "!" | "(")) = self.peek() {
            return Err(unsupported("property paths"));
        }
        let predicate = if matches!(self.peek(), Some(Tok::Word(w)) if w == "a") {
            self.idx += 1;
            PatternTerm::Iri(Iri::new(format!("{RDF}type")).expect("static IRI"))
        } else {
            let at = self.position();
            let term = self.term()?;
            if let PatternTerm::Literal(_) = term {
                return Err(parse_error(at, "predicate (variable or IRI)"));
            }
            term
        };
        if let Some(Tok::Punct("/" | "|" | "*" | "+" | "?" | "^")) = self.peek() {
            return Err(unsupported("property paths"));
        }
        Ok(predicate)
    }

    fn term(&mut self) -> Result<PatternTerm, QueryError> {
        let at = self.position();
        self.reject_unsupported_keyword()?;
        let tok = self.next().ok_or_else(|| parse_error(at, "term"))?;
        Ok(match tok {
            Tok::Var(v) => PatternTerm::Var(v),
            Tok::IriRef(iri) => PatternTerm::Iri(Iri::new(iri).map_err(|_| parse_error(at, "valid IRI"))?),
            Tok::PName(prefix, local) if prefix == "_" => return Err(unsupported(format!("blank node _:{local}"))),
            Tok::PName(prefix, local) => PatternTerm::Iri(self.resolve(&prefix, &local, at)?),
            Tok::Punct("[") => return Err(unsupported("blank nodes")),
            Tok::Str(value) => match self.peek() {
                Some(Tok::LangTag(tag)) => {
                    let tag = tag.clone();
                    self.idx += 1;
                    PatternTerm::Literal(Literal::lang(value, tag).map_err(|_| parse_error(at, "valid language tag"))?)
                }
                Some(Tok::Punct("^^")) => {
                    self.idx += 1;
                    let dt_at = self.position();
                    let datatype = match self.next() {
                        Some(Tok::IriRef(iri)) => Iri::new(iri).map_err(|_| parse_error(dt_at, "valid IRI"))?,
                        Some(Tok::PName(p, l)) => self.resolve(&p, &l, dt_at)?,
                        _ => return Err(parse_error(dt_at, "datatype IRI")),
                    };
                    PatternTerm::Literal(Literal::typed(value, datatype))
                }
                _ => PatternTerm::Literal(Literal::simple(value)),
            },
            Tok::Number(n) => {
                let dt = if n.contains(['e', 'E']) {
                    "double"
                } else if n.contains('.') {
                    "decimal"
                } else {
                    "integer"
                };
                PatternTerm::Literal(Literal::typed(n, xsd(dt)))
            }
            Tok::Word(w) if w == "true" || w == "false" => PatternTerm::Literal(Literal::typed(w, xsd("boolean"))),
            _ => return Err(parse_error(at, "variable, IRI or literal")),
        })
    }
}

/// Parses the supported SELECT fragment. The namespace prefixes of `ns` are
/// predeclared; PREFIX lines may override them.
pub fn parse_query(text: &str, ns: &NamespaceConfig) -> Result<QueryAst, QueryError> {
    let toks = tokenize(text)?;
    let parser = Parser { toks, idx: 0, end: text.len(), prefixes: ns.prefixes().into_iter().collect() };
    parser.query()
}
