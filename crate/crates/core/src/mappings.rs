//! Declarative infobox-to-ontology mappings.
//!
//! A mapping file is line oriented; `#` starts a comment:
//!
//! ```text
//! template "Infobox film" -> class dbo:Film
//!   director     -> dbo:director  object
//!   runtime      -> dbo:runtime   integer
//! template "Infobox person" -> class dbo:Person
//!   occupation   -> dbo:occupation string@en
//! ```
//!
//! `dbr:`, `dbo:`, `rdf:`, `rdfs:` and `xsd:` are predefined, absolute IRIs
//! may be written in angle brackets, and `prefix ex: <http://...>` lines add
//! further prefixes.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::time::SystemTime;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::rdf::{is_language_tag, title_to_iri, xsd, Graph, Iri, Literal, NamespaceConfig, Triple};
use crate::wikitext::{normalize_template_name, ParsedPage};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MappingError {
    #[error("mapping file line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("template {0:?} is mapped more than once")]
    DuplicateTemplate(String),
    #[error("unknown range keyword {0:?}")]
    UnknownRange(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RangeKind {
    ObjectResource,
    PlainString { language: String },
    Integer,
    Double,
    Date,
}

impl fmt::Display for RangeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RangeKind::ObjectResource => f.write_str("object"),
            RangeKind::PlainString { language } => write!(f, "string@{language}"),
            RangeKind::Integer => f.write_str("integer"),
            RangeKind::Double => f.write_str("double"),
            RangeKind::Date => f.write_str("date"),
        }
    }
}

impl RangeKind {
    fn parse(keyword: &str) -> Result<Self, MappingError> {
        match keyword {
            "object" => Ok(RangeKind::ObjectResource),
            "integer" => Ok(RangeKind::Integer),
            "double" => Ok(RangeKind::Double),
            "date" => Ok(RangeKind::Date),
            _ => match keyword.strip_prefix("string@") {
                Some(lang) if is_language_tag(lang) => Ok(RangeKind::PlainString { language: lang.to_string() }),
                _ => Err(MappingError::UnknownRange(keyword.to_string())),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyMapping {
    pub param: String,
    pub predicate: Iri,
    pub range: RangeKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateMapping {
    pub template: String,
    pub class_iri: Iri,
    pub properties: Vec<PropertyMapping>,
}

#[derive(Debug, Clone)]
pub struct MappingSet {
    by_template: HashMap<String, TemplateMapping>,
    version: String,
    loaded_at: SystemTime,
}

impl MappingSet {
    pub fn empty() -> Self {
        MappingSet { by_template: HashMap::new(), version: digest(b""), loaded_at: SystemTime::now() }
    }

    /// Looks up a template by name; the name is normalized first.
    pub fn get(&self, template: &str) -> Option<&TemplateMapping> {
        self.by_template.get(&normalize_template_name(template))
    }

    pub fn len(&self) -> usize {
        self.by_template.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_template.is_empty()
    }

    /// Mappings sorted by template name.
    pub fn templates(&self) -> Vec<&TemplateMapping> {
        let mut all: Vec<_> = self.by_template.values().collect();
        all.sort_by(|a, b| a.template.cmp(&b.template));
        all
    }

    /// Content digest of the file this set was loaded from.
    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn loaded_at(&self) -> SystemTime {
        self.loaded_at
    }

    /// Adds or replaces one template mapping, bumping the version.
    pub fn insert(&mut self, mapping: TemplateMapping) {
        let key = normalize_template_name(&mapping.template);
        self.version = digest(format!("{}+{key}:{mapping:?}", self.version).as_bytes());
        self.by_template.insert(key, mapping);
    }
}

fn digest(bytes: &[u8]) -> String {
    let hash = Sha256::digest(bytes);
    hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, PartialEq)]
enum Token<'a> {
    Word(&'a str),
    Quoted(String),
    Iri(&'a str),
    Arrow,
}

fn tokenize(line: &str, line_no: usize) -> Result<Vec<Token<'_>>, MappingError> {
    let err = |reason: &str| MappingError::Format { line: line_no, reason: reason.to_string() };
    let mut tokens = Vec::new();
    let mut rest = line.trim_start();
    while !rest.is_empty() {
        if rest.starts_with('#') {
            break;
        } else if let Some(after) = rest.strip_prefix("->") {
            tokens.push(Token::Arrow);
            rest = after;
        } else if let Some(after) = rest.strip_prefix('"') {
            let end = after.find('"').ok_or_else(|| err("unterminated quoted name"))?;
            tokens.push(Token::Quoted(after[..end].to_string()));
            rest = &after[end + 1..];
        } else if let Some(after) = rest.strip_prefix('<') {
            let end = after.find('>').ok_or_else(|| err("unterminated IRI"))?;
            tokens.push(Token::Iri(&after[..end]));
            rest = &after[end + 1..];
        } else {
            let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
            let word = &rest[..end];
            // "param->x" without spaces
            let word = match word.find("->") {
                Some(0) | None => word,
                Some(at) => &word[..at],
            };
            tokens.push(Token::Word(word));
            rest = &rest[word.len()..];
        }
        rest = rest.trim_start();
    }
    Ok(tokens)
}

struct Prefixes(BTreeMap<String, Iri>);

impl Prefixes {
    fn resolve(&self, token: &Token<'_>, line: usize) -> Result<Iri, MappingError> {
        let err = |reason: String| MappingError::Format { line, reason };
        match token {
            Token::Iri(iri) => Iri::new(*iri).map_err(|e| err(e.to_string())),
            Token::Word(word) => {
                let (prefix, local) = word.split_once(':').ok_or_else(|| err(format!("expected IRI, got {word:?}")))?;
                let base = self.0.get(prefix).ok_or_else(|| err(format!("unknown prefix {prefix:?}")))?;
                base.join(local).map_err(|e| err(e.to_string()))
            }
            other => Err(err(format!("expected IRI, got {other:?}"))),
        }
    }
}

/// Parses a mapping file. Built-in prefixes follow `ns`.
pub fn load_mappings(content: &[u8], ns: &NamespaceConfig) -> Result<MappingSet, MappingError> {
    let text = std::str::from_utf8(content)
        .map_err(|_| MappingError::Format { line: 0, reason: "mapping file is not UTF-8".into() })?;
    let mut prefixes = Prefixes(ns.prefixes().into_iter().collect());
    let mut by_template: HashMap<String, TemplateMapping> = HashMap::new();
    let mut current: Option<TemplateMapping> = None;

    let finish = |current: &mut Option<TemplateMapping>, by_template: &mut HashMap<String, TemplateMapping>| {
        if let Some(done) = current.take() {
            by_template.insert(done.template.clone(), done);
        }
    };

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |reason: &str| MappingError::Format { line: line_no, reason: reason.to_string() };
        let tokens = tokenize(line, line_no)?;
        match tokens.as_slice() {
            [] => {}
            [Token::Word("prefix"), Token::Word(name), Token::Iri(iri)] => {
                let name = name.strip_suffix(':').ok_or_else(|| err("prefix name must end with ':'"))?;
                let iri = Iri::new(*iri).map_err(|e| err(&e.to_string()))?;
                prefixes.0.insert(name.to_string(), iri);
            }
            [Token::Word("template"), Token::Quoted(name), Token::Arrow, Token::Word("class"), class] => {
                finish(&mut current, &mut by_template);
                let template = normalize_template_name(name);
                if template.is_empty() {
                    return Err(err("empty template name"));
                }
                if by_template.contains_key(&template) {
                    return Err(MappingError::DuplicateTemplate(template));
                }
                let class_iri = prefixes.resolve(class, line_no)?;
                current = Some(TemplateMapping { template, class_iri, properties: Vec::new() });
            }
            [Token::Word("template"), ..] => return Err(err("expected: template \"Name\" -> class IRI")),
            [param, Token::Arrow, predicate, Token::Word(range)] => {
                let mapping = current.as_mut().ok_or_else(|| err("property mapping outside a template block"))?;
                let param = match param {
                    Token::Word(w) => w.to_string(),
                    Token::Quoted(q) => q.trim().to_string(),
                    _ => return Err(err("expected parameter name")),
                };
                if param.is_empty() {
                    return Err(err("empty parameter name"));
                }
                if mapping.properties.iter().any(|p| p.param == param) {
                    return Err(err(&format!("parameter {param:?} mapped twice")));
                }
                if *range == "string" {
                    return Err(err("string range needs a language tag, e.g. string@en"));
                }
                let predicate = prefixes.resolve(predicate, line_no)?;
                let range = RangeKind::parse(range)?;
                mapping.properties.push(PropertyMapping { param, predicate, range });
            }
            _ => return Err(err("unrecognized line")),
        }
    }
    finish(&mut current, &mut by_template);
    Ok(MappingSet { by_template, version: digest(content), loaded_at: SystemTime::now() })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot read {text:?} as {range}")]
pub struct CoercionError {
    pub text: String,
    pub range: RangeKind,
}

/// Converts infobox text to a typed literal.
pub fn coerce_literal(text: &str, range: &RangeKind) -> Result<Literal, CoercionError> {
    let trimmed = text.trim();
    let fail = || CoercionError { text: text.to_string(), range: range.clone() };
    match range {
        RangeKind::PlainString { language } => {
            if trimmed.is_empty() {
                return Err(fail());
            }
            Literal::lang(trimmed, language.as_str()).map_err(|_| fail())
        }
        RangeKind::Integer => {
            let compact: String = trimmed.chars().filter(|&c| c != ',').collect();
            let digits = compact.strip_prefix(['+', '-']).unwrap_or(&compact);
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || trimmed.starts_with(',') {
                return Err(fail());
            }
            let lexical = compact.strip_prefix('+').unwrap_or(&compact);
            Ok(Literal::typed(lexical, xsd("integer")))
        }
        RangeKind::Double => {
            if !is_double(trimmed) {
                return Err(fail());
            }
            Ok(Literal::typed(trimmed, xsd("double")))
        }
        RangeKind::Date => {
            let lexical = coerce_date(trimmed).ok_or_else(fail)?;
            Ok(Literal::typed(lexical, xsd("date")))
        }
        RangeKind::ObjectResource => Err(fail()),
    }
}

fn is_double(s: &str) -> bool {
    let s = s.strip_prefix(['+', '-']).unwrap_or(s);
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(at) => (&s[..at], Some(&s[at + 1..])),
        None => (s, None),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
    let mantissa_ok = digits(int) && digits(frac) && !(int.is_empty() && frac.is_empty());
    let exponent_ok = exponent.is_none_or(|e| {
        let e = e.strip_prefix(['+', '-']).unwrap_or(e);
        !e.is_empty() && digits(e)
    });
    mantissa_ok && exponent_ok
}

/// `YYYY`, `YYYY-MM` or `YYYY-MM-DD`; missing month/day become `01`.
fn coerce_date(s: &str) -> Option<String> {
    let mut parts = s.split('-');
    let year = parts.next()?;
    if year.len() != 4 || !year.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let number = |p: Option<&str>| -> Option<Option<u32>> {
        match p {
            None => Some(None),
            Some(p) if (1..=2).contains(&p.len()) && p.bytes().all(|b| b.is_ascii_digit()) => Some(p.parse().ok()),
            Some(_) => None,
        }
    };
    let month = number(parts.next())?;
    let day = number(parts.next())?;
    if parts.next().is_some() || (month.is_none() && day.is_some()) {
        return None;
    }
    let year_num: u32 = year.parse().ok()?;
    let month = month.unwrap_or(1);
    let day = day.unwrap_or(1);
    if !(1..=12).contains(&month) || day == 0 || day > days_in_month(year_num, month) {
        return None;
    }
    Some(format!("{year}-{month:02}-{day:02}"))
}

fn days_in_month(year: u32, month: u32) -> u32 {
    match month {
        2 if (year.is_multiple_of(4) && !year.is_multiple_of(100)) || year.is_multiple_of(400) => 29,
        2 => 28,
        4 | 6 | 9 | 11 => 30,
        _ => 31,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoercionWarning {
    pub page: String,
    pub param: String,
    pub reason: String,
}

/// Triples produced from one page together with any values that could not
/// be coerced.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MappedPage {
    pub graph: Graph,
    pub warnings: Vec<CoercionWarning>,
}

/// Applies `mappings` to the top-level templates of `page`. Every output
/// triple has `subject` as its subject; the page title is always emitted as
/// a label.
pub fn apply_mappings(page: &ParsedPage, subject: &Iri, mappings: &MappingSet, ns: &NamespaceConfig) -> MappedPage {
    let mut out = MappedPage::default();
    if let Ok(label) = Literal::lang(page.title.as_str(), ns.label_language.as_str()) {
        out.graph.insert(Triple::new(subject.clone(), ns.label_predicate.clone(), label));
    }

    for call in &page.templates {
        let Some(mapping) = mappings.get(&call.name) else { continue };
        out.graph.insert(Triple::new(subject.clone(), ns.type_predicate.clone(), mapping.class_iri.clone()));
        for property in &mapping.properties {
            let Some(value) = call.param(&property.param) else { continue };
            if value.is_blank() {
                continue;
            }
            match &property.range {
                RangeKind::ObjectResource => {
                    for link in value.links() {
                        if link.is_namespaced_media() {
                            continue;
                        }
                        if let Ok(object) = title_to_iri(&link.target, ns) {
                            out.graph.insert(Triple::new(subject.clone(), property.predicate.clone(), object));
                        }
                    }
                }
                range => match coerce_literal(&value.plain_text(), range) {
                    Ok(literal) => {
                        out.graph.insert(Triple::new(subject.clone(), property.predicate.clone(), literal));
                    }
                    Err(e) => out.warnings.push(CoercionWarning {
                        page: page.title.clone(),
                        param: property.param.clone(),
                        reason: e.to_string(),
                    }),
                },
            }
        }
    }
    out
}
