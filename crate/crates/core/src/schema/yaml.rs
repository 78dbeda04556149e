//! YAML documents as plain value trees.
//!
//! Anchors and aliases are expanded while composing, `<<` merge keys are
//! applied, and a reference to an undefined anchor is reported together with
//! the document path where it occurred.

use std::collections::HashMap;
use std::fmt;

use indexmap::IndexMap;
use yaml_rust2::parser::{Event, MarkedEventReceiver, Parser};
use yaml_rust2::scanner::{Marker, TScalarStyle};
use yaml_rust2::Yaml;

#[derive(Debug, Clone, PartialEq)]
pub enum DocValue {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    Seq(Vec<DocValue>),
    Map(IndexMap<String, DocValue>),
}

impl DocValue {
    pub fn type_name(&self) -> &'static str {
        match self {
            DocValue::Null => "null",
            DocValue::Bool(_) => "boolean",
            DocValue::Int(_) => "integer",
            DocValue::Float(_) => "number",
            DocValue::Str(_) => "string",
            DocValue::Seq(_) => "array",
            DocValue::Map(_) => "object",
        }
    }

    pub fn as_map(&self) -> Option<&IndexMap<String, DocValue>> {
        match self {
            DocValue::Map(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            DocValue::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn get(&self, key: &str) -> Option<&DocValue> {
        self.as_map()?.get(key)
    }

    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::Value;
        match self {
            DocValue::Null => Value::Null,
            DocValue::Bool(b) => Value::Bool(*b),
            DocValue::Int(i) => Value::from(*i),
            DocValue::Float(f) => serde_json::Number::from_f64(*f).map_or(Value::Null, Value::Number),
            DocValue::Str(s) => Value::String(s.clone()),
            DocValue::Seq(items) => Value::Array(items.iter().map(DocValue::to_json).collect()),
            DocValue::Map(m) => Value::Object(m.iter().map(|(k, v)| (k.clone(), v.to_json())).collect()),
        }
    }

    /// Renders the value as a document that [`parse_document`] reads back to
    /// an equal value. JSON is a subset of YAML, so the JSON rendering is used.
    pub fn to_document(&self) -> String {
        let mut out = serde_json::to_string_pretty(&self.to_json()).expect("json values always serialize");
        out.push('\n');
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YamlErrorKind {
    Syntax,
    UnknownAnchor,
    Structure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct YamlError {
    pub kind: YamlErrorKind,
    pub message: String,
    /// 1-based.
    pub line: usize,
    pub col: usize,
    /// Slash-separated location of the offending node.
    pub path: String,
}

impl fmt::Display for YamlError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at line {} column {}", self.message, self.line, self.col)?;
        if !self.path.is_empty() {
            write!(f, " (path {})", self.path)?;
        }
        Ok(())
    }
}

impl std::error::Error for YamlError {}

/// Escapes a map key for use as one path segment.
pub fn path_segment(key: &str) -> String {
    key.replace('~', "~0").replace('/', "~1")
}

enum Frame {
    Seq {
        items: Vec<DocValue>,
        anchor: usize,
    },
    Map {
        entries: IndexMap<String, DocValue>,
        merges: Vec<DocValue>,
        key: Option<String>,
        anchor: usize,
        mark: Marker,
    },
}

#[derive(Default)]
struct Composer {
    stack: Vec<Frame>,
    anchors: HashMap<usize, DocValue>,
    root: Option<DocValue>,
    error: Option<YamlError>,
}

const MERGE_KEY: &str = "<<";

impl Composer {
    fn path(&self) -> String {
        let mut out = String::new();
        for frame in &self.stack {
            out.push('/');
            match frame {
                Frame::Seq { items, .. } => out.push_str(&items.len().to_string()),
                Frame::Map { key, .. } => out.push_str(&path_segment(key.as_deref().unwrap_or(""))),
            }
        }
        out
    }

    fn fail(&mut self, kind: YamlErrorKind, message: String, mark: Marker) {
        if self.error.is_none() {
            self.error = Some(YamlError {
                kind,
                message,
                line: mark.line(),
                col: mark.col() + 1,
                path: self.path(),
            });
        }
    }

    fn insert(&mut self, value: DocValue, anchor: usize, mark: Marker) {
        if anchor > 0 {
            self.anchors.insert(anchor, value.clone());
        }
        let outcome = match self.stack.last_mut() {
            None => {
                self.root.get_or_insert(value);
                Ok(())
            }
            Some(Frame::Seq { items, .. }) => {
                items.push(value);
                Ok(())
            }
            Some(Frame::Map {
                entries, merges, key, ..
            }) => match key.take() {
                None => match value {
                    DocValue::Str(s) => {
                        *key = Some(s);
                        Ok(())
                    }
                    DocValue::Int(i) => {
                        *key = Some(i.to_string());
                        Ok(())
                    }
                    DocValue::Float(f) => {
                        *key = Some(f.to_string());
                        Ok(())
                    }
                    DocValue::Bool(b) => {
                        *key = Some(b.to_string());
                        Ok(())
                    }
                    DocValue::Null => {
                        *key = Some("null".into());
                        Ok(())
                    }
                    other => Err(format!("{} used as a mapping key", other.type_name())),
                },
                Some(k) if k == MERGE_KEY => {
                    merges.push(value);
                    Ok(())
                }
                Some(k) => {
                    if entries.contains_key(&k) {
                        Err(format!("duplicate key '{k}'"))
                    } else {
                        entries.insert(k, value);
                        Ok(())
                    }
                }
            },
        };
        if let Err(message) = outcome {
            self.fail(YamlErrorKind::Structure, message, mark);
        }
    }

    fn finish_map(
        &mut self,
        mut entries: IndexMap<String, DocValue>,
        merges: Vec<DocValue>,
        mark: Marker,
    ) -> IndexMap<String, DocValue> {
        // Explicit keys win; among merged maps the earlier one wins.
        let mut sources = Vec::new();
        for merge in merges {
            match merge {
                DocValue::Map(m) => sources.push(m),
                DocValue::Seq(items) => {
                    for item in items {
                        match item {
                            DocValue::Map(m) => sources.push(m),
                            other => {
                                self.fail(
                                    YamlErrorKind::Structure,
                                    format!("merge key expects mappings, found {}", other.type_name()),
                                    mark,
                                );
                            }
                        }
                    }
                }
                other => self.fail(
                    YamlErrorKind::Structure,
                    format!("merge key expects a mapping, found {}", other.type_name()),
                    mark,
                ),
            }
        }
        for source in sources {
            for (k, v) in source {
                entries.entry(k).or_insert(v);
            }
        }
        entries
    }
}

fn resolve_scalar(value: String, style: TScalarStyle, tagged_str: bool) -> DocValue {
    if style != TScalarStyle::Plain || tagged_str {
        return DocValue::Str(value);
    }
    match Yaml::from_str(&value) {
        Yaml::Integer(i) => DocValue::Int(i),
        Yaml::Real(r) => r.parse::<f64>().map_or(DocValue::Str(r), DocValue::Float),
        Yaml::Boolean(b) => DocValue::Bool(b),
        Yaml::Null => DocValue::Null,
        Yaml::String(s) => DocValue::Str(s),
        _ => DocValue::Str(value),
    }
}

impl MarkedEventReceiver for Composer {
    fn on_event(&mut self, ev: Event, mark: Marker) {
        if self.error.is_some() {
            return;
        }
        match ev {
            Event::Scalar(value, style, anchor, tag) => {
                let tagged_str = tag.is_some_and(|t| t.suffix == "str");
                let v = resolve_scalar(value, style, tagged_str);
                self.insert(v, anchor, mark);
            }
            Event::Alias(id) => {
                let v = self.anchors.get(&id).cloned().unwrap_or(DocValue::Null);
                self.insert(v, 0, mark);
            }
            Event::SequenceStart(anchor, _) => self.stack.push(Frame::Seq {
                items: Vec::new(),
                anchor,
            }),
            Event::MappingStart(anchor, _) => self.stack.push(Frame::Map {
                entries: IndexMap::new(),
                merges: Vec::new(),
                key: None,
                anchor,
                mark,
            }),
            Event::SequenceEnd => {
                if let Some(Frame::Seq { items, anchor }) = self.stack.pop() {
                    self.insert(DocValue::Seq(items), anchor, mark);
                }
            }
            Event::MappingEnd => {
                if let Some(Frame::Map {
                    entries,
                    merges,
                    anchor,
                    mark: start,
                    ..
                }) = self.stack.pop()
                {
                    let entries = self.finish_map(entries, merges, start);
                    self.insert(DocValue::Map(entries), anchor, mark);
                }
            }
            _ => {}
        }
    }
}

/// Parses the first document of `text`. An empty stream yields `Null`.
pub fn parse_document(text: &str) -> Result<DocValue, YamlError> {
    let mut composer = Composer::default();
    let mut parser = Parser::new_from_str(text);
    if let Err(e) = parser.load(&mut composer, false) {
        let kind = if e.info().contains("unknown anchor") {
            YamlErrorKind::UnknownAnchor
        } else {
            YamlErrorKind::Syntax
        };
        let path = composer.path();
        return Err(YamlError {
            kind,
            message: e.info().to_string(),
            line: e.marker().line(),
            col: e.marker().col() + 1,
            path,
        });
    }
    if let Some(err) = composer.error {
        return Err(err);
    }
    Ok(composer.root.unwrap_or(DocValue::Null))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(entries: &[(&str, DocValue)]) -> DocValue {
        DocValue::Map(entries.iter().map(|(k, v)| (k.to_string(), v.clone())).collect())
    }

    #[test]
    fn scalars_resolve_to_core_types() {
        let doc = parse_document("a: 1\nb: 1.5\nc: true\nd: \"2\"\ne: hello\nf:\ng: ''\n").unwrap();
        assert_eq!(doc.get("a"), Some(&DocValue::Int(1)));
        assert_eq!(doc.get("b"), Some(&DocValue::Float(1.5)));
        assert_eq!(doc.get("c"), Some(&DocValue::Bool(true)));
        assert_eq!(doc.get("d"), Some(&DocValue::Str("2".into())));
        assert_eq!(doc.get("e"), Some(&DocValue::Str("hello".into())));
        assert_eq!(doc.get("f"), Some(&DocValue::Null));
        assert_eq!(doc.get("g"), Some(&DocValue::Str(String::new())));
    }

    #[test]
    fn aliases_expand_to_copies() {
        let doc = parse_document("base: &B {x: 1}\nuse: *B\n").unwrap();
        assert_eq!(doc.get("use"), Some(&map(&[("x", DocValue::Int(1))])));
    }

    #[test]
    fn merge_keys_fill_missing_entries() {
        let doc = parse_document("base: &B {x: 1, y: 2}\nitem:\n  <<: *B\n  y: 3\n").unwrap();
        assert_eq!(
            doc.get("item"),
            Some(&map(&[("x", DocValue::Int(1)), ("y", DocValue::Int(3))]))
        );
    }

    #[test]
    fn merge_in_sequence_item() {
        let doc = parse_document("H: &H {pes: 2}\nhosts:\n  - <<: *H\n    copies: 5\n").unwrap();
        let hosts = doc.get("hosts").unwrap();
        assert_eq!(
            hosts,
            &DocValue::Seq(vec![map(&[("pes", DocValue::Int(2)), ("copies", DocValue::Int(5))])])
        );
    }

    #[test]
    fn unknown_anchor_reports_path() {
        let err = parse_document("a:\n  b:\n    - 1\n    - c: *nope\n").unwrap_err();
        assert_eq!(err.kind, YamlErrorKind::UnknownAnchor);
        assert_eq!(err.path, "/a/b/1/c");
        assert_eq!(err.line, 4);
    }

    #[test]
    fn duplicate_keys_rejected() {
        let err = parse_document("a: 1\na: 2\n").unwrap_err();
        assert_eq!(err.kind, YamlErrorKind::Structure);
    }

    #[test]
    fn syntax_error_is_reported() {
        let err = parse_document("a: [1, 2\n").unwrap_err();
        assert_eq!(err.kind, YamlErrorKind::Syntax);
    }

    #[test]
    fn empty_document_is_null() {
        assert_eq!(parse_document("").unwrap(), DocValue::Null);
    }

    #[test]
    fn document_rendering_round_trips() {
        let src = "a: [1, 2.5, \"x: y\", true, null]\nb: {c: 'it''s', d: -3}\n";
        let doc = parse_document(src).unwrap();
        assert_eq!(parse_document(&doc.to_document()).unwrap(), doc);
    }
}
