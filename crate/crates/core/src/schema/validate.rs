use std::fmt;

use indexmap::IndexMap;
use serde::Serialize;

use super::definition::{Schema, SchemaDocument};
use super::node::{ComponentNode, NodeValue};
use super::yaml::{path_segment, DocValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IssueCode {
    MissingRequired,
    TypeMismatch,
    UnknownField,
    UnresolvedRef,
    BadAnchor,
}

impl IssueCode {
    pub fn as_str(self) -> &'static str {
        match self {
            IssueCode::MissingRequired => "missing-required",
            IssueCode::TypeMismatch => "type-mismatch",
            IssueCode::UnknownField => "unknown-field",
            IssueCode::UnresolvedRef => "unresolved-ref",
            IssueCode::BadAnchor => "bad-anchor",
        }
    }
}

impl fmt::Display for IssueCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationIssue {
    pub path: String,
    pub code: IssueCode,
    pub message: String,
}

impl ValidationIssue {
    pub fn new(path: impl Into<String>, code: IssueCode, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            code,
            message: message.into(),
        }
    }
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.code, self.path, self.message)
    }
}

/// Validates `value` against the schema `schema_name`, reporting paths
/// relative to the document root.
pub fn parse_component(
    value: &DocValue,
    schema_name: &str,
    doc: &SchemaDocument,
) -> Result<ComponentNode, Vec<ValidationIssue>> {
    parse_component_at(value, schema_name, doc, "")
}

/// Like [`parse_component`], for a fragment located at `base_path`.
///
/// Each violation is reported once and validation does not descend below it,
/// so `k` independent mistakes give exactly `k` issues.
pub fn parse_component_at(
    value: &DocValue,
    schema_name: &str,
    doc: &SchemaDocument,
    base_path: &str,
) -> Result<ComponentNode, Vec<ValidationIssue>> {
    let mut validator = Validator { doc, issues: Vec::new() };
    let result = validator.check(value, &Schema::Ref(schema_name.to_string()), base_path, schema_name);
    match result {
        Some(NodeValue::Node(node)) if validator.issues.is_empty() => Ok(node),
        Some(_) if validator.issues.is_empty() => Err(vec![ValidationIssue::new(
            base_path,
            IssueCode::TypeMismatch,
            format!("schema '{schema_name}' does not describe a component object"),
        )]),
        _ => Err(validator.issues),
    }
}

struct Validator<'a> {
    doc: &'a SchemaDocument,
    issues: Vec<ValidationIssue>,
}

impl Validator<'_> {
    fn mismatch(&mut self, path: &str, expected: &str, found: &DocValue) {
        self.issues.push(ValidationIssue::new(
            path,
            IssueCode::TypeMismatch,
            format!("expected {expected}, found {}", found.type_name()),
        ));
    }

    fn check(&mut self, value: &DocValue, schema: &Schema, path: &str, name: &str) -> Option<NodeValue> {
        match schema {
            Schema::Ref(target) => match self.doc.get(target) {
                Some(resolved) => self.check(value, resolved, path, target),
                None => {
                    self.issues.push(ValidationIssue::new(
                        path,
                        IssueCode::UnresolvedRef,
                        format!("no schema named '{target}'"),
                    ));
                    None
                }
            },
            Schema::String => match value {
                DocValue::Str(s) => Some(NodeValue::Str(s.clone())),
                other => {
                    self.mismatch(path, "string", other);
                    None
                }
            },
            Schema::Integer => match value {
                DocValue::Int(i) => Some(NodeValue::Int(*i)),
                DocValue::Float(f) if f.fract() == 0.0 && f.abs() < 9.0e15 => Some(NodeValue::Int(*f as i64)),
                other => {
                    self.mismatch(path, "integer", other);
                    None
                }
            },
            Schema::Number => match value {
                DocValue::Int(i) => Some(NodeValue::Float(*i as f64)),
                DocValue::Float(f) => Some(NodeValue::Float(*f)),
                other => {
                    self.mismatch(path, "number", other);
                    None
                }
            },
            Schema::Boolean => match value {
                DocValue::Bool(b) => Some(NodeValue::Bool(*b)),
                other => {
                    self.mismatch(path, "boolean", other);
                    None
                }
            },
            Schema::Array(items) => match value {
                DocValue::Seq(values) => {
                    let before = self.issues.len();
                    let checked: Vec<_> = values
                        .iter()
                        .enumerate()
                        .filter_map(|(i, v)| self.check(v, items, &format!("{path}/{i}"), name))
                        .collect();
                    (self.issues.len() == before).then_some(NodeValue::List(checked))
                }
                other => {
                    self.mismatch(path, "array", other);
                    None
                }
            },
            Schema::Object {
                properties,
                required,
                additional,
            } => {
                let DocValue::Map(entries) = value else {
                    self.mismatch(path, "object", value);
                    return None;
                };
                let before = self.issues.len();
                let mut fields = IndexMap::new();
                for (key, v) in entries {
                    let child_path = format!("{path}/{}", path_segment(key));
                    // null reads as "not given"
                    if matches!(v, DocValue::Null) {
                        continue;
                    }
                    let child_schema = match properties.get(key) {
                        Some(s) => s,
                        None => match additional {
                            Some(s) => s.as_ref(),
                            None => {
                                self.issues.push(ValidationIssue::new(
                                    child_path,
                                    IssueCode::UnknownField,
                                    format!("'{key}' is not a field of {name}"),
                                ));
                                continue;
                            }
                        },
                    };
                    let child_name = format!("{name}.{key}");
                    if let Some(checked) = self.check(v, child_schema, &child_path, &child_name) {
                        fields.insert(key.clone(), checked);
                    }
                }
                for req in required {
                    if entries.get(req).is_none_or(|v| matches!(v, DocValue::Null)) {
                        self.issues.push(ValidationIssue::new(
                            format!("{path}/{}", path_segment(req)),
                            IssueCode::MissingRequired,
                            format!("{name} requires '{req}'"),
                        ));
                    }
                }
                if self.issues.len() != before {
                    return None;
                }
                if properties.is_empty() && additional.is_some() {
                    Some(NodeValue::Map(fields))
                } else {
                    Some(NodeValue::Node(ComponentNode {
                        schema_name: name.to_string(),
                        fields,
                    }))
                }
            }
        }
    }
}
