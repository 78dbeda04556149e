use indexmap::IndexMap;
use thiserror::Error;

use super::yaml::{parse_document, path_segment, DocValue, YamlError};

const REF_PREFIX: &str = "#/components/schemas/";

const ALLOWED_KEYWORDS: &[&str] = &[
    "type",
    "properties",
    "required",
    "items",
    "additionalProperties",
    "description",
    "title",
    "example",
];

#[derive(Debug, Clone, PartialEq)]
pub enum Schema {
    Object {
        properties: IndexMap<String, Schema>,
        required: Vec<String>,
        /// Schema of entries not listed in `properties`; `None` forbids them.
        additional: Option<Box<Schema>>,
    },
    Array(Box<Schema>),
    String,
    Integer,
    Number,
    Boolean,
    /// Name of a schema in the same document.
    Ref(String),
}

impl Schema {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Schema::Object { .. } => "object",
            Schema::Array(_) => "array",
            Schema::String => "string",
            Schema::Integer => "integer",
            Schema::Number => "number",
            Schema::Boolean => "boolean",
            Schema::Ref(_) => "ref",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchemaError {
    #[error("schema document is not valid YAML: {0}")]
    Yaml(#[from] YamlError),
    #[error("unresolved-ref at {path}: no schema named '{target}'")]
    UnresolvedRef { path: String, target: String },
    #[error("unsupported schema feature '{keyword}' at {path}")]
    Unsupported { path: String, keyword: String },
    #[error("malformed schema at {path}: {message}")]
    Malformed { path: String, message: String },
}

/// The `components/schemas` section of an OpenAPI 3.0 document, restricted to
/// the subset described by [`Schema`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SchemaDocument {
    schemas: IndexMap<String, Schema>,
}

impl SchemaDocument {
    pub fn get(&self, name: &str) -> Option<&Schema> {
        self.schemas.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.schemas.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.schemas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.schemas.is_empty()
    }

    /// Follows `Ref`s until a concrete schema is reached.
    pub fn resolve<'a>(&'a self, mut schema: &'a Schema) -> Option<(&'a Schema, Option<&'a str>)> {
        let mut name = None;
        for _ in 0..=self.schemas.len() {
            match schema {
                Schema::Ref(target) => {
                    let (key, next) = self.schemas.get_key_value(target)?;
                    name = Some(key.as_str());
                    schema = next;
                }
                other => return Some((other, name)),
            }
        }
        None
    }
}

/// Parses a schema document. Every `$ref` must name a schema of the same
/// document, and keywords outside the supported subset are rejected.
pub fn load_schema(text: &str) -> Result<SchemaDocument, SchemaError> {
    let root = parse_document(text)?;
    let schemas = match root.get("components").and_then(|c| c.get("schemas")) {
        None | Some(DocValue::Null) => return Ok(SchemaDocument::default()),
        Some(DocValue::Map(m)) => m,
        Some(other) => {
            return Err(SchemaError::Malformed {
                path: "#/components/schemas".into(),
                message: format!("expected an object, found {}", other.type_name()),
            })
        }
    };
    let mut doc = SchemaDocument::default();
    for (name, value) in schemas {
        let path = format!("{REF_PREFIX}{}", path_segment(name));
        doc.schemas.insert(name.clone(), parse_schema(value, &path)?);
    }
    for (name, schema) in &doc.schemas {
        check_refs(schema, &format!("{REF_PREFIX}{}", path_segment(name)), &doc)?;
    }
    // A schema that is nothing but a chain of refs back to itself never terminates.
    for (name, schema) in &doc.schemas {
        if doc.resolve(schema).is_none() {
            return Err(SchemaError::Malformed {
                path: format!("{REF_PREFIX}{name}"),
                message: "circular $ref chain".into(),
            });
        }
    }
    Ok(doc)
}

fn malformed(path: &str, message: impl Into<String>) -> SchemaError {
    SchemaError::Malformed {
        path: path.to_string(),
        message: message.into(),
    }
}

fn parse_schema(value: &DocValue, path: &str) -> Result<Schema, SchemaError> {
    let map = value
        .as_map()
        .ok_or_else(|| malformed(path, format!("expected a schema object, found {}", value.type_name())))?;

    if let Some(target) = map.get("$ref") {
        let target = target.as_str().ok_or_else(|| malformed(path, "$ref must be a string"))?;
        for key in map.keys() {
            if key != "$ref" && key != "description" {
                return Err(SchemaError::Unsupported {
                    path: path.to_string(),
                    keyword: format!("{key} beside $ref"),
                });
            }
        }
        let name = target.strip_prefix(REF_PREFIX).ok_or_else(|| SchemaError::Unsupported {
            path: path.to_string(),
            keyword: format!("$ref '{target}' outside {REF_PREFIX}"),
        })?;
        return Ok(Schema::Ref(name.to_string()));
    }

    for key in map.keys() {
        if !ALLOWED_KEYWORDS.contains(&key.as_str()) {
            return Err(SchemaError::Unsupported {
                path: path.to_string(),
                keyword: key.clone(),
            });
        }
    }

    let ty = match map.get("type") {
        Some(DocValue::Str(t)) => t.as_str(),
        Some(other) => return Err(malformed(path, format!("type must be a string, found {}", other.type_name()))),
        None if map.contains_key("properties") || map.contains_key("additionalProperties") => "object",
        None => return Err(malformed(path, "missing 'type'")),
    };

    match ty {
        "object" => parse_object(map, path),
        "array" => {
            let items = map.get("items").ok_or_else(|| malformed(path, "array schema without 'items'"))?;
            Ok(Schema::Array(Box::new(parse_schema(items, &format!("{path}/items"))?)))
        }
        "string" => Ok(Schema::String),
        "integer" => Ok(Schema::Integer),
        "number" => Ok(Schema::Number),
        "boolean" => Ok(Schema::Boolean),
        other => Err(SchemaError::Unsupported {
            path: path.to_string(),
            keyword: format!("type: {other}"),
        }),
    }
}

fn parse_object(map: &IndexMap<String, DocValue>, path: &str) -> Result<Schema, SchemaError> {
    if map.contains_key("items") {
        return Err(malformed(path, "'items' on an object schema"));
    }
    let mut properties = IndexMap::new();
    match map.get("properties") {
        None | Some(DocValue::Null) => {}
        Some(DocValue::Map(props)) => {
            for (name, value) in props {
                let prop_path = format!("{path}/properties/{}", path_segment(name));
                properties.insert(name.clone(), parse_schema(value, &prop_path)?);
            }
        }
        Some(other) => return Err(malformed(path, format!("properties must be an object, found {}", other.type_name()))),
    }
    let mut required = Vec::new();
    match map.get("required") {
        None | Some(DocValue::Null) => {}
        Some(DocValue::Seq(items)) => {
            for item in items {
                let name = item.as_str().ok_or_else(|| malformed(path, "required entries must be strings"))?;
                if !properties.contains_key(name) {
                    return Err(malformed(path, format!("required property '{name}' is not declared")));
                }
                required.push(name.to_string());
            }
        }
        Some(_) => return Err(malformed(path, "required must be a list")),
    }
    let additional = match map.get("additionalProperties") {
        None | Some(DocValue::Bool(false)) => None,
        Some(DocValue::Bool(true)) => {
            return Err(SchemaError::Unsupported {
                path: path.to_string(),
                keyword: "additionalProperties: true".into(),
            })
        }
        Some(value) => Some(Box::new(parse_schema(value, &format!("{path}/additionalProperties"))?)),
    };
    Ok(Schema::Object {
        properties,
        required,
        additional,
    })
}

fn check_refs(schema: &Schema, path: &str, doc: &SchemaDocument) -> Result<(), SchemaError> {
    match schema {
        Schema::Ref(target) if doc.get(target).is_none() => Err(SchemaError::UnresolvedRef {
            path: path.to_string(),
            target: target.clone(),
        }),
        Schema::Array(items) => check_refs(items, &format!("{path}/items"), doc),
        Schema::Object {
            properties, additional, ..
        } => {
            for (name, prop) in properties {
                check_refs(prop, &format!("{path}/properties/{}", path_segment(name)), doc)?;
            }
            if let Some(extra) = additional {
                check_refs(extra, &format!("{path}/additionalProperties"), doc)?;
            }
            Ok(())
        }
        _ => Ok(()),
    }
}
