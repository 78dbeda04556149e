//! Schema documents, YAML script parsing and component validation.

mod definition;
mod node;
mod validate;
pub mod yaml;

pub use definition::{load_schema, Schema, SchemaDocument, SchemaError};
pub use node::{ComponentNode, NodeValue};
pub use validate::{parse_component, parse_component_at, IssueCode, ValidationIssue};
pub use yaml::{parse_document, DocValue, YamlError, YamlErrorKind};
