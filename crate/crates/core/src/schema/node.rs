use indexmap::IndexMap;

use super::yaml::DocValue;

/// A validated value. Objects with declared properties become
/// [`ComponentNode`]s, free-form string maps become `Map`.
#[derive(Debug, Clone, PartialEq)]
pub enum NodeValue {
    Str(String),
    Int(i64),
    Float(f64),
    Bool(bool),
    Node(ComponentNode),
    List(Vec<NodeValue>),
    Map(IndexMap<String, NodeValue>),
}

impl NodeValue {
    pub fn to_doc(&self) -> DocValue {
        match self {
            NodeValue::Str(s) => DocValue::Str(s.clone()),
            NodeValue::Int(i) => DocValue::Int(*i),
            NodeValue::Float(f) => DocValue::Float(*f),
            NodeValue::Bool(b) => DocValue::Bool(*b),
            NodeValue::Node(n) => n.to_doc(),
            NodeValue::List(items) => DocValue::Seq(items.iter().map(NodeValue::to_doc).collect()),
            NodeValue::Map(m) => DocValue::Map(m.iter().map(|(k, v)| (k.clone(), v.to_doc())).collect()),
        }
    }

    pub fn as_node(&self) -> Option<&ComponentNode> {
        match self {
            NodeValue::Node(n) => Some(n),
            _ => None,
        }
    }
}

/// A script component validated against the schema named `schema_name`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentNode {
    pub schema_name: String,
    pub fields: IndexMap<String, NodeValue>,
}

impl ComponentNode {
    pub fn new(schema_name: impl Into<String>) -> Self {
        Self {
            schema_name: schema_name.into(),
            fields: IndexMap::new(),
        }
    }

    pub fn get(&self, field: &str) -> Option<&NodeValue> {
        self.fields.get(field)
    }

    pub fn str(&self, field: &str) -> Option<&str> {
        match self.get(field)? {
            NodeValue::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn int(&self, field: &str) -> Option<i64> {
        match self.get(field)? {
            NodeValue::Int(i) => Some(*i),
            _ => None,
        }
    }

    /// Numeric field; integers are widened.
    pub fn number(&self, field: &str) -> Option<f64> {
        match self.get(field)? {
            NodeValue::Float(f) => Some(*f),
            NodeValue::Int(i) => Some(*i as f64),
            _ => None,
        }
    }

    pub fn bool(&self, field: &str) -> Option<bool> {
        match self.get(field)? {
            NodeValue::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn node(&self, field: &str) -> Option<&ComponentNode> {
        self.get(field)?.as_node()
    }

    /// Items of a list field; empty when absent.
    pub fn list(&self, field: &str) -> &[NodeValue] {
        match self.get(field) {
            Some(NodeValue::List(items)) => items,
            _ => &[],
        }
    }

    pub fn map(&self, field: &str) -> Option<&IndexMap<String, NodeValue>> {
        match self.get(field)? {
            NodeValue::Map(m) => Some(m),
            _ => None,
        }
    }

    pub fn to_doc(&self) -> DocValue {
        DocValue::Map(self.fields.iter().map(|(k, v)| (k.clone(), v.to_doc())).collect())
    }
}
