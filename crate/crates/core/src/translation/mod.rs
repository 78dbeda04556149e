//! Turns a validated YAML script into a runnable simulation.
//!
//! Each schema type is handled by an [`ElementHandler`] chosen through the
//! [`HandlerRegistry`]. Handlers build their children through the
//! [`TranslationContext`], so replacing one handler (or adding a handler for
//! a new schema type) never touches the others.

mod extensions;
pub mod handlers;
mod manager;
mod plugin;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::cloud::{register_broker, Broker, Cloudlet, CloudSimulation, DatacenterEntity, DatacenterVariant, Host, VmRequest};
use crate::kernel::{EntityId, SimError};
use crate::schema::{ComponentNode, SchemaDocument, SchemaError, ValidationIssue, YamlError};

pub use extensions::{
    ArgValue, Catalog, CatalogBuilder, DatacenterFactory, ExtensionArgs, ExtensionRef, ExtensionRegistrar,
    HandlerFactory, PolicyFactory, SchedulerFactory, DEFAULT_ALLOCATION_POLICY, DEFAULT_CLOUDLET_SCHEDULER,
    DEFAULT_DATACENTER,
};
pub use manager::{environment_resolver_parse, Scenario, SimulationManager, ROOT_ELEMENT};
pub use plugin::{EXTENSION_ABI, ABI_SYMBOL, REGISTER_SYMBOL};

/// Broad failure classes, each with its own process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Validation,
    Extension,
    Runtime,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Usage => 2,
            ErrorClass::Validation => 3,
            ErrorClass::Extension => 4,
            ErrorClass::Runtime => 5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorClass::Usage => "usage",
            ErrorClass::Validation => "validation",
            ErrorClass::Extension => "extension",
            ErrorClass::Runtime => "runtime",
        }
    }
}

#[derive(Debug, Error)]
pub enum TranslationError {
    #[error("{0}")]
    Startup(String),
    #[error("invalid schema: {0}")]
    Schema(#[from] SchemaError),
    #[error("script is not valid YAML: {0}")]
    Syntax(YamlError),
    #[error("script does not match the schema ({} issue{})", .0.len(), if .0.len() == 1 { "" } else { "s" })]
    Validation(Vec<ValidationIssue>),
    #[error("{0}")]
    Build(String),
    #[error("no element handler accepts schema '{schema}' (registered: {})", .known.join(", "))]
    Resolution { schema: String, known: Vec<String> },
    #[error("unknown {kind} '{class_name}' (registered: {})", .known.join(", "))]
    UnknownExtension {
        kind: &'static str,
        class_name: String,
        known: Vec<String>,
    },
    #[error("'{class_name}' could not be constructed: {message}")]
    Construction { class_name: String, message: String },
    #[error("extension library {path}: {message}")]
    ExtensionLoad { path: String, message: String },
    #[error("simulation failed: {0}")]
    Simulation(#[source] SimError),
    #[error("at {path}: {source}")]
    AtPath {
        path: String,
        #[source]
        source: Box<TranslationError>,
    },
}

impl TranslationError {
    pub fn build(message: impl Into<String>) -> Self {
        TranslationError::Build(message.into())
    }

    /// Attaches the script path of the element being built, unless a deeper
    /// element already did.
    pub fn at(self, path: &str) -> Self {
        match self {
            e @ TranslationError::AtPath { .. } => e,
            e @ (TranslationError::Startup(_)
            | TranslationError::Schema(_)
            | TranslationError::Syntax(_)
            | TranslationError::Validation(_)
            | TranslationError::ExtensionLoad { .. }) => e,
            e => TranslationError::AtPath {
                path: path.to_string(),
                source: Box::new(e),
            },
        }
    }

    /// The innermost error, below any path annotations.
    pub fn root(&self) -> &TranslationError {
        match self {
            TranslationError::AtPath { source, .. } => source.root(),
            e => e,
        }
    }

    /// Script path of the failing element, if known.
    pub fn path(&self) -> Option<&str> {
        match self {
            TranslationError::AtPath { path, .. } => Some(path),
            _ => None,
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self.root() {
            TranslationError::Startup(_) | TranslationError::Schema(_) => ErrorClass::Usage,
            TranslationError::Syntax(_) | TranslationError::Validation(_) | TranslationError::Build(_) => {
                ErrorClass::Validation
            }
            TranslationError::Resolution { .. }
            | TranslationError::UnknownExtension { .. }
            | TranslationError::Construction { .. }
            | TranslationError::ExtensionLoad { .. } => ErrorClass::Extension,
            TranslationError::Simulation(_) => ErrorClass::Runtime,
            TranslationError::AtPath { .. } => unreachable!("root() strips paths"),
        }
    }

    /// Stable kebab-case name of the innermost error kind.
    pub fn code(&self) -> &'static str {
        match self.root() {
            TranslationError::Startup(_) => "startup",
            TranslationError::Schema(_) => "bad-schema",
            TranslationError::Syntax(_) => "syntax",
            TranslationError::Validation(_) => "invalid-script",
            TranslationError::Build(_) => "invalid-value",
            TranslationError::Resolution { .. } => "no-handler",
            TranslationError::UnknownExtension { .. } => "unknown-extension",
            TranslationError::Construction { .. } => "construction",
            TranslationError::ExtensionLoad { .. } => "extension-load",
            TranslationError::Simulation(_) => "simulation",
            TranslationError::AtPath { .. } => unreachable!("root() strips paths"),
        }
    }

    /// Individual validation issues, when this is a validation failure.
    pub fn issues(&self) -> &[ValidationIssue] {
        match self.root() {
            TranslationError::Validation(issues) => issues,
            _ => &[],
        }
    }
}

/// Summary of one translated zone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZoneSummary {
    pub name: String,
    pub datacenter: EntityId,
    pub datacenter_id: u32,
    pub broker: Option<EntityId>,
}

/// What a handler produces. Datacenters and brokers are already registered
/// with the kernel; brokers returned by a broker handler are not, because the
/// enclosing zone still has to give them a datacenter and a workload.
pub enum Element {
    Network(Vec<ZoneSummary>),
    Zone(ZoneSummary),
    Datacenter { entity: EntityId, datacenter_id: u32 },
    Hosts(Vec<Host>),
    Broker(Broker),
    Workload { vms: Vec<VmRequest>, cloudlets: Vec<Cloudlet> },
}

impl Element {
    pub fn kind(&self) -> &'static str {
        match self {
            Element::Network(_) => "network",
            Element::Zone(_) => "zone",
            Element::Datacenter { .. } => "datacenter",
            Element::Hosts(_) => "hosts",
            Element::Broker(_) => "broker",
            Element::Workload { .. } => "workload",
        }
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Network(zones) => f.debug_tuple("Network").field(zones).finish(),
            Element::Zone(z) => f.debug_tuple("Zone").field(z).finish(),
            Element::Datacenter { entity, datacenter_id } => f
                .debug_struct("Datacenter")
                .field("entity", entity)
                .field("datacenter_id", datacenter_id)
                .finish(),
            Element::Hosts(hosts) => f.debug_tuple("Hosts").field(&hosts.len()).finish(),
            Element::Broker(b) => f.debug_tuple("Broker").field(&b.name()).finish(),
            Element::Workload { vms, cloudlets } => f
                .debug_struct("Workload")
                .field("vms", &vms.len())
                .field("cloudlets", &cloudlets.len())
                .finish(),
        }
    }
}

/// Builds the simulation objects for one schema type.
pub trait ElementHandler {
    fn can_handle(&self, schema_name: &str) -> bool;

    fn init(&mut self, node: ComponentNode);

    /// Called once, after [`ElementHandler::init`].
    fn handle(&mut self, ctx: &mut TranslationContext<'_>) -> Result<Element, TranslationError>;
}

/// The node given to `init`, or an error when `handle` comes first.
pub fn initialized(node: &Option<ComponentNode>) -> Result<&ComponentNode, TranslationError> {
    node.as_ref()
        .ok_or_else(|| TranslationError::build("handler used before init"))
}

/// Picks the handler for a schema type: a configured override first, then
/// the first registered handler (extensions before built-ins) that accepts it.
pub struct HandlerRegistry {
    order: Vec<String>,
    overrides: BTreeMap<String, String>,
}

impl HandlerRegistry {
    pub fn new(catalog: &Catalog, overrides: BTreeMap<String, String>) -> Result<Self, TranslationError> {
        for class_name in overrides.values() {
            if !catalog.has_handler(class_name) {
                return Err(TranslationError::UnknownExtension {
                    kind: "element handler",
                    class_name: class_name.clone(),
                    known: catalog.handler_names(),
                });
            }
        }
        Ok(Self {
            order: catalog.handler_names(),
            overrides,
        })
    }

    pub fn resolve(&self, schema_name: &str, catalog: &Catalog) -> Result<Box<dyn ElementHandler>, TranslationError> {
        if let Some(class_name) = self.overrides.get(schema_name) {
            let handler = catalog.materialize_handler(&ExtensionRef::new(class_name), vec![])?;
            if !handler.can_handle(schema_name) {
                return Err(TranslationError::Construction {
                    class_name: class_name.clone(),
                    message: format!("configured for '{schema_name}' but does not handle it"),
                });
            }
            return Ok(handler);
        }
        for class_name in &self.order {
            let handler = catalog.materialize_handler(&ExtensionRef::new(class_name), vec![])?;
            if handler.can_handle(schema_name) {
                return Ok(handler);
            }
        }
        Err(TranslationError::Resolution {
            schema: schema_name.to_string(),
            known: self.order.clone(),
        })
    }
}

/// Shared state while a script is being translated.
pub struct TranslationContext<'a> {
    pub kernel: &'a mut CloudSimulation,
    pub catalog: &'a Catalog,
    pub schema: &'a SchemaDocument,
    registry: &'a HandlerRegistry,
    path: Vec<String>,
    next_datacenter_id: u32,
    datacenters: Vec<EntityId>,
    brokers: Vec<EntityId>,
}

impl<'a> TranslationContext<'a> {
    pub fn new(
        kernel: &'a mut CloudSimulation,
        catalog: &'a Catalog,
        schema: &'a SchemaDocument,
        registry: &'a HandlerRegistry,
        root_path: &str,
    ) -> Self {
        Self {
            kernel,
            catalog,
            schema,
            registry,
            path: vec![root_path.to_string()],
            next_datacenter_id: 0,
            datacenters: Vec::new(),
            brokers: Vec::new(),
        }
    }

    /// Script path of the element currently being built.
    pub fn path(&self) -> String {
        self.path.join("/")
    }

    /// Resolves, initializes and runs the handler for `node`, located at
    /// `segment` below the current element.
    pub fn handle_child(&mut self, node: &ComponentNode, segment: &str) -> Result<Element, TranslationError> {
        self.path.push(segment.to_string());
        let result = self
            .registry
            .resolve(&node.schema_name, self.catalog)
            .and_then(|mut handler| {
                handler.init(node.clone());
                handler.handle(self)
            })
            .map_err(|e| e.at(&self.path()));
        self.path.pop();
        result
    }

    /// Report ids of datacenters follow script order, starting at 0.
    pub fn allocate_datacenter_id(&mut self) -> u32 {
        let id = self.next_datacenter_id;
        self.next_datacenter_id += 1;
        id
    }

    pub fn register_datacenter(&mut self, variant: Box<dyn DatacenterVariant>) -> Result<EntityId, TranslationError> {
        let id = self
            .kernel
            .register(DatacenterEntity::new(variant))
            .map_err(TranslationError::Simulation)?;
        self.datacenters.push(id);
        Ok(id)
    }

    pub fn register_broker(&mut self, broker: Broker) -> Result<EntityId, TranslationError> {
        let id = register_broker(self.kernel, broker).map_err(TranslationError::Simulation)?;
        self.brokers.push(id);
        Ok(id)
    }

    pub fn datacenters(&self) -> &[EntityId] {
        &self.datacenters
    }

    pub fn brokers(&self) -> &[EntityId] {
        &self.brokers
    }
}
