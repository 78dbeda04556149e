//! Name-keyed factories for every replaceable piece of a simulation:
//! allocation policies, datacenter variants, cloudlet schedulers and element
//! handlers. The catalog is filled once at startup from the built-in
//! registrations and from extension libraries, and is read-only afterwards.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::cloud::{
    CloudletScheduler, DatacenterCore, DatacenterVariant, SimpleDatacenter, TimeSharedScheduler, VmAllocationPolicy,
    VmAllocationPolicySimple,
};
use crate::schema::{ComponentNode, NodeValue};

use super::handlers;
use super::{ElementHandler, TranslationError};

pub const DEFAULT_DATACENTER: &str = "org.cloudbus.cloudsim.Datacenter";
pub const DEFAULT_ALLOCATION_POLICY: &str = "org.cloudbus.cloudsim.VmAllocationPolicySimple";
pub const DEFAULT_CLOUDLET_SCHEDULER: &str = "org.cloudbus.cloudsim.CloudletSchedulerTimeShared";

/// A `variant`-style reference from a script: which implementation to build
/// and the free-form properties handed to its factory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionRef {
    pub class_name: String,
    pub properties: BTreeMap<String, String>,
}

impl ExtensionRef {
    pub fn new(class_name: impl Into<String>) -> Self {
        Self {
            class_name: class_name.into(),
            properties: BTreeMap::new(),
        }
    }

    /// Reads an `Extension` component (`className` plus optional
    /// `extensionProperties`).
    pub fn from_node(node: &ComponentNode) -> Result<Self, TranslationError> {
        let class_name = node
            .str("className")
            .filter(|s| !s.is_empty())
            .ok_or_else(|| TranslationError::build("className must be a non-empty string"))?;
        let mut properties = BTreeMap::new();
        if let Some(map) = node.map("extensionProperties") {
            for (k, v) in map {
                let value = match v {
                    NodeValue::Str(s) => s.clone(),
                    NodeValue::Int(i) => i.to_string(),
                    NodeValue::Float(f) => f.to_string(),
                    NodeValue::Bool(b) => b.to_string(),
                    _ => return Err(TranslationError::build(format!("extension property '{k}' must be a scalar"))),
                };
                properties.insert(k.clone(), value);
            }
        }
        Ok(Self {
            class_name: class_name.to_string(),
            properties,
        })
    }
}

/// One positional constructor argument.
#[derive(Debug, Clone, PartialEq)]
pub enum ArgValue {
    Str(String),
    Int(i64),
    Float(f64),
    Bool(bool),
}

/// What a factory receives: positional arguments chosen by the calling
/// handler, plus the script's `extensionProperties`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExtensionArgs {
    pub args: Vec<ArgValue>,
    pub properties: BTreeMap<String, String>,
}

impl ExtensionArgs {
    pub fn property(&self, key: &str) -> Option<&str> {
        self.properties.get(key).map(String::as_str)
    }

    pub fn arg(&self, index: usize) -> Option<&ArgValue> {
        self.args.get(index)
    }
}

pub type PolicyFactory = dyn Fn(&ExtensionArgs) -> Result<Box<dyn VmAllocationPolicy>, String> + Send + Sync;
pub type DatacenterFactory =
    dyn Fn(DatacenterCore, &ExtensionArgs) -> Result<Box<dyn DatacenterVariant>, String> + Send + Sync;
pub type SchedulerFactory = dyn Fn(&ExtensionArgs) -> Result<Box<dyn CloudletScheduler>, String> + Send + Sync;
pub type HandlerFactory = dyn Fn(&ExtensionArgs) -> Result<Box<dyn ElementHandler>, String> + Send + Sync;

/// Interface through which extension code contributes factories.
pub trait ExtensionRegistrar {
    fn allocation_policy(&mut self, class_name: &str, factory: Box<PolicyFactory>);
    fn datacenter(&mut self, class_name: &str, factory: Box<DatacenterFactory>);
    fn cloudlet_scheduler(&mut self, class_name: &str, factory: Box<SchedulerFactory>);
    fn element_handler(&mut self, class_name: &str, factory: Box<HandlerFactory>);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    BuiltIn,
    Extension,
}

#[derive(Default)]
struct Tables {
    policies: BTreeMap<String, Arc<PolicyFactory>>,
    datacenters: BTreeMap<String, Arc<DatacenterFactory>>,
    schedulers: BTreeMap<String, Arc<SchedulerFactory>>,
    handlers: BTreeMap<String, (Arc<HandlerFactory>, Origin)>,
    /// Handler class names in registration order.
    handler_order: Vec<String>,
}

/// Collects registrations before the catalog is frozen.
pub struct CatalogBuilder {
    tables: Tables,
    origin: Origin,
    duplicates: Vec<String>,
    libraries: Vec<PathBuf>,
}

impl Default for CatalogBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl CatalogBuilder {
    /// An empty builder; see [`CatalogBuilder::with_builtins`].
    pub fn new() -> Self {
        Self {
            tables: Tables::default(),
            origin: Origin::Extension,
            duplicates: Vec::new(),
            libraries: Vec::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut builder = Self::new();
        builder.origin = Origin::BuiltIn;
        register_builtins(&mut builder);
        builder.origin = Origin::Extension;
        builder
    }

    /// Runs a statically linked registration function as an extension.
    pub fn register_with(&mut self, register: impl FnOnce(&mut dyn ExtensionRegistrar)) -> &mut Self {
        register(self);
        self
    }

    /// Loads every extension library found directly in `dir`.
    pub fn load_dir(&mut self, dir: &Path) -> Result<&mut Self, TranslationError> {
        let loaded = super::plugin::load_dir(dir, self)?;
        self.libraries.extend(loaded);
        Ok(self)
    }

    fn note(&mut self, kind: &str, name: &str, exists: bool) -> bool {
        if exists {
            self.duplicates.push(format!("{kind} '{name}'"));
        }
        !exists
    }

    pub fn build(self) -> Result<Catalog, TranslationError> {
        if !self.duplicates.is_empty() {
            return Err(TranslationError::ExtensionLoad {
                path: String::new(),
                message: format!("duplicate registrations: {}", self.duplicates.join(", ")),
            });
        }
        Ok(Catalog {
            tables: self.tables,
            libraries: self.libraries,
        })
    }
}

impl ExtensionRegistrar for CatalogBuilder {
    fn allocation_policy(&mut self, class_name: &str, factory: Box<PolicyFactory>) {
        let exists = self.tables.policies.contains_key(class_name);
        if self.note("allocation policy", class_name, exists) {
            self.tables.policies.insert(class_name.to_string(), Arc::from(factory));
        }
    }

    fn datacenter(&mut self, class_name: &str, factory: Box<DatacenterFactory>) {
        let exists = self.tables.datacenters.contains_key(class_name);
        if self.note("datacenter", class_name, exists) {
            self.tables.datacenters.insert(class_name.to_string(), Arc::from(factory));
        }
    }

    fn cloudlet_scheduler(&mut self, class_name: &str, factory: Box<SchedulerFactory>) {
        let exists = self.tables.schedulers.contains_key(class_name);
        if self.note("cloudlet scheduler", class_name, exists) {
            self.tables.schedulers.insert(class_name.to_string(), Arc::from(factory));
        }
    }

    fn element_handler(&mut self, class_name: &str, factory: Box<HandlerFactory>) {
        let exists = self.tables.handlers.contains_key(class_name);
        if self.note("element handler", class_name, exists) {
            self.tables
                .handlers
                .insert(class_name.to_string(), (Arc::from(factory), self.origin));
            self.tables.handler_order.push(class_name.to_string());
        }
    }
}

fn register_builtins(r: &mut dyn ExtensionRegistrar) {
    r.allocation_policy(
        DEFAULT_ALLOCATION_POLICY,
        Box::new(|_| Ok(Box::new(VmAllocationPolicySimple))),
    );
    r.datacenter(
        DEFAULT_DATACENTER,
        Box::new(|core, _| Ok(Box::new(SimpleDatacenter::new(core)))),
    );
    r.cloudlet_scheduler(
        DEFAULT_CLOUDLET_SCHEDULER,
        Box::new(|_| Ok(Box::new(TimeSharedScheduler::new()))),
    );
    handlers::register_default_handlers(r);
}

/// The frozen, shareable set of factories.
pub struct Catalog {
    tables: Tables,
    libraries: Vec<PathBuf>,
}

fn unknown(kind: &'static str, class_name: &str, known: impl Iterator<Item = String>) -> TranslationError {
    TranslationError::UnknownExtension {
        kind,
        class_name: class_name.to_string(),
        known: known.collect(),
    }
}

fn construction(class_name: &str, message: String) -> TranslationError {
    TranslationError::Construction {
        class_name: class_name.to_string(),
        message,
    }
}

fn args_for(ext: &ExtensionRef, args: Vec<ArgValue>) -> ExtensionArgs {
    ExtensionArgs {
        args,
        properties: ext.properties.clone(),
    }
}

impl Catalog {
    /// Built-in registrations only.
    pub fn builtin() -> Self {
        CatalogBuilder::with_builtins()
            .build()
            .expect("built-in registrations are unique")
    }

    /// Paths of the extension libraries that were loaded.
    pub fn libraries(&self) -> &[PathBuf] {
        &self.libraries
    }

    pub fn policy_names(&self) -> impl Iterator<Item = &str> {
        self.tables.policies.keys().map(String::as_str)
    }

    pub fn datacenter_names(&self) -> impl Iterator<Item = &str> {
        self.tables.datacenters.keys().map(String::as_str)
    }

    pub fn scheduler_names(&self) -> impl Iterator<Item = &str> {
        self.tables.schedulers.keys().map(String::as_str)
    }

    /// Handler class names: extension handlers first, then built-ins, each
    /// group in registration order.
    pub fn handler_names(&self) -> Vec<String> {
        let origin = |name: &String| self.tables.handlers[name].1;
        let mut names: Vec<String> = self
            .tables
            .handler_order
            .iter()
            .filter(|n| origin(n) == Origin::Extension)
            .cloned()
            .collect();
        names.extend(
            self.tables
                .handler_order
                .iter()
                .filter(|n| origin(n) == Origin::BuiltIn)
                .cloned(),
        );
        names
    }

    pub fn has_handler(&self, class_name: &str) -> bool {
        self.tables.handlers.contains_key(class_name)
    }

    pub fn materialize_policy(
        &self,
        ext: &ExtensionRef,
        args: Vec<ArgValue>,
    ) -> Result<Box<dyn VmAllocationPolicy>, TranslationError> {
        let factory = self.tables.policies.get(&ext.class_name).ok_or_else(|| {
            unknown("allocation policy", &ext.class_name, self.policy_names().map(str::to_string))
        })?;
        factory(&args_for(ext, args)).map_err(|m| construction(&ext.class_name, m))
    }

    pub fn materialize_datacenter(
        &self,
        ext: &ExtensionRef,
        core: DatacenterCore,
        args: Vec<ArgValue>,
    ) -> Result<Box<dyn DatacenterVariant>, TranslationError> {
        let factory = self
            .tables
            .datacenters
            .get(&ext.class_name)
            .ok_or_else(|| unknown("datacenter", &ext.class_name, self.datacenter_names().map(str::to_string)))?;
        factory(core, &args_for(ext, args)).map_err(|m| construction(&ext.class_name, m))
    }

    pub fn materialize_scheduler(
        &self,
        ext: &ExtensionRef,
        args: Vec<ArgValue>,
    ) -> Result<Box<dyn CloudletScheduler>, TranslationError> {
        let factory = self.tables.schedulers.get(&ext.class_name).ok_or_else(|| {
            unknown("cloudlet scheduler", &ext.class_name, self.scheduler_names().map(str::to_string))
        })?;
        factory(&args_for(ext, args)).map_err(|m| construction(&ext.class_name, m))
    }

    pub fn materialize_handler(
        &self,
        ext: &ExtensionRef,
        args: Vec<ArgValue>,
    ) -> Result<Box<dyn ElementHandler>, TranslationError> {
        let (factory, _) = self
            .tables
            .handlers
            .get(&ext.class_name)
            .ok_or_else(|| unknown("element handler", &ext.class_name, self.handler_names().into_iter()))?;
        factory(&args_for(ext, args)).map_err(|m| construction(&ext.class_name, m))
    }
}
