use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use crate::cloud::{Broker, CloudSimulation, DatacenterEntity};
use crate::kernel::EntityId;
use crate::report::{SampleRecord, SimulationReport};
use crate::schema::{
    load_schema, parse_component_at, parse_document, DocValue, IssueCode, SchemaDocument, ValidationIssue,
    YamlErrorKind,
};

use super::{Catalog, Element, ElementHandler, HandlerRegistry, TranslationContext, TranslationError, ZoneSummary};

/// Top-level key of every script. Other top-level keys may hold anchored
/// templates and are not validated on their own.
pub const ROOT_ELEMENT: &str = "GlobalDatacenterNetwork";

/// Parses and validates `script`, then returns the initialized handler for
/// its root element.
pub fn environment_resolver_parse(
    script: &str,
    schema: &SchemaDocument,
    registry: &HandlerRegistry,
    catalog: &Catalog,
) -> Result<Box<dyn ElementHandler>, TranslationError> {
    let doc = parse_document(script).map_err(|e| match e.kind {
        YamlErrorKind::UnknownAnchor => TranslationError::Validation(vec![ValidationIssue::new(
            e.path.clone(),
            IssueCode::BadAnchor,
            format!("{} (line {})", e.message, e.line),
        )]),
        _ => TranslationError::Syntax(e),
    })?;
    let root_path = format!("/{ROOT_ELEMENT}");
    let value = match &doc {
        DocValue::Map(m) => m.get(ROOT_ELEMENT),
        other => {
            return Err(TranslationError::Validation(vec![ValidationIssue::new(
                "",
                IssueCode::TypeMismatch,
                format!("expected a mapping at the document root, found {}", other.type_name()),
            )]))
        }
    };
    let value = match value {
        Some(v) if !matches!(v, DocValue::Null) => v,
        _ => {
            return Err(TranslationError::Validation(vec![ValidationIssue::new(
                root_path,
                IssueCode::MissingRequired,
                format!("script requires '{ROOT_ELEMENT}'"),
            )]))
        }
    };
    let node = parse_component_at(value, ROOT_ELEMENT, schema, &root_path).map_err(TranslationError::Validation)?;
    let mut handler = registry.resolve(&node.schema_name, catalog).map_err(|e| e.at(&root_path))?;
    handler.init(node);
    Ok(handler)
}

/// A fully built simulation, ready to run.
pub struct Scenario {
    kernel: CloudSimulation,
    zones: Vec<ZoneSummary>,
    datacenters: Vec<EntityId>,
    brokers: Vec<EntityId>,
}

impl Scenario {
    /// Runs the root handler, which builds the whole element tree.
    pub fn build(
        mut root: Box<dyn ElementHandler>,
        catalog: &Catalog,
        schema: &SchemaDocument,
        registry: &HandlerRegistry,
    ) -> Result<Self, TranslationError> {
        let mut kernel = CloudSimulation::new();
        let root_path = format!("/{ROOT_ELEMENT}");
        let mut ctx = TranslationContext::new(&mut kernel, catalog, schema, registry, &root_path);
        let zones = match root.handle(&mut ctx).map_err(|e| e.at(&root_path))? {
            Element::Network(zones) => zones,
            other => {
                return Err(TranslationError::build(format!(
                    "root handler produced a {} element",
                    other.kind()
                ))
                .at(&root_path))
            }
        };
        let datacenters = ctx.datacenters().to_vec();
        let brokers = ctx.brokers().to_vec();
        Ok(Self {
            kernel,
            zones,
            datacenters,
            brokers,
        })
    }

    pub fn zones(&self) -> &[ZoneSummary] {
        &self.zones
    }

    pub fn kernel(&self) -> &CloudSimulation {
        &self.kernel
    }

    pub fn kernel_mut(&mut self) -> &mut CloudSimulation {
        &mut self.kernel
    }

    /// Runs to completion and collects per-cloudlet results.
    pub fn run(mut self) -> Result<SimulationReport, TranslationError> {
        self.kernel.run().map_err(TranslationError::Simulation)?;
        Ok(self.collect())
    }

    fn collect(&self) -> SimulationReport {
        let mut report = SimulationReport {
            final_clock: self.kernel.clock().secs(),
            ..SimulationReport::default()
        };
        for &id in &self.brokers {
            if let Some(broker) = self.kernel.entity::<Broker>(id) {
                report.cloudlets.extend_from_slice(broker.records());
                report.placements.extend_from_slice(broker.placements());
            }
        }
        for &id in &self.datacenters {
            if let Some(dc) = self.kernel.entity::<DatacenterEntity>(id) {
                let datacenter_id = dc.core().id();
                report.datacenter_updates.push((datacenter_id, dc.core().update_count()));
                report.samples.extend(dc.variant().monitor_samples().into_iter().map(|s| SampleRecord {
                    datacenter_id,
                    time: s.time,
                    vm_id: s.vm_id,
                    running_cloudlets: s.running_cloudlets,
                }));
            }
        }
        report.normalize();
        report
    }
}

/// Owns the schema, the extension catalog and the handler registry, and
/// drives scripts from text to report.
pub struct SimulationManager {
    schema: SchemaDocument,
    catalog: Catalog,
    registry: HandlerRegistry,
}

impl SimulationManager {
    pub fn new(
        schema: SchemaDocument,
        catalog: Catalog,
        handler_overrides: BTreeMap<String, String>,
    ) -> Result<Self, TranslationError> {
        let registry = HandlerRegistry::new(&catalog, handler_overrides)?;
        Ok(Self {
            schema,
            catalog,
            registry,
        })
    }

    /// The bundled schema and the built-in extensions.
    pub fn with_defaults() -> Self {
        let schema = load_schema(crate::assets::DEFAULT_SCHEMA).expect("bundled schema is valid");
        Self::new(schema, Catalog::builtin(), BTreeMap::new()).expect("built-in handlers exist")
    }

    pub fn schema(&self) -> &SchemaDocument {
        &self.schema
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn resolve(&self, script: &str) -> Result<Box<dyn ElementHandler>, TranslationError> {
        environment_resolver_parse(script, &self.schema, &self.registry, &self.catalog)
    }

    pub fn build(&self, script: &str) -> Result<Scenario, TranslationError> {
        let root = self.resolve(script)?;
        Scenario::build(root, &self.catalog, &self.schema, &self.registry)
    }

    /// Translates and runs `script`. `overhead_ms` covers everything before
    /// the kernel starts.
    pub fn run_script(&self, script: &str) -> Result<SimulationReport, TranslationError> {
        self.run_timed(Instant::now(), script)
    }

    /// Like [`SimulationManager::run_script`]; the overhead includes reading
    /// the file.
    pub fn run_file(&self, path: &Path) -> Result<SimulationReport, TranslationError> {
        let started = Instant::now();
        let script = std::fs::read_to_string(path)
            .map_err(|e| TranslationError::Startup(format!("cannot read script {}: {e}", path.display())))?;
        self.run_timed(started, &script)
    }

    fn run_timed(&self, started: Instant, script: &str) -> Result<SimulationReport, TranslationError> {
        let scenario = self.build(script)?;
        let overhead_ms = started.elapsed().as_millis() as u64;
        let mut report = scenario.run()?;
        report.overhead_ms = overhead_ms;
        Ok(report)
    }
}
