//! Built-in handlers for the canonical element set.

use crate::cloud::{Broker, Cloudlet, DatacenterCharacteristics, DatacenterCore, Host, Vm, VmRequest};
use crate::schema::{ComponentNode, NodeValue};

use super::{
    initialized, Element, ElementHandler, ExtensionRef, ExtensionRegistrar, TranslationContext, TranslationError,
    ZoneSummary, DEFAULT_ALLOCATION_POLICY, DEFAULT_CLOUDLET_SCHEDULER, DEFAULT_DATACENTER,
};

pub const GLOBAL_NETWORK_HANDLER: &str = "csx.handlers.GlobalNetworkHandler";
pub const ZONE_HANDLER: &str = "csx.handlers.ZoneHandler";
pub const DATACENTER_HANDLER: &str = "csx.handlers.DatacenterHandler";
pub const HOST_HANDLER: &str = "csx.handlers.HostHandler";
pub const BROKER_HANDLER: &str = "csx.handlers.BrokerHandler";
pub const WORKLOAD_HANDLER: &str = "csx.handlers.WorkloadHandler";

pub(super) fn register_default_handlers(r: &mut dyn ExtensionRegistrar) {
    r.element_handler(GLOBAL_NETWORK_HANDLER, Box::new(|_| Ok(Box::<GlobalNetworkHandler>::default())));
    r.element_handler(ZONE_HANDLER, Box::new(|_| Ok(Box::<ZoneHandler>::default())));
    r.element_handler(DATACENTER_HANDLER, Box::new(|_| Ok(Box::<DatacenterHandler>::default())));
    r.element_handler(HOST_HANDLER, Box::new(|_| Ok(Box::<HostHandler>::default())));
    r.element_handler(BROKER_HANDLER, Box::new(|_| Ok(Box::<BrokerHandler>::default())));
    r.element_handler(WORKLOAD_HANDLER, Box::new(|_| Ok(Box::<WorkloadHandler>::default())));
}

fn unsigned<T: TryFrom<i64>>(node: &ComponentNode, field: &str) -> Result<Option<T>, TranslationError> {
    match node.int(field) {
        None => Ok(None),
        Some(v) => T::try_from(v)
            .map(Some)
            .map_err(|_| TranslationError::build(format!("{field} is out of range: {v}"))),
    }
}

fn required<T>(value: Option<T>, field: &str) -> Result<T, TranslationError> {
    value.ok_or_else(|| TranslationError::build(format!("missing {field}")))
}

fn build_err(e: impl std::fmt::Display) -> TranslationError {
    TranslationError::build(e.to_string())
}

fn children<'n>(node: &'n ComponentNode, field: &'static str) -> impl Iterator<Item = (String, &'n ComponentNode)> {
    node.list(field)
        .iter()
        .enumerate()
        .filter_map(move |(i, v)| v.as_node().map(|n| (format!("{field}/{i}"), n)))
}

fn unexpected(expected: &str, got: &Element) -> TranslationError {
    TranslationError::build(format!("expected a {expected} element, handler produced {}", got.kind()))
}

macro_rules! schema_handler {
    ($name:ident, $schema:literal) => {
        #[derive(Debug, Default)]
        pub struct $name {
            node: Option<ComponentNode>,
        }

        impl $name {
            pub const SCHEMA: &'static str = $schema;
        }
    };
}

schema_handler!(GlobalNetworkHandler, "GlobalDatacenterNetwork");
schema_handler!(ZoneHandler, "Zone");
schema_handler!(DatacenterHandler, "Datacenter");
schema_handler!(HostHandler, "Host");
schema_handler!(BrokerHandler, "Broker");
schema_handler!(WorkloadHandler, "Workload");

impl ElementHandler for GlobalNetworkHandler {
    fn can_handle(&self, schema_name: &str) -> bool {
        schema_name == Self::SCHEMA
    }

    fn init(&mut self, node: ComponentNode) {
        self.node = Some(node);
    }

    fn handle(&mut self, ctx: &mut TranslationContext<'_>) -> Result<Element, TranslationError> {
        let node = initialized(&self.node)?;
        let mut zones = Vec::new();
        for (segment, zone) in children(node, "zones") {
            match ctx.handle_child(zone, &segment)? {
                Element::Zone(z) => zones.push(z),
                other => return Err(unexpected("zone", &other)),
            }
        }
        Ok(Element::Network(zones))
    }
}

impl ElementHandler for ZoneHandler {
    fn can_handle(&self, schema_name: &str) -> bool {
        schema_name == Self::SCHEMA
    }

    fn init(&mut self, node: ComponentNode) {
        self.node = Some(node);
    }

    fn handle(&mut self, ctx: &mut TranslationContext<'_>) -> Result<Element, TranslationError> {
        let node = initialized(&self.node)?;
        let name = required(node.str("name"), "name")?.to_string();
        let dc_node = required(node.node("datacenter"), "datacenter")?;
        let (datacenter, datacenter_id) = match ctx.handle_child(dc_node, "datacenter")? {
            Element::Datacenter { entity, datacenter_id } => (entity, datacenter_id),
            other => return Err(unexpected("datacenter", &other)),
        };

        let workload = match node.node("workload") {
            Some(w) => match ctx.handle_child(w, "workload")? {
                Element::Workload { vms, cloudlets } => Some((vms, cloudlets)),
                other => return Err(unexpected("workload", &other)),
            },
            None => None,
        };
        let broker = match node.node("broker") {
            Some(b) => match ctx.handle_child(b, "broker")? {
                Element::Broker(broker) => Some(broker),
                other => return Err(unexpected("broker", &other)),
            },
            None => workload.as_ref().map(|_| Broker::new(format!("{name}-broker"))),
        };

        let broker = match broker {
            Some(mut broker) => {
                broker.bind_datacenter(datacenter, datacenter_id);
                if let Some((vms, cloudlets)) = workload {
                    broker
                        .submit_workload(vms, cloudlets)
                        .map_err(|e| build_err(e).at(&format!("{}/workload", ctx.path())))?;
                }
                Some(ctx.register_broker(broker)?)
            }
            None => None,
        };
        Ok(Element::Zone(ZoneSummary {
            name,
            datacenter,
            datacenter_id,
            broker,
        }))
    }
}

fn characteristics(node: Option<&ComponentNode>) -> DatacenterCharacteristics {
    let mut c = DatacenterCharacteristics::default();
    let Some(node) = node else { return c };
    if let Some(v) = node.str("arch") {
        c.arch = v.to_string();
    }
    if let Some(v) = node.str("os") {
        c.os = v.to_string();
    }
    if let Some(v) = node.str("vmm") {
        c.vmm = v.to_string();
    }
    let numbers = [
        ("timezone", &mut c.timezone),
        ("costPerSec", &mut c.cost_per_sec),
        ("costPerMem", &mut c.cost_per_mem),
        ("costPerStorage", &mut c.cost_per_storage),
        ("costPerBw", &mut c.cost_per_bw),
    ];
    for (field, slot) in numbers {
        if let Some(v) = node.number(field) {
            *slot = v;
        }
    }
    c
}

fn extension_or(node: &ComponentNode, field: &str, default: &str) -> Result<ExtensionRef, TranslationError> {
    match node.node(field) {
        Some(ext) => ExtensionRef::from_node(ext),
        None => Ok(ExtensionRef::new(default)),
    }
}

impl ElementHandler for DatacenterHandler {
    fn can_handle(&self, schema_name: &str) -> bool {
        schema_name == Self::SCHEMA
    }

    fn init(&mut self, node: ComponentNode) {
        self.node = Some(node);
    }

    fn handle(&mut self, ctx: &mut TranslationContext<'_>) -> Result<Element, TranslationError> {
        let node = initialized(&self.node)?;
        let mut hosts = Vec::new();
        for (segment, host) in children(node, "hosts") {
            match ctx.handle_child(host, &segment)? {
                Element::Hosts(h) => hosts.extend(h),
                other => return Err(unexpected("hosts", &other)),
            }
        }
        let here = ctx.path();
        let policy = extension_or(node, "vmAllocationPolicy", DEFAULT_ALLOCATION_POLICY)
            .and_then(|ext| ctx.catalog.materialize_policy(&ext, vec![]))
            .map_err(|e| e.at(&format!("{here}/vmAllocationPolicy")))?;
        let id = ctx.allocate_datacenter_id();
        let core = DatacenterCore::new(
            id,
            format!("datacenter-{id}"),
            characteristics(node.node("characteristics")),
            hosts,
            policy,
            node.number("schedulingInterval").unwrap_or(0.0),
            node.str("storage").unwrap_or(""),
        )
        .map_err(build_err)?;
        let variant = extension_or(node, "variant", DEFAULT_DATACENTER)
            .and_then(|ext| ctx.catalog.materialize_datacenter(&ext, core, vec![]))
            .map_err(|e| e.at(&format!("{here}/variant")))?;
        let entity = ctx.register_datacenter(variant)?;
        Ok(Element::Datacenter {
            entity,
            datacenter_id: id,
        })
    }
}

impl ElementHandler for HostHandler {
    fn can_handle(&self, schema_name: &str) -> bool {
        schema_name == Self::SCHEMA
    }

    fn init(&mut self, node: ComponentNode) {
        self.node = Some(node);
    }

    /// `copies: n` yields hosts `id, id+1, ..., id+n-1`.
    fn handle(&mut self, _ctx: &mut TranslationContext<'_>) -> Result<Element, TranslationError> {
        let node = initialized(&self.node)?;
        let base: u32 = required(unsigned(node, "id")?, "id")?;
        let pes: u32 = required(unsigned(node, "pes")?, "pes")?;
        let mips = required(node.number("mips"), "mips")?;
        let ram: u64 = required(unsigned(node, "ramMb")?, "ramMb")?;
        let bw: u64 = required(unsigned(node, "bwMbps")?, "bwMbps")?;
        let storage: u64 = required(unsigned(node, "storageMb")?, "storageMb")?;
        let copies: u32 = unsigned(node, "copies")?.unwrap_or(1);
        if copies == 0 {
            return Err(TranslationError::build("copies must be at least 1"));
        }
        if pes == 0 {
            return Err(TranslationError::build("pes must be at least 1"));
        }
        let last = base
            .checked_add(copies - 1)
            .ok_or_else(|| TranslationError::build("host ids overflow"))?;
        let hosts = (base..=last)
            .map(|id| Host::with_uniform_pes(id, pes, mips, ram, bw, storage))
            .collect::<Result<Vec<_>, _>>()
            .map_err(build_err)?;
        Ok(Element::Hosts(hosts))
    }
}

impl ElementHandler for BrokerHandler {
    fn can_handle(&self, schema_name: &str) -> bool {
        schema_name == Self::SCHEMA
    }

    fn init(&mut self, node: ComponentNode) {
        self.node = Some(node);
    }

    fn handle(&mut self, _ctx: &mut TranslationContext<'_>) -> Result<Element, TranslationError> {
        let node = initialized(&self.node)?;
        Ok(Element::Broker(Broker::new(required(node.str("name"), "name")?)))
    }
}

impl ElementHandler for WorkloadHandler {
    fn can_handle(&self, schema_name: &str) -> bool {
        schema_name == Self::SCHEMA
    }

    fn init(&mut self, node: ComponentNode) {
        self.node = Some(node);
    }

    fn handle(&mut self, ctx: &mut TranslationContext<'_>) -> Result<Element, TranslationError> {
        let node = initialized(&self.node)?;
        let base = ctx.path();
        let mut vms = Vec::new();
        for (i, item) in node.list("vms").iter().enumerate() {
            let path = format!("{base}/vms/{i}");
            vms.push(vm_request(item, ctx, &path).map_err(|e| e.at(&path))?);
        }
        let mut cloudlets = Vec::new();
        for (i, item) in node.list("cloudlets").iter().enumerate() {
            cloudlets.push(cloudlet(item).map_err(|e| e.at(&format!("{base}/cloudlets/{i}")))?);
        }
        Ok(Element::Workload { vms, cloudlets })
    }
}

fn spec(value: &NodeValue) -> Result<&ComponentNode, TranslationError> {
    value
        .as_node()
        .ok_or_else(|| TranslationError::build("expected an object"))
}

fn vm_request(value: &NodeValue, ctx: &TranslationContext<'_>, path: &str) -> Result<VmRequest, TranslationError> {
    let node = spec(value)?;
    let vm = Vm::new(
        required(unsigned(node, "id")?, "id")?,
        required(node.number("mips"), "mips")?,
        required(unsigned(node, "pes")?, "pes")?,
        required(unsigned(node, "ramMb")?, "ramMb")?,
        required(unsigned(node, "bwMbps")?, "bwMbps")?,
        required(unsigned(node, "sizeMb")?, "sizeMb")?,
    )
    .map_err(build_err)?;
    let scheduler = extension_or(node, "cloudletScheduler", DEFAULT_CLOUDLET_SCHEDULER)
        .and_then(|ext| ctx.catalog.materialize_scheduler(&ext, vec![]))
        .map_err(|e| e.at(&format!("{path}/cloudletScheduler")))?;
    Ok(VmRequest { vm, scheduler })
}

fn cloudlet(value: &NodeValue) -> Result<Cloudlet, TranslationError> {
    let node = spec(value)?;
    Cloudlet::new(
        required(unsigned(node, "id")?, "id")?,
        required(node.number("lengthMi"), "lengthMi")?,
        required(unsigned(node, "pes")?, "pes")?,
        required(unsigned(node, "vmId")?, "vmId")?,
    )
    .map_err(build_err)
}
