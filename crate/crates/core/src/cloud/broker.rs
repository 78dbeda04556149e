use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::kernel::{Entity, EntityId, Event, SimError, SimTime};

use super::{send, tags, Cloudlet, CloudContext, CloudEvent, CloudSimulation, CloudletScheduler, CloudletStatus, Vm};

/// A VM the broker will ask its datacenter to create.
pub struct VmRequest {
    pub vm: Vm,
    pub scheduler: Box<dyn CloudletScheduler>,
}

/// Outcome of one cloudlet, as reported at the end of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CloudletRecord {
    pub cloudlet_id: u32,
    pub status: CloudletStatus,
    pub datacenter_id: u32,
    pub vm_id: u32,
    pub start_time: Option<f64>,
    pub finish_time: Option<f64>,
}

impl CloudletRecord {
    pub fn exec_time(&self) -> Option<f64> {
        match (self.start_time, self.finish_time) {
            (Some(s), Some(f)) => Some(f - s),
            _ => None,
        }
    }

    fn from_cloudlet(c: &Cloudlet, datacenter_id: u32) -> Self {
        Self {
            cloudlet_id: c.id,
            status: c.status,
            datacenter_id,
            vm_id: c.vm_id,
            start_time: c.start_time.map(SimTime::secs),
            finish_time: c.finish_time.map(SimTime::secs),
        }
    }
}

/// Where a VM ended up; `host_id` is `None` when allocation failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VmPlacement {
    pub datacenter_id: u32,
    pub vm_id: u32,
    pub host_id: Option<u32>,
}

/// Acts on behalf of a user: creates VMs in one datacenter at t=0, submits
/// each VM's cloudlets once the VM is placed, and collects the results.
pub struct Broker {
    name: String,
    datacenter: Option<(EntityId, u32)>,
    vms: Vec<VmRequest>,
    waiting: BTreeMap<u32, Vec<Cloudlet>>,
    expected: usize,
    records: Vec<CloudletRecord>,
    placements: Vec<VmPlacement>,
}

impl Broker {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            datacenter: None,
            vms: Vec::new(),
            waiting: BTreeMap::new(),
            expected: 0,
            records: Vec::new(),
            placements: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Targets the datacenter entity `entity`, whose report id is `datacenter_id`.
    pub fn bind_datacenter(&mut self, entity: EntityId, datacenter_id: u32) {
        self.datacenter = Some((entity, datacenter_id));
    }

    /// Adds VMs and cloudlets. Every cloudlet must name a VM of this broker.
    pub fn submit_workload(&mut self, vms: Vec<VmRequest>, cloudlets: Vec<Cloudlet>) -> Result<(), SimError> {
        let mut vm_ids: BTreeSet<u32> = self.vms.iter().map(|r| r.vm.id).collect();
        for req in &vms {
            if !vm_ids.insert(req.vm.id) {
                return Err(SimError::Configuration(format!("duplicate vm id {}", req.vm.id)));
            }
        }
        let mut cloudlet_ids: BTreeSet<u32> = self.waiting.values().flatten().map(|c| c.id).collect();
        for c in &cloudlets {
            if !vm_ids.contains(&c.vm_id) {
                return Err(SimError::Configuration(format!(
                    "cloudlet {} references unknown vm {}",
                    c.id, c.vm_id
                )));
            }
            if !cloudlet_ids.insert(c.id) {
                return Err(SimError::Configuration(format!("duplicate cloudlet id {}", c.id)));
            }
        }
        self.vms.extend(vms);
        self.expected += cloudlets.len();
        for c in cloudlets {
            self.waiting.entry(c.vm_id).or_default().push(c);
        }
        Ok(())
    }

    pub fn records(&self) -> &[CloudletRecord] {
        &self.records
    }

    pub fn placements(&self) -> &[VmPlacement] {
        &self.placements
    }

    /// True once every submitted cloudlet has either finished or failed.
    pub fn is_done(&self) -> bool {
        self.records.len() == self.expected
    }

    fn start(&mut self, ctx: &mut CloudContext<'_>) -> Result<(), SimError> {
        if self.vms.is_empty() {
            return Ok(());
        }
        let Some((dc, _)) = self.datacenter else {
            return Err(SimError::Configuration(format!(
                "broker '{}' has VMs but no datacenter",
                self.name
            )));
        };
        for VmRequest { vm, scheduler } in self.vms.drain(..) {
            send(ctx, dc, 0.0, CloudEvent::VmCreate { vm, scheduler })?;
        }
        Ok(())
    }

    fn on_vm_created(
        &mut self,
        ctx: &mut CloudContext<'_>,
        vm_id: u32,
        host_id: Option<u32>,
        datacenter_id: u32,
    ) -> Result<(), SimError> {
        self.placements.push(VmPlacement {
            datacenter_id,
            vm_id,
            host_id,
        });
        let cloudlets = self.waiting.remove(&vm_id).unwrap_or_default();
        match host_id {
            Some(_) => {
                let (dc, _) = self
                    .datacenter
                    .ok_or_else(|| SimError::Protocol("ack received without a datacenter".into()))?;
                for c in cloudlets {
                    send(ctx, dc, 0.0, CloudEvent::CloudletSubmit(c))?;
                }
            }
            None => {
                for mut c in cloudlets {
                    c.status = CloudletStatus::Failed;
                    self.records.push(CloudletRecord::from_cloudlet(&c, datacenter_id));
                }
            }
        }
        Ok(())
    }
}

impl Entity<CloudEvent> for Broker {
    fn process(&mut self, event: Event<CloudEvent>, ctx: &mut CloudContext<'_>) -> Result<(), SimError> {
        match event.payload {
            CloudEvent::BrokerStart => self.start(ctx),
            CloudEvent::VmCreateAck {
                vm_id,
                host_id,
                datacenter_id,
            } => self.on_vm_created(ctx, vm_id, host_id, datacenter_id),
            CloudEvent::CloudletReturn(c) => {
                let dc = self.datacenter.map_or(0, |(_, id)| id);
                self.records.push(CloudletRecord::from_cloudlet(&c, dc));
                Ok(())
            }
            other => Err(SimError::Protocol(format!("broker '{}' cannot handle {other:?}", self.name))),
        }
    }
}

/// Registers `broker` and schedules its start at t=0.
pub fn register_broker(sim: &mut CloudSimulation, broker: Broker) -> Result<EntityId, SimError> {
    let id = sim.register(broker)?;
    sim.schedule(id, id, 0.0, tags::BROKER_START, CloudEvent::BrokerStart)?;
    Ok(id)
}
