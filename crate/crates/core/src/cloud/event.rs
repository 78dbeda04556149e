use std::fmt;

use crate::kernel::{EntityId, SimContext, SimError, Simulation};

use super::{Cloudlet, CloudletScheduler, Vm};

pub mod tags {
    pub const BROKER_START: u16 = 1;
    pub const VM_CREATE: u16 = 2;
    pub const VM_CREATE_ACK: u16 = 3;
    pub const CLOUDLET_SUBMIT: u16 = 4;
    pub const CLOUDLET_RETURN: u16 = 5;
    pub const PROCESSING_UPDATE: u16 = 6;
}

/// Payload exchanged between brokers and datacenters.
pub enum CloudEvent {
    BrokerStart,
    VmCreate {
        vm: Vm,
        scheduler: Box<dyn CloudletScheduler>,
    },
    VmCreateAck {
        vm_id: u32,
        host_id: Option<u32>,
        datacenter_id: u32,
    },
    CloudletSubmit(Cloudlet),
    CloudletReturn(Cloudlet),
    /// Self-event of a datacenter; stale generations are ignored.
    ProcessingUpdate { generation: u64 },
}

impl CloudEvent {
    pub fn tag(&self) -> u16 {
        match self {
            CloudEvent::BrokerStart => tags::BROKER_START,
            CloudEvent::VmCreate { .. } => tags::VM_CREATE,
            CloudEvent::VmCreateAck { .. } => tags::VM_CREATE_ACK,
            CloudEvent::CloudletSubmit(_) => tags::CLOUDLET_SUBMIT,
            CloudEvent::CloudletReturn(_) => tags::CLOUDLET_RETURN,
            CloudEvent::ProcessingUpdate { .. } => tags::PROCESSING_UPDATE,
        }
    }
}

impl fmt::Debug for CloudEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CloudEvent::BrokerStart => f.write_str("BrokerStart"),
            CloudEvent::VmCreate { vm, .. } => f.debug_struct("VmCreate").field("vm", vm).finish_non_exhaustive(),
            CloudEvent::VmCreateAck {
                vm_id,
                host_id,
                datacenter_id,
            } => f
                .debug_struct("VmCreateAck")
                .field("vm_id", vm_id)
                .field("host_id", host_id)
                .field("datacenter_id", datacenter_id)
                .finish(),
            CloudEvent::CloudletSubmit(c) => f.debug_tuple("CloudletSubmit").field(c).finish(),
            CloudEvent::CloudletReturn(c) => f.debug_tuple("CloudletReturn").field(c).finish(),
            CloudEvent::ProcessingUpdate { generation } => {
                f.debug_struct("ProcessingUpdate").field("generation", generation).finish()
            }
        }
    }
}

pub type CloudSimulation = Simulation<CloudEvent>;
pub type CloudContext<'a> = SimContext<'a, CloudEvent>;

/// Schedules `event` with its canonical tag.
pub fn send(ctx: &mut CloudContext<'_>, target: EntityId, delay: f64, event: CloudEvent) -> Result<(), SimError> {
    let tag = event.tag();
    ctx.schedule(target, delay, tag, event)
}
