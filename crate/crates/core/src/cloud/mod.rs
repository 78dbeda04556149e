//! Simulated cloud entities: hosts and their processing elements, VMs,
//! cloudlets, the datacenter and broker entities, and the two policy extension
//! points ([`VmAllocationPolicy`] and [`CloudletScheduler`]).
//!
//! Units are fixed throughout: MI for cloudlet length, MIPS for processing
//! rates, seconds for time, MB for memory and storage, Mbps for bandwidth.

mod allocation;
mod broker;
mod cloudlet;
mod datacenter;
mod event;
mod resources;
mod scheduler;

pub use allocation::{worst_fit_allocate, VmAllocationPolicy, VmAllocationPolicySimple};
pub use broker::{register_broker, Broker, CloudletRecord, VmPlacement, VmRequest};
pub use cloudlet::{Cloudlet, CloudletStatus};
pub use datacenter::{
    DatacenterCharacteristics, DatacenterCore, DatacenterEntity, DatacenterVariant, MonitorSample,
    SimpleDatacenter, VmSlot,
};
pub use event::{send, tags, CloudContext, CloudEvent, CloudSimulation};
pub use resources::{Host, Pe, Reservation, Vm};
pub use scheduler::{CloudletScheduler, TimeSharedScheduler};
