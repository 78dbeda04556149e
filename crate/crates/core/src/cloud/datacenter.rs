use std::collections::BTreeMap;

use serde::Serialize;

use crate::kernel::{Entity, EntityId, Event, SimError, SimTime};

use super::{
    send, tags, Cloudlet, CloudContext, CloudEvent, CloudletScheduler, Host, Vm, VmAllocationPolicy,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatacenterCharacteristics {
    pub arch: String,
    pub os: String,
    pub vmm: String,
    /// Hours offset from UTC.
    pub timezone: f64,
    pub cost_per_sec: f64,
    pub cost_per_mem: f64,
    pub cost_per_storage: f64,
    pub cost_per_bw: f64,
}

impl Default for DatacenterCharacteristics {
    fn default() -> Self {
        Self {
            arch: "x86".into(),
            os: "Linux".into(),
            vmm: "Xen".into(),
            timezone: 0.0,
            cost_per_sec: 0.0,
            cost_per_mem: 0.0,
            cost_per_storage: 0.0,
            cost_per_bw: 0.0,
        }
    }
}

impl DatacenterCharacteristics {
    pub fn validate(&self) -> Result<(), SimError> {
        let costs = [
            ("costPerSec", self.cost_per_sec),
            ("costPerMem", self.cost_per_mem),
            ("costPerStorage", self.cost_per_storage),
            ("costPerBw", self.cost_per_bw),
        ];
        for (name, value) in costs {
            if !(value.is_finite() && value >= 0.0) {
                return Err(SimError::Configuration(format!("{name} must be non-negative, got {value}")));
            }
        }
        Ok(())
    }
}

/// A VM hosted by a datacenter, with its scheduler and the broker that owns it.
pub struct VmSlot {
    pub vm: Vm,
    pub scheduler: Box<dyn CloudletScheduler>,
    pub owner: EntityId,
}

/// One periodic observation recorded by a monitoring datacenter variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonitorSample {
    pub time: f64,
    pub vm_id: u32,
    pub running_cloudlets: usize,
}

/// State and default behavior shared by every datacenter variant.
pub struct DatacenterCore {
    id: u32,
    name: String,
    characteristics: DatacenterCharacteristics,
    hosts: Vec<Host>,
    policy: Box<dyn VmAllocationPolicy>,
    scheduling_interval: f64,
    storage: String,
    vms: BTreeMap<u32, VmSlot>,
    generation: u64,
    update_count: u64,
}

impl DatacenterCore {
    pub fn new(
        id: u32,
        name: impl Into<String>,
        characteristics: DatacenterCharacteristics,
        hosts: Vec<Host>,
        policy: Box<dyn VmAllocationPolicy>,
        scheduling_interval: f64,
        storage: impl Into<String>,
    ) -> Result<Self, SimError> {
        if !(scheduling_interval.is_finite() && scheduling_interval >= 0.0) {
            return Err(SimError::Configuration(format!(
                "schedulingInterval must be non-negative, got {scheduling_interval}"
            )));
        }
        characteristics.validate()?;
        let mut seen = std::collections::BTreeSet::new();
        for host in &hosts {
            if !seen.insert(host.id) {
                return Err(SimError::Configuration(format!("duplicate host id {}", host.id)));
            }
        }
        Ok(Self {
            id,
            name: name.into(),
            characteristics,
            hosts,
            policy,
            scheduling_interval,
            storage: storage.into(),
            vms: BTreeMap::new(),
            generation: 0,
            update_count: 0,
        })
    }

    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn characteristics(&self) -> &DatacenterCharacteristics {
        &self.characteristics
    }

    pub fn hosts(&self) -> &[Host] {
        &self.hosts
    }

    pub fn scheduling_interval(&self) -> f64 {
        self.scheduling_interval
    }

    pub fn storage(&self) -> &str {
        &self.storage
    }

    pub fn vms(&self) -> impl Iterator<Item = &VmSlot> {
        self.vms.values()
    }

    /// Number of times the processing-update hook body has run.
    pub fn update_count(&self) -> u64 {
        self.update_count
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    /// Places `vm` through the allocation policy. `Ok(None)` means no host
    /// could take it.
    pub fn create_vm(
        &mut self,
        mut vm: Vm,
        scheduler: Box<dyn CloudletScheduler>,
        owner: EntityId,
    ) -> Result<Option<u32>, SimError> {
        if self.vms.contains_key(&vm.id) {
            return Err(SimError::Protocol(format!(
                "vm {} already exists in datacenter {}",
                vm.id, self.id
            )));
        }
        let Some(host_id) = self.policy.allocate(&vm, &self.hosts) else {
            return Ok(None);
        };
        let host = self
            .hosts
            .iter_mut()
            .find(|h| h.id == host_id)
            .ok_or_else(|| SimError::Configuration(format!("allocation policy returned unknown host {host_id}")))?;
        if !host.is_suitable_for(&vm) {
            return Err(SimError::Configuration(format!(
                "allocation policy placed vm {} on host {host_id} without enough free capacity",
                vm.id
            )));
        }
        host.reserve(&vm)?;
        vm.host = Some(host_id);
        self.vms.insert(vm.id, VmSlot { vm, scheduler, owner });
        Ok(Some(host_id))
    }

    pub fn submit_cloudlet(&mut self, cloudlet: Cloudlet, now: SimTime) -> Result<(), SimError> {
        let slot = self.vms.get_mut(&cloudlet.vm_id).ok_or_else(|| {
            SimError::Protocol(format!(
                "cloudlet {} submitted to vm {} which is not hosted here",
                cloudlet.id, cloudlet.vm_id
            ))
        })?;
        slot.scheduler.submit(cloudlet, now);
        Ok(())
    }

    /// Default processing update: advances every VM's scheduler, returns
    /// finished cloudlets to their brokers, and schedules the next update at
    /// the earliest estimated completion or periodic tick. Nothing is
    /// scheduled once no cloudlet is active.
    pub fn update_cloudlet_processing(&mut self, ctx: &mut CloudContext<'_>) -> Result<(), SimError> {
        self.update_count += 1;
        let now = ctx.now();
        let mut earliest: Option<SimTime> = None;
        let mut active = 0;
        for slot in self.vms.values_mut() {
            let next = slot.scheduler.update(now, slot.vm.total_mips())?;
            for cloudlet in slot.scheduler.take_finished() {
                send(ctx, slot.owner, 0.0, CloudEvent::CloudletReturn(cloudlet))?;
            }
            active += slot.scheduler.active();
            earliest = match (earliest, next) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
        }

        // Invalidates any update already in flight.
        self.generation += 1;
        if active == 0 {
            return Ok(());
        }
        let mut next = earliest;
        if self.scheduling_interval > 0.0 {
            let tick = next_tick(now, self.scheduling_interval)?;
            next = Some(next.map_or(tick, |e| e.min(tick)));
        }
        if let Some(at) = next {
            let me = ctx.self_id();
            ctx.schedule_at(
                me,
                at,
                tags::PROCESSING_UPDATE,
                CloudEvent::ProcessingUpdate {
                    generation: self.generation,
                },
            )?;
        }
        Ok(())
    }
}

/// The next multiple of `interval` strictly after `now`. Ticks are computed as
/// `k * interval` so they do not accumulate rounding drift.
fn next_tick(now: SimTime, interval: f64) -> Result<SimTime, SimError> {
    let k = (now.secs() / interval + 1e-9).floor() + 1.0;
    SimTime::new(k * interval)
}

/// A datacenter implementation. Variants override
/// [`DatacenterVariant::update_cloudlet_processing`] to hook into periodic
/// processing; everything else is handled by [`DatacenterEntity`] on top of
/// the [`DatacenterCore`].
pub trait DatacenterVariant: std::any::Any {
    fn core(&self) -> &DatacenterCore;

    fn core_mut(&mut self) -> &mut DatacenterCore;

    fn update_cloudlet_processing(&mut self, ctx: &mut CloudContext<'_>) -> Result<(), SimError> {
        self.core_mut().update_cloudlet_processing(ctx)
    }

    fn monitor_samples(&self) -> Vec<MonitorSample> {
        Vec::new()
    }
}

/// The plain datacenter, registered as `org.cloudbus.cloudsim.Datacenter`.
pub struct SimpleDatacenter {
    core: DatacenterCore,
}

impl SimpleDatacenter {
    pub fn new(core: DatacenterCore) -> Self {
        Self { core }
    }
}

impl DatacenterVariant for SimpleDatacenter {
    fn core(&self) -> &DatacenterCore {
        &self.core
    }

    fn core_mut(&mut self) -> &mut DatacenterCore {
        &mut self.core
    }
}

/// Kernel entity wrapping any datacenter variant.
pub struct DatacenterEntity {
    variant: Box<dyn DatacenterVariant>,
}

impl DatacenterEntity {
    pub fn new(variant: Box<dyn DatacenterVariant>) -> Self {
        Self { variant }
    }

    pub fn variant(&self) -> &dyn DatacenterVariant {
        self.variant.as_ref()
    }

    pub fn core(&self) -> &DatacenterCore {
        self.variant.core()
    }
}

impl Entity<CloudEvent> for DatacenterEntity {
    fn process(&mut self, event: Event<CloudEvent>, ctx: &mut CloudContext<'_>) -> Result<(), SimError> {
        match event.payload {
            CloudEvent::VmCreate { vm, scheduler } => {
                let vm_id = vm.id;
                let core = self.variant.core_mut();
                let host_id = core.create_vm(vm, scheduler, event.source)?;
                let datacenter_id = core.id();
                send(
                    ctx,
                    event.source,
                    0.0,
                    CloudEvent::VmCreateAck {
                        vm_id,
                        host_id,
                        datacenter_id,
                    },
                )
            }
            CloudEvent::CloudletSubmit(cloudlet) => {
                self.variant.core_mut().submit_cloudlet(cloudlet, ctx.now())?;
                self.variant.update_cloudlet_processing(ctx)
            }
            CloudEvent::ProcessingUpdate { generation } => {
                if generation == self.variant.core().generation() {
                    self.variant.update_cloudlet_processing(ctx)?;
                }
                Ok(())
            }
            other => Err(SimError::Protocol(format!(
                "datacenter {} cannot handle {other:?}",
                self.variant.core().id()
            ))),
        }
    }
}
