//! Two extensions written only against the public `csx_core` API:
//! a round-robin VM placement policy and a datacenter that records how many
//! cloudlets each VM is running at every processing update.
//!
//! Built as a `cdylib`, the library can be dropped into an extensions
//! directory; the `rlib` form lets Rust code register the same factories
//! statically through [`register`].

use csx_core::cloud::{
    CloudContext, DatacenterCore, DatacenterVariant, Host, MonitorSample, Vm, VmAllocationPolicy,
};
use csx_core::kernel::SimError;
use csx_core::translation::{ExtensionArgs, ExtensionRegistrar};

pub const ROUND_ROBIN_POLICY: &str = "sample.ext.RoundRobinAllocationPolicy";
pub const MONITORING_DATACENTER: &str = "sample.ext.MonitoringDatacenter";

/// Places each VM on the next suitable host after the previous placement,
/// wrapping around the host list.
#[derive(Debug, Clone, Default)]
pub struct RoundRobinAllocationPolicy {
    cursor: usize,
}

impl RoundRobinAllocationPolicy {
    pub fn new() -> Self {
        Self::default()
    }

    /// Reads the optional `startIndex` property.
    pub fn from_args(args: &ExtensionArgs) -> Result<Self, String> {
        let cursor = match args.property("startIndex") {
            None => 0,
            Some(v) => v
                .parse()
                .map_err(|_| format!("startIndex must be a non-negative integer, got '{v}'"))?,
        };
        Ok(Self { cursor })
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }
}

impl VmAllocationPolicy for RoundRobinAllocationPolicy {
    fn allocate(&mut self, vm: &Vm, hosts: &[Host]) -> Option<u32> {
        let n = hosts.len();
        (0..n)
            .map(|k| (self.cursor + k) % n)
            .find(|&i| hosts[i].is_suitable_for(vm))
            .map(|i| {
                self.cursor = (i + 1) % n;
                hosts[i].id
            })
    }
}

/// A datacenter that logs `(time, vm, running cloudlets)` for every
/// allocated VM each time cloudlet processing is updated.
pub struct MonitoringDatacenter {
    core: DatacenterCore,
    log: Vec<MonitorSample>,
}

impl MonitoringDatacenter {
    /// Requires a positive scheduling interval; with none, the datacenter
    /// would only be observed at completions.
    pub fn new(core: DatacenterCore) -> Result<Self, String> {
        if core.scheduling_interval() <= 0.0 {
            return Err("schedulingInterval must be positive for a monitoring datacenter".into());
        }
        Ok(Self { core, log: Vec::new() })
    }

    pub fn monitor_log(&self) -> &[MonitorSample] {
        &self.log
    }
}

impl DatacenterVariant for MonitoringDatacenter {
    fn core(&self) -> &DatacenterCore {
        &self.core
    }

    fn core_mut(&mut self) -> &mut DatacenterCore {
        &mut self.core
    }

    fn update_cloudlet_processing(&mut self, ctx: &mut CloudContext<'_>) -> Result<(), SimError> {
        self.core.update_cloudlet_processing(ctx)?;
        let time = ctx.now().secs();
        for slot in self.core.vms() {
            self.log.push(MonitorSample {
                time,
                vm_id: slot.vm.id,
                running_cloudlets: slot.scheduler.active(),
            });
        }
        Ok(())
    }

    fn monitor_samples(&self) -> Vec<MonitorSample> {
        self.log.clone()
    }
}

pub fn register(registrar: &mut dyn ExtensionRegistrar) {
    registrar.allocation_policy(
        ROUND_ROBIN_POLICY,
        Box::new(|args| Ok(Box::new(RoundRobinAllocationPolicy::from_args(args)?))),
    );
    registrar.datacenter(
        MONITORING_DATACENTER,
        Box::new(|core, _| Ok(Box::new(MonitoringDatacenter::new(core)?))),
    );
}

csx_core::export_extensions!(register);

#[cfg(test)]
mod tests {
    use super::*;

    fn hosts(n: u32) -> Vec<Host> {
        (0..n)
            .map(|id| Host::with_uniform_pes(id, 4, 1000.0, 4096, 1000, 100_000).unwrap())
            .collect()
    }

    fn vm(id: u32) -> Vm {
        Vm::new(id, 1000.0, 1, 512, 100, 1000).unwrap()
    }

    #[test]
    fn cycles_through_feasible_hosts() {
        let mut policy = RoundRobinAllocationPolicy::new();
        let hosts = hosts(3);
        let placed: Vec<_> = (0..4).map(|i| policy.allocate(&vm(i), &hosts)).collect();
        assert_eq!(placed, [Some(0), Some(1), Some(2), Some(0)]);
    }

    #[test]
    fn skips_infeasible_host() {
        let mut hosts = hosts(3);
        // Host 1 is full.
        hosts[1].reserve(&Vm::new(99, 1000.0, 4, 0, 0, 0).unwrap()).unwrap();
        let mut policy = RoundRobinAllocationPolicy::new();
        let placed: Vec<_> = (0..3).map(|i| policy.allocate(&vm(i), &hosts)).collect();
        assert_eq!(placed, [Some(0), Some(2), Some(0)]);
    }

    #[test]
    fn no_feasible_host_keeps_cursor() {
        let mut policy = RoundRobinAllocationPolicy::new();
        let hosts = hosts(2);
        policy.allocate(&vm(0), &hosts);
        let huge = Vm::new(1, 1000.0, 8, 0, 0, 0).unwrap();
        assert_eq!(policy.allocate(&huge, &hosts), None);
        assert_eq!(policy.cursor(), 1);
        assert_eq!(policy.allocate(&vm(2), &[]), None);
    }

    #[test]
    fn start_index_property() {
        let mut args = ExtensionArgs::default();
        args.properties.insert("startIndex".into(), "2".into());
        let mut policy = RoundRobinAllocationPolicy::from_args(&args).unwrap();
        assert_eq!(policy.allocate(&vm(0), &hosts(3)), Some(2));
        args.properties.insert("startIndex".into(), "-1".into());
        assert!(RoundRobinAllocationPolicy::from_args(&args).is_err());
    }
}
