use super::{Host, Vm};

/// Chooses a host for a VM. The datacenter verifies that the returned host
/// really has room and rejects the policy otherwise.
pub trait VmAllocationPolicy {
    fn allocate(&mut self, vm: &Vm, hosts: &[Host]) -> Option<u32>;

    fn deallocate(&mut self, _vm: &Vm) {}
}

/// Worst fit: the feasible host with the most unreserved PEs, lowest id on ties.
pub fn worst_fit_allocate(vm: &Vm, hosts: &[Host]) -> Option<u32> {
    hosts
        .iter()
        .filter(|h| h.is_suitable_for(vm))
        .map(|h| (h.free_pes(), h.id))
        // max by free PEs, then min by id
        .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)))
        .map(|(_, id)| id)
}

/// The default policy, registered as `org.cloudbus.cloudsim.VmAllocationPolicySimple`.
#[derive(Debug, Default, Clone)]
pub struct VmAllocationPolicySimple;

impl VmAllocationPolicy for VmAllocationPolicySimple {
    fn allocate(&mut self, vm: &Vm, hosts: &[Host]) -> Option<u32> {
        worst_fit_allocate(vm, hosts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn host_with_free(id: u32, total: u32, used: u32) -> Host {
        let mut h = Host::with_uniform_pes(id, total, 1000.0, 1 << 20, 1 << 20, 1 << 20).unwrap();
        if used > 0 {
            h.reserve(&Vm::new(10_000 + id, 1.0, used, 0, 0, 0).unwrap()).unwrap();
        }
        h
    }

    #[test]
    fn picks_host_with_most_free_pes() {
        // free counts {h0:2, h1:5, h2:3}
        let hosts = vec![host_with_free(0, 2, 0), host_with_free(1, 8, 3), host_with_free(2, 3, 0)];
        let vm = Vm::new(0, 100.0, 1, 0, 0, 0).unwrap();
        assert_eq!(worst_fit_allocate(&vm, &hosts), Some(1));
    }

    #[test]
    fn single_qualifying_host() {
        let hosts = vec![host_with_free(0, 1, 1), host_with_free(1, 4, 0)];
        let vm = Vm::new(0, 100.0, 2, 0, 0, 0).unwrap();
        assert_eq!(worst_fit_allocate(&vm, &hosts), Some(1));
    }

    #[test]
    fn none_when_infeasible() {
        let hosts = vec![host_with_free(0, 2, 0), host_with_free(1, 2, 0)];
        let vm = Vm::new(0, 100.0, 4, 0, 0, 0).unwrap();
        assert_eq!(worst_fit_allocate(&vm, &hosts), None);
    }

    #[test]
    fn ties_go_to_lowest_id() {
        let hosts = vec![host_with_free(3, 4, 0), host_with_free(1, 4, 0), host_with_free(2, 4, 0)];
        let vm = Vm::new(0, 100.0, 1, 0, 0, 0).unwrap();
        assert_eq!(worst_fit_allocate(&vm, &hosts), Some(1));
    }

    #[test]
    fn memory_demand_excludes_host() {
        let mut big = Host::with_uniform_pes(0, 8, 1000.0, 512, 1000, 1000).unwrap();
        big.ram_mb = 512;
        let small = Host::with_uniform_pes(1, 2, 1000.0, 4096, 1000, 1000).unwrap();
        let vm = Vm::new(0, 100.0, 1, 1024, 0, 0).unwrap();
        assert_eq!(worst_fit_allocate(&vm, &[big, small]), Some(1));
    }
}
