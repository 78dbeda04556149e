use csx_core::cloud::{
    register_broker, worst_fit_allocate, Broker, Cloudlet, CloudletStatus, CloudSimulation, DatacenterCharacteristics,
    DatacenterCore, DatacenterEntity, Host, SimpleDatacenter, TimeSharedScheduler, Vm, VmAllocationPolicySimple,
    VmRequest,
};
use proptest::prelude::*;

/// Exhaustive reference: among every suitable host, the one with the most
/// free PEs; ties go to the lowest id.
fn exhaustive(vm: &Vm, hosts: &[Host]) -> Option<u32> {
    let mut best: Option<(u32, u32)> = None;
    for h in hosts {
        let fits = h.free_pes() >= vm.pes
            && h.free_ram_mb() >= vm.ram_mb
            && h.free_bw_mbps() >= vm.bw_mbps
            && h.free_storage_mb() >= vm.size_mb;
        if !fits {
            continue;
        }
        best = match best {
            Some((free, id)) if free > h.free_pes() || (free == h.free_pes() && id < h.id) => Some((free, id)),
            _ => Some((h.free_pes(), h.id)),
        };
    }
    best.map(|(_, id)| id)
}

fn hosts_strategy() -> impl Strategy<Value = Vec<Host>> {
    prop::collection::vec((1u32..9, 0u64..4096), 1..9).prop_map(|specs| {
        let ids: Vec<u32> = (0..specs.len() as u32).map(|i| i * 3 % 17).collect();
        specs
            .into_iter()
            .zip(ids)
            .map(|((pes, ram), id)| Host::with_uniform_pes(id, pes, 1000.0, ram, 10_000, 100_000).unwrap())
            .collect()
    })
}

fn vms_strategy() -> impl Strategy<Value = Vec<Vm>> {
    prop::collection::vec((1u32..5, 0u64..2048), 1..9).prop_map(|specs| {
        specs
            .into_iter()
            .enumerate()
            .map(|(i, (pes, ram))| Vm::new(i as u32, 500.0, pes, ram, 100, 1000).unwrap())
            .collect()
    })
}

fn run_single_vm(lengths: &[f64], mips: f64) -> Vec<f64> {
    let mut sim = CloudSimulation::new();
    let core = DatacenterCore::new(
        0,
        "dc",
        DatacenterCharacteristics::default(),
        vec![Host::with_uniform_pes(0, 1, mips, 1 << 20, 1 << 20, 1 << 30).unwrap()],
        Box::new(VmAllocationPolicySimple),
        0.0,
        "",
    )
    .unwrap();
    let dc = sim.register(DatacenterEntity::new(Box::new(SimpleDatacenter::new(core)))).unwrap();
    let mut broker = Broker::new("b");
    broker.bind_datacenter(dc, 0);
    let cloudlets = lengths
        .iter()
        .enumerate()
        .map(|(i, &len)| Cloudlet::new(i as u32, len, 1, 0).unwrap())
        .collect();
    broker
        .submit_workload(
            vec![VmRequest {
                vm: Vm::new(0, mips, 1, 1, 1, 1).unwrap(),
                scheduler: Box::new(TimeSharedScheduler::new()),
            }],
            cloudlets,
        )
        .unwrap();
    let b = register_broker(&mut sim, broker).unwrap();
    sim.run().unwrap();
    let records = sim.entity::<Broker>(b).unwrap().records();
    let mut out = vec![f64::NAN; lengths.len()];
    for r in records {
        assert_eq!(r.status, CloudletStatus::Success);
        out[r.cloudlet_id as usize] = r.finish_time.unwrap();
    }
    out
}

fn rel_err(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn worst_fit_matches_exhaustive_search(mut hosts in hosts_strategy(), vms in vms_strategy()) {
        for vm in &vms {
            let got = worst_fit_allocate(vm, &hosts);
            prop_assert_eq!(got, exhaustive(vm, &hosts));
            if let Some(id) = got {
                hosts.iter_mut().find(|h| h.id == id).unwrap().reserve(vm).unwrap();
            }
        }
    }

    #[test]
    fn single_cloudlet_makespan(len in 1.0f64..1e6, mips in 1.0f64..1e5) {
        let finish = run_single_vm(&[len], mips);
        prop_assert!(rel_err(finish[0], len / mips) <= 1e-9);
    }

    #[test]
    fn equal_cloudlets_share_the_vm(len in 1.0f64..1e6, mips in 1.0f64..1e5) {
        let finish = run_single_vm(&[len, len], mips);
        for f in finish {
            prop_assert!(rel_err(f, 2.0 * len / mips) <= 1e-9);
        }
    }

    #[test]
    fn unequal_pair_follows_processor_sharing(a in 1.0f64..1e5, b in 1.0f64..1e5, mips in 1.0f64..1e4) {
        // Both run at mips/2 until the shorter one ends, then the longer gets
        // the whole VM.
        let (short, long) = if a <= b { (a, b) } else { (b, a) };
        let t_short = 2.0 * short / mips;
        let t_long = t_short + (long - short) / mips;
        let finish = run_single_vm(&[short, long], mips);
        prop_assert!(rel_err(finish[0], t_short) <= 1e-9);
        prop_assert!(rel_err(finish[1], t_long) <= 1e-9);
    }
}
