use csx_core::kernel::{Entity, EntityId, Event, SimContext, SimError, SimTime, Simulation};
use proptest::prelude::*;

/// Payload: an optional follow-up `(delay, target index)` to schedule on receipt.
type Payload = Option<(f64, usize)>;

struct Node {
    peers: Vec<EntityId>,
    received: Vec<(f64, u64)>,
}

impl Entity<Payload> for Node {
    fn process(&mut self, event: Event<Payload>, ctx: &mut SimContext<'_, Payload>) -> Result<(), SimError> {
        self.received.push((event.time.secs(), event.seq));
        if let Some((delay, target)) = event.payload {
            let target = self.peers[target % self.peers.len()];
            ctx.schedule(target, delay, 1, None)?;
        }
        Ok(())
    }
}

fn build(n_entities: usize, events: &[(f64, usize, Payload)]) -> (Simulation<Payload>, Vec<EntityId>) {
    let mut sim = Simulation::new();
    sim.enable_trace();
    let ids: Vec<EntityId> = (0..n_entities)
        .map(|_| {
            sim.register(Node {
                peers: Vec::new(),
                received: Vec::new(),
            })
            .unwrap()
        })
        .collect();
    for &id in &ids {
        sim.entity_mut::<Node>(id).unwrap().peers = ids.clone();
    }
    for (time, target, payload) in events {
        let target = ids[target % ids.len()];
        sim.schedule_at(target, target, SimTime::new(*time).unwrap(), 0, *payload)
            .unwrap();
    }
    (sim, ids)
}

fn schedule_strategy() -> impl Strategy<Value = Vec<(f64, usize, Payload)>> {
    // Coarse times force many ties.
    let time = (0u32..20).prop_map(|t| t as f64 * 0.5);
    let follow = prop::option::of(((0u32..6).prop_map(|d| d as f64 * 0.5), 0usize..8));
    prop::collection::vec((time, 0usize..8, follow), 0..100)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn dispatch_order_is_time_then_seq(events in schedule_strategy(), n in 1usize..5) {
        let (mut sim, _) = build(n, &events);
        let end = sim.run().unwrap();
        let trace = sim.trace();
        for pair in trace.windows(2) {
            prop_assert!((pair[0].time, pair[0].seq) < (pair[1].time, pair[1].seq));
        }
        if let Some(last) = trace.last() {
            prop_assert_eq!(last.time, end);
        }
    }

    #[test]
    fn every_event_dispatched_once(events in schedule_strategy(), n in 1usize..5) {
        let (mut sim, ids) = build(n, &events);
        sim.run().unwrap();
        let follow_ups = events.iter().filter(|e| e.2.is_some()).count();
        let expected = events.len() + follow_ups;
        prop_assert_eq!(sim.dispatched() as usize, expected);
        prop_assert_eq!(sim.pending(), 0);
        let mut seqs: Vec<u64> = sim.trace().iter().map(|d| d.seq).collect();
        seqs.sort_unstable();
        seqs.dedup();
        prop_assert_eq!(seqs.len(), expected);
        let received: usize = ids.iter().map(|&id| sim.entity::<Node>(id).unwrap().received.len()).sum();
        prop_assert_eq!(received, expected);
    }

    #[test]
    fn initial_events_follow_stable_time_sort(events in schedule_strategy()) {
        let plain: Vec<_> = events.iter().map(|&(t, target, _)| (t, target, None)).collect();
        let (mut sim, _) = build(3, &plain);
        sim.run().unwrap();
        // Stable sort by time of the submission order is the reference order.
        let mut want: Vec<(f64, u64)> = plain.iter().enumerate().map(|(i, e)| (e.0, i as u64)).collect();
        want.sort_by(|a, b| a.0.total_cmp(&b.0));
        let got: Vec<(f64, u64)> = sim.trace().iter().map(|d| (d.time.secs(), d.seq)).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn clock_never_decreases(events in schedule_strategy()) {
        let (mut sim, ids) = build(4, &events);
        sim.run().unwrap();
        for id in ids {
            let received = &sim.entity::<Node>(id).unwrap().received;
            for pair in received.windows(2) {
                prop_assert!(pair[0].0 <= pair[1].0);
            }
        }
    }
}

#[test]
fn negative_delay_rejected_at_source() {
    let (mut sim, ids) = build(1, &[]);
    assert!(matches!(
        sim.schedule(ids[0], ids[0], -1.0, 0, None),
        Err(SimError::InvalidDelay(_))
    ));
}
