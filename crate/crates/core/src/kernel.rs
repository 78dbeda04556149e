//! Deterministic single-clock discrete-event kernel.
//!
//! Entities exchange timestamped [`Event`]s through a future-event list ordered
//! by `(time, seq)`, where `seq` is a per-instance insertion counter. The clock
//! only ever jumps to the timestamp of the next event, and events sharing a
//! timestamp are dispatched in the order they were scheduled.

use std::any::Any;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Simulated time in seconds. Always finite and non-negative.
#[derive(Debug, Clone, Copy, Default, Serialize)]
#[serde(transparent)]
pub struct SimTime(f64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0.0);

    pub fn new(secs: f64) -> Result<Self, SimError> {
        if secs.is_finite() && secs >= 0.0 {
            // normalizes -0.0
            Ok(SimTime(secs + 0.0))
        } else {
            Err(SimError::InvalidTime(secs))
        }
    }

    pub fn secs(self) -> f64 {
        self.0
    }
}

impl PartialEq for SimTime {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for SimTime {}

impl PartialOrd for SimTime {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SimTime {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Identifier handed out by [`Simulation::register`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct EntityId(u32);

impl EntityId {
    #[cfg(test)]
    pub(crate) fn from_raw(raw: u32) -> Self {
        EntityId(raw)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("lifecycle error: {0}")]
    Lifecycle(String),
    #[error("invalid time {0}: must be finite and non-negative")]
    InvalidTime(f64),
    #[error("invalid delay {0}: must be finite and non-negative")]
    InvalidDelay(f64),
    #[error("cannot schedule at {time}, clock is already at {clock}")]
    TimeInPast { time: SimTime, clock: SimTime },
    #[error("unknown entity {0}")]
    UnknownEntity(EntityId),
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("at t={time}s in entity {entity}: {source}")]
    AtTime {
        time: SimTime,
        entity: EntityId,
        source: Box<SimError>,
    },
}

/// A timestamped message. `P` is the payload type shared by every entity of a
/// simulation instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Event<P> {
    pub time: SimTime,
    pub seq: u64,
    pub source: EntityId,
    pub target: EntityId,
    pub tag: u16,
    pub payload: P,
}

struct Pending<P>(Event<P>);

impl<P> Pending<P> {
    fn key(&self) -> (SimTime, u64) {
        (self.0.time, self.0.seq)
    }
}

impl<P> PartialEq for Pending<P> {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl<P> Eq for Pending<P> {}

impl<P> PartialOrd for Pending<P> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<P> Ord for Pending<P> {
    // BinaryHeap is a max-heap; reverse so the smallest (time, seq) pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other.key().cmp(&self.key())
    }
}

struct EventQueue<P> {
    heap: BinaryHeap<Pending<P>>,
    next_seq: u64,
}

impl<P> EventQueue<P> {
    fn new() -> Self {
        Self {
            heap: BinaryHeap::new(),
            next_seq: 0,
        }
    }

    fn push(&mut self, time: SimTime, source: EntityId, target: EntityId, tag: u16, payload: P) -> u64 {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Pending(Event {
            time,
            seq,
            source,
            target,
            tag,
            payload,
        }));
        seq
    }

    fn pop(&mut self) -> Option<Event<P>> {
        self.heap.pop().map(|p| p.0)
    }
}

fn check_schedule(
    clock: SimTime,
    time: SimTime,
    target: EntityId,
    entity_count: usize,
) -> Result<(), SimError> {
    if time < clock {
        return Err(SimError::TimeInPast { time, clock });
    }
    if target.index() >= entity_count {
        return Err(SimError::UnknownEntity(target));
    }
    Ok(())
}

fn delay_to_time(clock: SimTime, delay: f64) -> Result<SimTime, SimError> {
    if !(delay.is_finite() && delay >= 0.0) {
        return Err(SimError::InvalidDelay(delay));
    }
    SimTime::new(clock.secs() + delay)
}

/// Handle given to an entity while it processes an event.
pub struct SimContext<'a, P> {
    now: SimTime,
    me: EntityId,
    entity_count: usize,
    queue: &'a mut EventQueue<P>,
}

impl<P> SimContext<'_, P> {
    pub fn now(&self) -> SimTime {
        self.now
    }

    /// The entity currently processing an event.
    pub fn self_id(&self) -> EntityId {
        self.me
    }

    pub fn schedule(&mut self, target: EntityId, delay: f64, tag: u16, payload: P) -> Result<(), SimError> {
        let time = delay_to_time(self.now, delay)?;
        self.schedule_at(target, time, tag, payload)
    }

    /// Schedules at an absolute time, which must not precede the clock.
    pub fn schedule_at(&mut self, target: EntityId, time: SimTime, tag: u16, payload: P) -> Result<(), SimError> {
        check_schedule(self.now, time, target, self.entity_count)?;
        self.queue.push(time, self.me, target, tag, payload);
        Ok(())
    }
}

/// An event-processing participant of a simulation.
pub trait Entity<P>: Any {
    fn process(&mut self, event: Event<P>, ctx: &mut SimContext<'_, P>) -> Result<(), SimError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimState {
    Created,
    Running,
    Finished,
}

/// One dispatched event, recorded when tracing is enabled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dispatch {
    pub time: SimTime,
    pub seq: u64,
    pub target: EntityId,
    pub tag: u16,
}

pub struct Simulation<P> {
    clock: SimTime,
    queue: EventQueue<P>,
    entities: Vec<Box<dyn Entity<P>>>,
    state: SimState,
    dispatched: u64,
    trace: Option<Vec<Dispatch>>,
}

impl<P: 'static> Default for Simulation<P> {
    fn default() -> Self {
        Self::new()
    }
}

impl<P: 'static> Simulation<P> {
    pub fn new() -> Self {
        Self {
            clock: SimTime::ZERO,
            queue: EventQueue::new(),
            entities: Vec::new(),
            state: SimState::Created,
            dispatched: 0,
            trace: None,
        }
    }

    /// Records every dispatch in [`Simulation::trace`].
    pub fn enable_trace(&mut self) {
        self.trace.get_or_insert_with(Vec::new);
    }

    pub fn trace(&self) -> &[Dispatch] {
        self.trace.as_deref().unwrap_or(&[])
    }

    pub fn register<E: Entity<P>>(&mut self, entity: E) -> Result<EntityId, SimError> {
        self.register_boxed(Box::new(entity))
    }

    pub fn register_boxed(&mut self, entity: Box<dyn Entity<P>>) -> Result<EntityId, SimError> {
        if self.state != SimState::Created {
            return Err(SimError::Lifecycle(
                "entities can only be registered before the simulation starts".into(),
            ));
        }
        let id = EntityId(u32::try_from(self.entities.len()).expect("entity count exceeds u32"));
        self.entities.push(entity);
        Ok(id)
    }

    pub fn schedule(
        &mut self,
        source: EntityId,
        target: EntityId,
        delay: f64,
        tag: u16,
        payload: P,
    ) -> Result<(), SimError> {
        let time = delay_to_time(self.clock, delay)?;
        self.schedule_at(source, target, time, tag, payload)
    }

    pub fn schedule_at(
        &mut self,
        source: EntityId,
        target: EntityId,
        time: SimTime,
        tag: u16,
        payload: P,
    ) -> Result<(), SimError> {
        if self.state == SimState::Finished {
            return Err(SimError::Lifecycle("simulation already finished".into()));
        }
        check_schedule(self.clock, time, target, self.entities.len())?;
        if source.index() >= self.entities.len() {
            return Err(SimError::UnknownEntity(source));
        }
        self.queue.push(time, source, target, tag, payload);
        Ok(())
    }

    /// Dispatches events until the future-event list drains and returns the
    /// final clock. An entity error aborts the run; the remaining events are
    /// abandoned and the instance is left finished.
    pub fn run(&mut self) -> Result<SimTime, SimError> {
        if self.state != SimState::Created {
            return Err(SimError::Lifecycle("run() may only be called once".into()));
        }
        self.state = SimState::Running;
        let entity_count = self.entities.len();
        while let Some(event) = self.queue.pop() {
            debug_assert!(event.time >= self.clock);
            self.clock = event.time;
            self.dispatched += 1;
            if let Some(trace) = self.trace.as_mut() {
                trace.push(Dispatch {
                    time: event.time,
                    seq: event.seq,
                    target: event.target,
                    tag: event.tag,
                });
            }
            let target = event.target;
            let mut ctx = SimContext {
                now: self.clock,
                me: target,
                entity_count,
                queue: &mut self.queue,
            };
            if let Err(err) = self.entities[target.index()].process(event, &mut ctx) {
                self.state = SimState::Finished;
                return Err(SimError::AtTime {
                    time: self.clock,
                    entity: target,
                    source: Box::new(err),
                });
            }
        }
        self.state = SimState::Finished;
        Ok(self.clock)
    }

    pub fn clock(&self) -> SimTime {
        self.clock
    }

    pub fn state(&self) -> SimState {
        self.state
    }

    pub fn pending(&self) -> usize {
        self.queue.heap.len()
    }

    pub fn dispatched(&self) -> u64 {
        self.dispatched
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn entity_dyn(&self, id: EntityId) -> Option<&dyn Entity<P>> {
        self.entities.get(id.index()).map(|e| e.as_ref())
    }

    pub fn entity<E: Entity<P>>(&self, id: EntityId) -> Option<&E> {
        let entity: &dyn Any = self.entities.get(id.index())?.as_ref();
        entity.downcast_ref::<E>()
    }

    pub fn entity_mut<E: Entity<P>>(&mut self, id: EntityId) -> Option<&mut E> {
        let entity: &mut dyn Any = self.entities.get_mut(id.index())?.as_mut();
        entity.downcast_mut::<E>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Logs every event it receives and optionally forwards a follow-up.
    #[derive(Default)]
    struct Recorder {
        seen: Vec<(f64, u64)>,
        follow_up: Option<(f64, u16)>,
    }

    impl Entity<u32> for Recorder {
        fn process(&mut self, event: Event<u32>, ctx: &mut SimContext<'_, u32>) -> Result<(), SimError> {
            self.seen.push((event.time.secs(), event.seq));
            if let Some((delay, tag)) = self.follow_up.take() {
                let me = ctx.self_id();
                ctx.schedule(me, delay, tag, event.payload + 1)?;
            }
            Ok(())
        }
    }

    struct Failing;

    impl Entity<u32> for Failing {
        fn process(&mut self, _: Event<u32>, _: &mut SimContext<'_, u32>) -> Result<(), SimError> {
            Err(SimError::Protocol("boom".into()))
        }
    }

    #[test]
    fn registered_ids_are_distinct() {
        let mut sim = Simulation::<u32>::new();
        let a = sim.register(Recorder::default()).unwrap();
        let b = sim.register(Recorder::default()).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn register_after_run_is_lifecycle_error() {
        let mut sim = Simulation::<u32>::new();
        sim.run().unwrap();
        let err = sim.register(Recorder::default()).unwrap_err();
        assert!(matches!(err, SimError::Lifecycle(_)));
    }

    #[test]
    fn second_run_is_lifecycle_error() {
        let mut sim = Simulation::<u32>::new();
        sim.run().unwrap();
        assert!(matches!(sim.run(), Err(SimError::Lifecycle(_))));
    }

    #[test]
    fn empty_run_returns_zero() {
        let mut sim = Simulation::<u32>::new();
        assert_eq!(sim.run().unwrap(), SimTime::ZERO);
        assert_eq!(sim.state(), SimState::Finished);
    }

    #[test]
    fn single_event_sets_final_clock() {
        let mut sim = Simulation::<u32>::new();
        let a = sim.register(Recorder::default()).unwrap();
        sim.schedule(a, a, 3.5, 0, 0).unwrap();
        assert_eq!(sim.run().unwrap().secs(), 3.5);
    }

    #[test]
    fn delayed_event_dispatches_at_clock_plus_delay() {
        let mut sim = Simulation::<u32>::new();
        let a = sim.register(Recorder::default()).unwrap();
        sim.schedule(a, a, 5.0, 0, 0).unwrap();
        sim.run().unwrap();
        assert_eq!(sim.entity::<Recorder>(a).unwrap().seen, vec![(5.0, 0)]);
    }

    #[test]
    fn chained_event_extends_the_run() {
        // t=1 dispatch schedules +3 -> second dispatch at t=4
        let mut sim = Simulation::<u32>::new();
        let a = sim
            .register(Recorder {
                seen: vec![],
                follow_up: Some((3.0, 1)),
            })
            .unwrap();
        sim.schedule(a, a, 1.0, 0, 0).unwrap();
        assert_eq!(sim.run().unwrap().secs(), 4.0);
        assert_eq!(sim.entity::<Recorder>(a).unwrap().seen, vec![(1.0, 0), (4.0, 1)]);
    }

    #[test]
    fn zero_delay_precedes_later_events() {
        let mut sim = Simulation::<u32>::new();
        let a = sim.register(Recorder::default()).unwrap();
        sim.schedule(a, a, 2.0, 0, 0).unwrap();
        sim.schedule(a, a, 0.0, 0, 0).unwrap();
        sim.run().unwrap();
        assert_eq!(sim.entity::<Recorder>(a).unwrap().seen, vec![(0.0, 1), (2.0, 0)]);
    }

    #[test]
    fn equal_times_dispatch_in_insertion_order() {
        let mut sim = Simulation::<u32>::new();
        let a = sim.register(Recorder::default()).unwrap();
        let b = sim.register(Recorder::default()).unwrap();
        sim.enable_trace();
        sim.schedule(a, b, 1.0, 0, 0).unwrap();
        sim.schedule(a, a, 1.0, 0, 0).unwrap();
        sim.schedule(b, b, 1.0, 0, 0).unwrap();
        sim.run().unwrap();
        let order: Vec<_> = sim.trace().iter().map(|d| (d.seq, d.target)).collect();
        assert_eq!(order, vec![(0, b), (1, a), (2, b)]);
    }

    #[test]
    fn negative_delay_rejected() {
        let mut sim = Simulation::<u32>::new();
        let a = sim.register(Recorder::default()).unwrap();
        assert!(matches!(sim.schedule(a, a, -1.0, 0, 0), Err(SimError::InvalidDelay(_))));
        assert!(matches!(sim.schedule(a, a, f64::NAN, 0, 0), Err(SimError::InvalidDelay(_))));
    }

    #[test]
    fn unknown_target_rejected() {
        let mut sim = Simulation::<u32>::new();
        let a = sim.register(Recorder::default()).unwrap();
        let err = sim.schedule(a, EntityId(9), 0.0, 0, 0).unwrap_err();
        assert_eq!(err, SimError::UnknownEntity(EntityId(9)));
    }

    #[test]
    fn entity_error_is_annotated_with_time() {
        let mut sim = Simulation::<u32>::new();
        let f = sim.register(Failing).unwrap();
        sim.schedule(f, f, 2.5, 0, 0).unwrap();
        match sim.run() {
            Err(SimError::AtTime { time, entity, .. }) => {
                assert_eq!(time.secs(), 2.5);
                assert_eq!(entity, f);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(sim.state(), SimState::Finished);
    }

    #[test]
    fn sim_time_rejects_negative_and_nan() {
        assert!(SimTime::new(-0.5).is_err());
        assert!(SimTime::new(f64::INFINITY).is_err());
        assert_eq!(SimTime::new(-0.0).unwrap(), SimTime::ZERO);
    }
}
