use crate::kernel::{SimError, SimTime};

use super::{Cloudlet, CloudletStatus};

/// Distributes a VM's capacity among the cloudlets submitted to it.
pub trait CloudletScheduler {
    /// Queues a cloudlet; it starts running at the next `update`.
    fn submit(&mut self, cloudlet: Cloudlet, now: SimTime);

    /// Advances every running cloudlet to `now`, retires the ones that are
    /// done, admits queued ones, and returns the next estimated completion.
    /// Must never increase any cloudlet's remaining length.
    fn update(&mut self, now: SimTime, vm_mips: f64) -> Result<Option<SimTime>, SimError>;

    /// Drains cloudlets completed by previous updates.
    fn take_finished(&mut self) -> Vec<Cloudlet>;

    /// Cloudlets currently running or queued.
    fn active(&self) -> usize;
}

#[derive(Debug, Clone)]
struct Share {
    cloudlet: Cloudlet,
    anchor_time: f64,
    anchor_remaining: f64,
    expected_finish: f64,
}

/// Every running cloudlet receives `vm_mips / running` MIPS.
///
/// Progress is tracked from an anchor taken whenever the share changes, so the
/// projected finish of a cloudlet only depends on the instants at which the
/// running set changed, not on how often `update` is called in between.
#[derive(Debug, Clone, Default)]
pub struct TimeSharedScheduler {
    running: Vec<Share>,
    queued: Vec<Cloudlet>,
    finished: Vec<Cloudlet>,
    rate: f64,
}

impl TimeSharedScheduler {
    pub fn new() -> Self {
        Self::default()
    }

    /// Per-cloudlet MIPS of every running cloudlet.
    pub fn rates(&self) -> Vec<f64> {
        vec![self.rate; self.running.len()]
    }

    pub fn running(&self) -> impl Iterator<Item = &Cloudlet> {
        self.running.iter().map(|s| &s.cloudlet)
    }
}

impl CloudletScheduler for TimeSharedScheduler {
    fn submit(&mut self, mut cloudlet: Cloudlet, _now: SimTime) {
        cloudlet.status = CloudletStatus::Queued;
        self.queued.push(cloudlet);
    }

    fn update(&mut self, now: SimTime, vm_mips: f64) -> Result<Option<SimTime>, SimError> {
        if !(vm_mips.is_finite() && vm_mips > 0.0) {
            return Err(SimError::Configuration(format!(
                "VM capacity must be positive, got {vm_mips} MIPS"
            )));
        }
        let t = now.secs();

        for share in &mut self.running {
            let remaining = (share.anchor_remaining - self.rate * (t - share.anchor_time)).max(0.0);
            share.cloudlet.remaining_mi = remaining.min(share.cloudlet.remaining_mi);
        }

        let before = self.running.len();
        let mut kept = Vec::with_capacity(before);
        for mut share in self.running.drain(..) {
            if share.expected_finish <= t {
                share.cloudlet.remaining_mi = 0.0;
                share.cloudlet.status = CloudletStatus::Success;
                share.cloudlet.finish_time = Some(now);
                self.finished.push(share.cloudlet);
            } else {
                kept.push(share);
            }
        }
        let mut changed = kept.len() != before;
        self.running = kept;

        for mut cloudlet in self.queued.drain(..) {
            cloudlet.status = CloudletStatus::Running;
            cloudlet.start_time = Some(now);
            self.running.push(Share {
                anchor_remaining: cloudlet.remaining_mi,
                cloudlet,
                anchor_time: t,
                expected_finish: f64::INFINITY,
            });
            changed = true;
        }

        if self.running.is_empty() {
            self.rate = 0.0;
            return Ok(None);
        }

        let rate = vm_mips / self.running.len() as f64;
        if changed || rate != self.rate {
            self.rate = rate;
            for share in &mut self.running {
                share.anchor_time = t;
                share.anchor_remaining = share.cloudlet.remaining_mi;
                share.expected_finish = t + share.anchor_remaining / rate;
            }
        }

        let next = self
            .running
            .iter()
            .map(|s| s.expected_finish)
            .fold(f64::INFINITY, f64::min);
        SimTime::new(next).map(Some)
    }

    fn take_finished(&mut self) -> Vec<Cloudlet> {
        std::mem::take(&mut self.finished)
    }

    fn active(&self) -> usize {
        self.running.len() + self.queued.len()
    }
}
