use std::fmt;

use serde::Serialize;

use crate::kernel::{SimError, SimTime};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CloudletStatus {
    Queued,
    Running,
    Success,
    Failed,
}

impl fmt::Display for CloudletStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CloudletStatus::Queued => "QUEUED",
            CloudletStatus::Running => "RUNNING",
            CloudletStatus::Success => "SUCCESS",
            CloudletStatus::Failed => "FAILED",
        })
    }
}

/// A unit of work of `length_mi` million instructions bound to one VM.
#[derive(Debug, Clone, PartialEq)]
pub struct Cloudlet {
    pub id: u32,
    pub length_mi: f64,
    pub pes: u32,
    pub remaining_mi: f64,
    pub status: CloudletStatus,
    pub start_time: Option<SimTime>,
    pub finish_time: Option<SimTime>,
    pub vm_id: u32,
}

impl Cloudlet {
    pub fn new(id: u32, length_mi: f64, pes: u32, vm_id: u32) -> Result<Self, SimError> {
        if !(length_mi.is_finite() && length_mi > 0.0) {
            return Err(SimError::Configuration(format!(
                "cloudlet {id}: length must be positive, got {length_mi}"
            )));
        }
        if pes == 0 {
            return Err(SimError::Configuration(format!("cloudlet {id}: needs at least one PE")));
        }
        Ok(Cloudlet {
            id,
            length_mi,
            pes,
            remaining_mi: length_mi,
            status: CloudletStatus::Queued,
            start_time: None,
            finish_time: None,
            vm_id,
        })
    }

    pub fn exec_time(&self) -> Option<f64> {
        match (self.start_time, self.finish_time) {
            (Some(s), Some(f)) => Some(f.secs() - s.secs()),
            _ => None,
        }
    }
}
