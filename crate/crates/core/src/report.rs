//! Run results and their CSV/JSON renderings.

use std::fmt::Write as _;

use serde::Serialize;

use crate::cloud::{CloudletRecord, CloudletStatus, VmPlacement};

pub const CSV_HEADER: &str = "cloudlet_id,status,datacenter_id,vm_id,exec_time,start_time,finish_time";
pub const PLACEMENTS_HEADER: &str = "datacenter_id,vm_id,host_id";
pub const SAMPLES_HEADER: &str = "datacenter_id,time,vm_id,running_cloudlets";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleRecord {
    pub datacenter_id: u32,
    pub time: f64,
    pub vm_id: u32,
    pub running_cloudlets: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimulationReport {
    pub cloudlets: Vec<CloudletRecord>,
    pub placements: Vec<VmPlacement>,
    pub samples: Vec<SampleRecord>,
    /// `(datacenter_id, update_cloudlet_processing invocations)`.
    pub datacenter_updates: Vec<(u32, u64)>,
    pub final_clock: f64,
    pub overhead_ms: u64,
}

#[derive(Serialize)]
struct JsonRow {
    cloudlet_id: u32,
    status: CloudletStatus,
    datacenter_id: u32,
    vm_id: u32,
    exec_time: Option<f64>,
    start_time: Option<f64>,
    finish_time: Option<f64>,
}

fn time(value: Option<f64>) -> String {
    value.map(|t| format!("{t:.6}")).unwrap_or_default()
}

impl SimulationReport {
    /// Puts every section in its canonical order.
    pub fn normalize(&mut self) {
        self.cloudlets
            .sort_by_key(|r| (r.cloudlet_id, r.datacenter_id, r.vm_id));
        self.placements.sort_by_key(|p| (p.datacenter_id, p.vm_id));
        self.samples.sort_by(|a, b| {
            a.time
                .total_cmp(&b.time)
                .then(a.datacenter_id.cmp(&b.datacenter_id))
                .then(a.vm_id.cmp(&b.vm_id))
        });
        self.datacenter_updates.sort();
    }

    pub fn record(&self, cloudlet_id: u32) -> Option<&CloudletRecord> {
        self.cloudlets.iter().find(|r| r.cloudlet_id == cloudlet_id)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.cloudlets {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.cloudlet_id,
                r.status,
                r.datacenter_id,
                r.vm_id,
                time(r.exec_time()),
                time(r.start_time),
                time(r.finish_time)
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<JsonRow> = self
            .cloudlets
            .iter()
            .map(|r| JsonRow {
                cloudlet_id: r.cloudlet_id,
                status: r.status,
                datacenter_id: r.datacenter_id,
                vm_id: r.vm_id,
                exec_time: r.exec_time(),
                start_time: r.start_time,
                finish_time: r.finish_time,
            })
            .collect();
        let mut out = serde_json::to_string_pretty(&rows).expect("rows serialize");
        out.push('\n');
        out
    }

    pub fn placements_csv(&self) -> String {
        let mut out = String::from(PLACEMENTS_HEADER);
        out.push('\n');
        for p in &self.placements {
            let host = p.host_id.map(|h| h.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{},{}", p.datacenter_id, p.vm_id, host);
        }
        out
    }

    pub fn samples_csv(&self) -> String {
        let mut out = String::from(SAMPLES_HEADER);
        out.push('\n');
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{},{:.6},{},{}",
                s.datacenter_id, s.time, s.vm_id, s.running_cloudlets
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: u32, status: CloudletStatus, start: Option<f64>, finish: Option<f64>) -> CloudletRecord {
        CloudletRecord {
            cloudlet_id: id,
            status,
            datacenter_id: 0,
            vm_id: 0,
            start_time: start,
            finish_time: finish,
        }
    }

    #[test]
    fn csv_rows_sorted_with_fixed_precision() {
        let mut report = SimulationReport {
            cloudlets: vec![
                record(2, CloudletStatus::Failed, None, None),
                record(1, CloudletStatus::Success, Some(0.0), Some(1.0)),
            ],
            ..Default::default()
        };
        report.normalize();
        assert_eq!(
            report.to_csv(),
            "cloudlet_id,status,datacenter_id,vm_id,exec_time,start_time,finish_time\n\
             1,SUCCESS,0,0,1.000000,0.000000,1.000000\n\
             2,FAILED,0,0,,,\n"
        );
    }

    #[test]
    fn json_mirrors_csv_fields() {
        let report = SimulationReport {
            cloudlets: vec![record(0, CloudletStatus::Success, Some(0.5), Some(2.0))],
            ..Default::default()
        };
        let v: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        let row = &v[0];
        assert_eq!(row["status"], "SUCCESS");
        assert_eq!(row["exec_time"], 1.5);
        let keys: Vec<_> = row.as_object().unwrap().keys().cloned().collect();
        let header: Vec<_> = CSV_HEADER.split(',').map(String::from).collect();
        let mut sorted_header = header.clone();
        sorted_header.sort();
        assert_eq!(keys, sorted_header);
    }
}
