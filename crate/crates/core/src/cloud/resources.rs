use std::collections::BTreeMap;

use serde::Serialize;

use crate::kernel::SimError;

/// A processing element (one simulated core).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pe {
    pub id: u32,
    pub mips: f64,
}

impl Pe {
    pub fn new(id: u32, mips: f64) -> Result<Self, SimError> {
        if !(mips.is_finite() && mips > 0.0) {
            return Err(SimError::Configuration(format!("PE {id}: mips must be positive, got {mips}")));
        }
        Ok(Pe { id, mips })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Reservation {
    pub pes: u32,
    pub ram_mb: u64,
    pub bw_mbps: u64,
    pub storage_mb: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Host {
    pub id: u32,
    pub pes: Vec<Pe>,
    pub ram_mb: u64,
    pub bw_mbps: u64,
    pub storage_mb: u64,
    allocated: BTreeMap<u32, Reservation>,
}

impl Host {
    pub fn new(id: u32, pes: Vec<Pe>, ram_mb: u64, bw_mbps: u64, storage_mb: u64) -> Self {
        Host {
            id,
            pes,
            ram_mb,
            bw_mbps,
            storage_mb,
            allocated: BTreeMap::new(),
        }
    }

    /// `count` identical PEs of `mips` each.
    pub fn with_uniform_pes(
        id: u32,
        count: u32,
        mips: f64,
        ram_mb: u64,
        bw_mbps: u64,
        storage_mb: u64,
    ) -> Result<Self, SimError> {
        let pes = (0..count).map(|i| Pe::new(i, mips)).collect::<Result<Vec<_>, _>>()?;
        Ok(Host::new(id, pes, ram_mb, bw_mbps, storage_mb))
    }

    fn reserved(&self) -> Reservation {
        self.allocated.values().fold(
            Reservation {
                pes: 0,
                ram_mb: 0,
                bw_mbps: 0,
                storage_mb: 0,
            },
            |acc, r| Reservation {
                pes: acc.pes + r.pes,
                ram_mb: acc.ram_mb + r.ram_mb,
                bw_mbps: acc.bw_mbps + r.bw_mbps,
                storage_mb: acc.storage_mb + r.storage_mb,
            },
        )
    }

    pub fn free_pes(&self) -> u32 {
        (self.pes.len() as u32).saturating_sub(self.reserved().pes)
    }

    pub fn free_ram_mb(&self) -> u64 {
        self.ram_mb.saturating_sub(self.reserved().ram_mb)
    }

    pub fn free_bw_mbps(&self) -> u64 {
        self.bw_mbps.saturating_sub(self.reserved().bw_mbps)
    }

    pub fn free_storage_mb(&self) -> u64 {
        self.storage_mb.saturating_sub(self.reserved().storage_mb)
    }

    /// Whether every demand of `vm` fits in the unreserved capacity.
    pub fn is_suitable_for(&self, vm: &Vm) -> bool {
        let used = self.reserved();
        let free_pes = (self.pes.len() as u32).saturating_sub(used.pes);
        !self.allocated.contains_key(&vm.id)
            && free_pes >= vm.pes
            && self.ram_mb.saturating_sub(used.ram_mb) >= vm.ram_mb
            && self.bw_mbps.saturating_sub(used.bw_mbps) >= vm.bw_mbps
            && self.storage_mb.saturating_sub(used.storage_mb) >= vm.size_mb
    }

    pub fn reserve(&mut self, vm: &Vm) -> Result<(), SimError> {
        if !self.is_suitable_for(vm) {
            return Err(SimError::Configuration(format!(
                "host {} cannot accommodate vm {}",
                self.id, vm.id
            )));
        }
        self.allocated.insert(
            vm.id,
            Reservation {
                pes: vm.pes,
                ram_mb: vm.ram_mb,
                bw_mbps: vm.bw_mbps,
                storage_mb: vm.size_mb,
            },
        );
        Ok(())
    }

    pub fn release(&mut self, vm_id: u32) -> Option<Reservation> {
        self.allocated.remove(&vm_id)
    }

    pub fn allocated_vms(&self) -> impl Iterator<Item = (u32, &Reservation)> {
        self.allocated.iter().map(|(id, r)| (*id, r))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Vm {
    pub id: u32,
    /// Requested MIPS per PE.
    pub mips: f64,
    pub pes: u32,
    pub ram_mb: u64,
    pub bw_mbps: u64,
    pub size_mb: u64,
    pub host: Option<u32>,
}

impl Vm {
    pub fn new(id: u32, mips: f64, pes: u32, ram_mb: u64, bw_mbps: u64, size_mb: u64) -> Result<Self, SimError> {
        if !(mips.is_finite() && mips > 0.0) {
            return Err(SimError::Configuration(format!("vm {id}: mips must be positive, got {mips}")));
        }
        if pes == 0 {
            return Err(SimError::Configuration(format!("vm {id}: needs at least one PE")));
        }
        Ok(Vm {
            id,
            mips,
            pes,
            ram_mb,
            bw_mbps,
            size_mb,
            host: None,
        })
    }

    /// Capacity granted on allocation: requested MIPS on every PE.
    pub fn total_mips(&self) -> f64 {
        self.mips * f64::from(self.pes)
    }
}
