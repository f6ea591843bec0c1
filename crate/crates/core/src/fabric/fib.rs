use crate::model::PortId;

use super::FabricError;

/// One row of the forwarding table as reported to callers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FibEntry {
    pub port: PortId,
    pub util: f64,
}

/// Per-port utilization column of the forwarding table. Occupancy is kept as
/// an integer so that utilization is always exactly `occupancy / capacity`.
#[derive(Debug, Clone, PartialEq)]
pub struct Fib {
    occupancy: Vec<u32>,
    capacity: Vec<usize>,
}

impl Fib {
    pub fn new(capacities: Vec<usize>) -> Self {
        Self {
            occupancy: vec![0; capacities.len()],
            capacity: capacities,
        }
    }

    /// Applies one enqueue (`+1`) or dequeue (`-1`) on the tracked queue.
    pub fn update_util(&mut self, port: PortId, delta: i32) -> Result<(), FabricError> {
        let cap = self.capacity[port];
        let next = i64::from(self.occupancy[port]) + i64::from(delta);
        if next < 0 || next > cap as i64 {
            return Err(FabricError::UtilOutOfRange {
                port,
                occupancy: next,
                capacity: cap,
            });
        }
        self.occupancy[port] = next as u32;
        Ok(())
    }

    pub fn util(&self, port: PortId) -> f64 {
        match self.capacity[port] {
            0 => 1.0,
            cap => f64::from(self.occupancy[port]) / cap as f64,
        }
    }

    pub fn entry(&self, port: PortId) -> FibEntry {
        FibEntry {
            port,
            util: self.util(port),
        }
    }

    pub fn occupancy(&self, port: PortId) -> u32 {
        self.occupancy[port]
    }
}
