//! The bouncing switch: utilization-aware forwarding table, probabilistic
//! bounce decision, dual-priority output queues. Also the drop-tail baseline.

mod fib;
mod prob;
mod queue;
mod switch;

use thiserror::Error;

use crate::model::{FrameId, MacAddr, PortId};

pub use fib::{Fib, FibEntry};
pub use prob::{bounce_probability, BounceParams};
pub use queue::{OutputPort, QueueKind};
pub use switch::{Disposition, Switch, SwitchMode};

#[derive(Debug, Error, PartialEq)]
pub enum FabricError {
    #[error("theta must lie in [0, 1], got {0}")]
    BadTheta(f64),
    #[error("lambda must be finite and non-negative, got {0}")]
    BadLambda(f64),
    #[error("utilization must lie in [0, 1], got {0}")]
    BadUtil(f64),
    #[error("{switch}: no route for {dst}")]
    NoRoute { switch: String, dst: MacAddr },
    #[error("{switch}: route for {dst} points at missing port {port}")]
    NoSuchPort {
        switch: String,
        dst: MacAddr,
        port: PortId,
    },
    #[error("{switch}: bounce queue of port {port} overflowed (capacity {capacity})")]
    BounceOverflow {
        switch: String,
        port: PortId,
        capacity: usize,
    },
    #[error("port {port}: occupancy {occupancy} outside [0, {capacity}]")]
    UtilOutOfRange {
        port: PortId,
        occupancy: i64,
        capacity: usize,
    },
    #[error("{switch}: bounced frame {frame} carries no return port")]
    EmptyTrail { switch: String, frame: FrameId },
}
