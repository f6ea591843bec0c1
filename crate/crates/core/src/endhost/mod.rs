//! Hosts: burst sources, request-reply transport, order instrumentation and
//! re-injection of frames bounced back to their source.

mod burst;
mod order;
mod transport;

use thiserror::Error;

use crate::engine::SimTime;
use crate::fabric::{OutputPort, QueueKind};
use crate::model::{Frame, FrameId, MacAddr};

pub use burst::{BurstGen, BurstGenCfg};
pub use order::OrderLog;
pub use transport::{Receiver, RenoCfg, Segment, Sender, TransportCfg, TransportMode};

#[derive(Debug, Error, PartialEq)]
pub enum EndhostError {
    #[error("invalid burst generator: {0}")]
    BadBurst(String),
    #[error("invalid transport: {0}")]
    BadTransport(String),
    #[error("{host}: frame {frame} for {dst} is neither addressed to nor bounced back to this host")]
    Misrouted {
        host: String,
        frame: FrameId,
        dst: MacAddr,
    },
    #[error("{host}: bounce queue overflowed (capacity {capacity})")]
    BounceOverflow { host: String, capacity: usize },
}

/// What a host does with an arriving frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arrival {
    Deliver,
    Reinject,
}

/// A host's network side: one port with the same two egress queues as a
/// switch port. The normal queue is the sender buffer.
#[derive(Debug)]
pub struct Host {
    pub name: String,
    pub mac: MacAddr,
    pub port: OutputPort,
    pub reinjected: u64,
    pub overflows: u64,
}

impl Host {
    pub fn new(name: impl Into<String>, mac: MacAddr, sender_capacity: usize, bounce_capacity: usize) -> Self {
        Self {
            name: name.into(),
            mac,
            port: OutputPort::new(sender_capacity, bounce_capacity),
            reinjected: 0,
            overflows: 0,
        }
    }

    pub fn classify(&self, frame: &Frame) -> Result<Arrival, EndhostError> {
        if frame.dst == self.mac {
            Ok(Arrival::Deliver)
        } else if frame.bounced && frame.src == self.mac {
            Ok(Arrival::Reinject)
        } else {
            Err(EndhostError::Misrouted {
                host: self.name.clone(),
                frame: frame.id,
                dst: frame.dst,
            })
        }
    }

    /// Queues a new frame for sending. The frame is handed back when the
    /// sender buffer is full. The first link is not counted in `total_hop`,
    /// so an unbounced frame arrives with one hop per switch on its path.
    pub fn send(&mut self, frame: Frame, now: SimTime) -> Result<(), Frame> {
        self.port.enqueue(QueueKind::Normal, frame, now).inspect_err(|_| {
            self.overflows += 1;
        })
    }

    /// Sends a frame that was bounced all the way back out again, ahead of
    /// the sender buffer.
    pub fn reinject(&mut self, mut frame: Frame, now: SimTime) -> Result<(), EndhostError> {
        frame.record_forward();
        let capacity = self.port.capacity(QueueKind::Bounce);
        self.port
            .enqueue(QueueKind::Bounce, frame, now)
            .map_err(|_| EndhostError::BounceOverflow {
                host: self.name.clone(),
                capacity,
            })?;
        self.reinjected += 1;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FrameKind;

    fn mac(i: u8) -> MacAddr {
        MacAddr([0x0A, 0xAA, 0x0A, 0, 0, i])
    }

    fn frame(src: u8, dst: u8) -> Frame {
        Frame::new(1, FrameKind::Data, mac(src), mac(dst), 0, 0, 1500, SimTime::ZERO)
    }

    #[test]
    fn delivers_and_reinjects() {
        let mut h = Host::new("H1", mac(1), 4, 4);
        assert_eq!(h.classify(&frame(2, 1)).unwrap(), Arrival::Deliver);

        let mut own = frame(1, 4);
        h.send(Frame::new(0, FrameKind::Data, mac(1), mac(4), 0, 0, 1500, SimTime::ZERO), SimTime::ZERO)
            .unwrap();
        // bounced straight back by the first switch
        own.record_bounce();
        assert_eq!(h.classify(&own).unwrap(), Arrival::Reinject);
        h.reinject(own, SimTime(1)).unwrap();
        let (f, kind) = h.port.next_to_transmit(SimTime(2)).unwrap();
        assert_eq!(kind, QueueKind::Bounce);
        assert!(!f.bounced);
        assert_eq!(f.counters.total_hop, 2);
        assert_eq!(f.counters.bounced_distance, 0);
    }

    #[test]
    fn misrouted_frames_are_errors() {
        let h = Host::new("H1", mac(1), 4, 4);
        assert!(h.classify(&frame(2, 3)).is_err());
        let mut f = frame(2, 3);
        f.record_bounce();
        assert!(h.classify(&f).is_err());
    }

    #[test]
    fn full_sender_buffer_hands_frame_back() {
        let mut h = Host::new("H1", mac(1), 1, 1);
        h.send(frame(1, 4), SimTime::ZERO).unwrap();
        assert!(h.send(frame(1, 4), SimTime::ZERO).is_err());
        assert_eq!(h.overflows, 1);
    }
}
