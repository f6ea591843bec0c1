//! Frames, links and the per-frame bounce counters shared by switches and
//! hosts.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::SimTime;

/// Header (14) + FCS (4) + preamble/SFD (8) + inter-frame gap (12).
pub const ETHERNET_OVERHEAD_BYTES: u32 = 38;

pub const DEFAULT_LINK_RATE_BPS: f64 = 1e9;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("link rate must be positive, got {0}")]
    ZeroRate(f64),
    #[error("invalid MAC address {0:?}")]
    BadMac(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MacAddr(pub [u8; 6]);

impl MacAddr {
    pub fn octets(&self) -> &[u8; 6] {
        &self.0
    }
}

impl fmt::Display for MacAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let o = &self.0;
        write!(
            f,
            "{:02X}-{:02X}-{:02X}-{:02X}-{:02X}-{:02X}",
            o[0], o[1], o[2], o[3], o[4], o[5]
        )
    }
}

impl FromStr for MacAddr {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(['-', ':']).collect();
        if parts.len() != 6 {
            return Err(ModelError::BadMac(s.to_string()));
        }
        let mut out = [0u8; 6];
        for (slot, part) in out.iter_mut().zip(parts) {
            *slot = u8::from_str_radix(part, 16).map_err(|_| ModelError::BadMac(s.to_string()))?;
        }
        Ok(MacAddr(out))
    }
}

pub type FrameId = u64;
pub type FlowId = u32;
pub type PortId = usize;

/// What a frame carries. Only data frames take part in bounce decisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameKind {
    Data,
    /// Cumulative acknowledgement: next expected segment index.
    Ack { next_expected: u32 },
    Request { request_index: u32 },
}

impl FrameKind {
    pub fn label(&self) -> &'static str {
        match self {
            FrameKind::Data => "data",
            FrameKind::Ack { .. } => "ack",
            FrameKind::Request { .. } => "request",
        }
    }
}

/// The four counters each frame carries through the fabric.
///
/// `bounced_hop` is the input to the bounce probability. `bounced_distance`
/// is how far the frame currently sits behind the last switch it reached
/// normally; it never goes below zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct HopCounters {
    pub bounced_hop: u32,
    pub bounced_distance: u32,
    pub max_bounced_distance: u32,
    pub total_hop: u32,
}

impl HopCounters {
    pub fn record_bounce(mut self) -> Self {
        self.bounced_hop += 1;
        self.bounced_distance += 1;
        self.max_bounced_distance = self.max_bounced_distance.max(self.bounced_distance);
        self.total_hop += 1;
        self
    }

    pub fn record_forward(mut self) -> Self {
        self.bounced_distance = self.bounced_distance.saturating_sub(1);
        self.total_hop += 1;
        self
    }
}

/// A link-layer frame. Frames are moved, never cloned, while in flight.
#[derive(Debug, PartialEq)]
pub struct Frame {
    pub id: FrameId,
    pub kind: FrameKind,
    pub src: MacAddr,
    pub dst: MacAddr,
    pub flow_id: FlowId,
    /// Segment index within the flow.
    pub seq: u32,
    pub payload_len: u32,
    pub counters: HopCounters,
    /// Sending order stamped by the transport (1-based, 0 when unused).
    pub send_order: u32,
    pub created_at: SimTime,
    /// Set when the last hop decision was a bounce.
    pub bounced: bool,
    /// Ingress ports at the switches this frame reached normally, innermost
    /// last. A bounce pops the bouncing switch's entry and leaves through it.
    pub trail: Vec<PortId>,
}

impl Frame {
    pub fn new(
        id: FrameId,
        kind: FrameKind,
        src: MacAddr,
        dst: MacAddr,
        flow_id: FlowId,
        seq: u32,
        payload_len: u32,
        created_at: SimTime,
    ) -> Self {
        Self {
            id,
            kind,
            src,
            dst,
            flow_id,
            seq,
            payload_len,
            counters: HopCounters::default(),
            send_order: 0,
            created_at,
            bounced: false,
            trail: Vec::new(),
        }
    }

    pub fn is_data(&self) -> bool {
        matches!(self.kind, FrameKind::Data)
    }

    pub fn record_bounce(&mut self) {
        self.counters = self.counters.record_bounce();
        self.bounced = true;
    }

    pub fn record_forward(&mut self) {
        self.counters = self.counters.record_forward();
        self.bounced = false;
    }

    pub fn wire_bytes(&self) -> u32 {
        self.payload_len + ETHERNET_OVERHEAD_BYTES
    }
}

/// Serialization time of a frame with `payload` bytes, in seconds.
pub fn wire_time(payload: u32, rate_bps: f64) -> Result<f64, ModelError> {
    if !(rate_bps > 0.0) {
        return Err(ModelError::ZeroRate(rate_bps));
    }
    Ok(f64::from(payload + ETHERNET_OVERHEAD_BYTES) * 8.0 / rate_bps)
}

/// Full-duplex point-to-point link parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub rate_bps: f64,
    pub propagation_delay: SimTime,
}

impl Default for Link {
    fn default() -> Self {
        Self {
            rate_bps: DEFAULT_LINK_RATE_BPS,
            propagation_delay: SimTime::ZERO,
        }
    }
}

impl Link {
    pub fn new(rate_bps: f64, propagation_delay: SimTime) -> Result<Self, ModelError> {
        wire_time(0, rate_bps)?;
        Ok(Self {
            rate_bps,
            propagation_delay,
        })
    }

    /// Serialization time rounded up to whole nanoseconds.
    pub fn tx_time(&self, payload: u32) -> SimTime {
        let bits = u64::from(payload + ETHERNET_OVERHEAD_BYTES) * 8;
        let ns = (bits as f64 * 1e9 / self.rate_bps).ceil();
        SimTime(ns as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(bh: u32, d: u32, m: u32, t: u32) -> HopCounters {
        HopCounters {
            bounced_hop: bh,
            bounced_distance: d,
            max_bounced_distance: m,
            total_hop: t,
        }
    }

    #[test]
    fn bounce_increments_all_counters() {
        assert_eq!(c(0, 0, 0, 3).record_bounce(), c(1, 1, 1, 4));
        assert_eq!(c(1, 0, 1, 5).record_bounce().bounced_hop, 2);
        assert_eq!(c(0, 0, 0, 3).record_bounce().record_bounce(), c(2, 2, 2, 5));
    }

    #[test]
    fn forward_clamps_distance() {
        assert_eq!(c(1, 1, 1, 4).record_forward(), c(1, 0, 1, 5));
        assert_eq!(c(0, 0, 0, 1).record_forward(), c(0, 0, 0, 2));
        let twice = c(2, 2, 2, 5).record_forward().record_forward();
        assert_eq!(twice, c(2, 0, 2, 7));
    }

    #[test]
    fn wire_time_examples() {
        assert!((wire_time(1500, 1e9).unwrap() - 12.304e-6).abs() < 1e-15);
        assert!((wire_time(0, 1e9).unwrap() - 0.304e-6).abs() < 1e-15);
        let half = wire_time(1500, 2e9).unwrap();
        assert!((half * 2.0 - wire_time(1500, 1e9).unwrap()).abs() < 1e-15);
        assert_eq!(wire_time(1500, 0.0), Err(ModelError::ZeroRate(0.0)));
    }

    #[test]
    fn link_tx_time_in_nanos() {
        let l = Link::default();
        assert_eq!(l.tx_time(1500), SimTime(12_304));
        assert_eq!(l.tx_time(0), SimTime(304));
    }

    #[test]
    fn mac_display_parse() {
        let m = MacAddr([0x0A, 0xAA, 0x0A, 0, 0, 1]);
        assert_eq!(m.to_string(), "0A-AA-0A-00-00-01");
        assert_eq!("0A-AA-0A-00-00-01".parse::<MacAddr>().unwrap(), m);
        assert!("0A-AA".parse::<MacAddr>().is_err());
    }

    proptest::proptest! {
        #[test]
        fn counter_invariants_hold(ops in proptest::collection::vec(proptest::bool::ANY, 0..64)) {
            let mut cur = HopCounters::default();
            let mut prev_max = 0;
            for bounce in ops {
                cur = if bounce { cur.record_bounce() } else { cur.record_forward() };
                proptest::prop_assert!(cur.bounced_hop >= cur.max_bounced_distance);
                proptest::prop_assert!(cur.max_bounced_distance >= cur.bounced_distance);
                proptest::prop_assert!(cur.max_bounced_distance >= prev_max);
                prev_max = cur.max_bounced_distance;
            }
        }
    }
}
