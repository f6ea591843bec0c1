use std::collections::BTreeMap;

use crate::engine::SimTime;
use crate::model::{FlowId, HopCounters};

/// A data frame as it reached its destination host (first copy only).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeliveryRecord {
    pub flow_id: FlowId,
    pub seq: u32,
    pub payload_len: u32,
    pub counters: HopCounters,
    pub created_at: SimTime,
    pub delivered_at: SimTime,
}

impl DeliveryRecord {
    pub fn delay(&self) -> SimTime {
        self.delivered_at.saturating_sub(self.created_at)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SwitchCounts {
    pub name: String,
    pub bounces: u64,
    pub forwards: u64,
    pub drops: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BounceReport {
    pub by_switch: Vec<SwitchCounts>,
    pub total_bounce_events: u64,
    /// Delivered frames bounced at least once.
    pub bounced_frames: u64,
    pub delivered_frames: u64,
    pub max_distance_histogram: BTreeMap<u32, u64>,
    /// `(total_hop, frames with exactly that count, cumulative fraction)`.
    pub total_hop_cdf: Vec<(u32, u64, f64)>,
}

impl BounceReport {
    pub fn bounce_fraction(&self) -> f64 {
        ratio(self.bounced_frames, self.delivered_frames)
    }

    pub fn mean_total_hop(&self) -> f64 {
        let sum: u64 = self
            .total_hop_cdf
            .iter()
            .map(|&(h, n, _)| u64::from(h) * n)
            .sum();
        ratio(sum, self.delivered_frames)
    }

    /// Fraction of delivered frames with `total_hop <= hops`.
    pub fn fraction_within(&self, hops: u32) -> f64 {
        self.total_hop_cdf
            .iter()
            .take_while(|&&(h, _, _)| h <= hops)
            .last()
            .map_or(0.0, |&(_, _, c)| c)
    }

    pub fn bouncing_switches(&self) -> Vec<&str> {
        self.by_switch
            .iter()
            .filter(|s| s.bounces > 0)
            .map(|s| s.name.as_str())
            .collect()
    }
}

pub(crate) fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn bounce_report(deliveries: &[DeliveryRecord], switches: &[SwitchCounts]) -> BounceReport {
    let mut hist = BTreeMap::new();
    let mut hops: BTreeMap<u32, u64> = BTreeMap::new();
    let mut bounced = 0;
    for d in deliveries {
        *hist.entry(d.counters.max_bounced_distance).or_insert(0) += 1;
        *hops.entry(d.counters.total_hop).or_insert(0) += 1;
        if d.counters.bounced_hop > 0 {
            bounced += 1;
        }
    }
    let total = deliveries.len() as u64;
    let mut cum = 0;
    let total_hop_cdf = hops
        .into_iter()
        .map(|(h, n)| {
            cum += n;
            (h, n, ratio(cum, total))
        })
        .collect();
    BounceReport {
        by_switch: switches.to_vec(),
        total_bounce_events: switches.iter().map(|s| s.bounces).sum(),
        bounced_frames: bounced,
        delivered_frames: total,
        max_distance_histogram: hist,
        total_hop_cdf,
    }
}

/// Per-flow results.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSummary {
    pub flow_id: FlowId,
    pub src: String,
    pub dst: String,
    pub request_index: u32,
    pub started_at: SimTime,
    pub completed_at: Option<SimTime>,
    pub segments_total: u32,
    pub segments_sent: u64,
    pub segments_received: u64,
    pub retransmissions: u64,
    pub drops: u64,
    pub per_packet_delays: Vec<SimTime>,
    pub total_hops: Vec<u32>,
    pub bounces_by_switch: BTreeMap<String, u64>,
    pub max_bounced_distance_histogram: BTreeMap<u32, u64>,
}

impl FlowSummary {
    /// Request send to last segment delivered.
    pub fn fct(&self) -> Option<SimTime> {
        self.completed_at.map(|c| c.saturating_sub(self.started_at))
    }

    pub fn mean_delay(&self) -> Option<f64> {
        if self.per_packet_delays.is_empty() {
            return None;
        }
        let sum: f64 = self.per_packet_delays.iter().map(|d| d.as_secs_f64()).sum();
        Some(sum / self.per_packet_delays.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(bh: u32, max: u32, total: u32) -> DeliveryRecord {
        DeliveryRecord {
            flow_id: 0,
            seq: 0,
            payload_len: 1500,
            counters: HopCounters {
                bounced_hop: bh,
                bounced_distance: 0,
                max_bounced_distance: max,
                total_hop: total,
            },
            created_at: SimTime::ZERO,
            delivered_at: SimTime(1),
        }
    }

    #[test]
    fn fractions_add_up() {
        let d = vec![rec(0, 0, 4), rec(1, 1, 6), rec(2, 1, 8), rec(0, 0, 4)];
        let r = bounce_report(&d, &[]);
        assert_eq!(r.bounce_fraction(), 0.5);
        assert_eq!(r.max_distance_histogram[&0], 2);
        assert_eq!(r.max_distance_histogram[&1], 2);
        assert_eq!(r.fraction_within(4), 0.5);
        assert_eq!(r.fraction_within(7), 0.75);
        assert_eq!(r.fraction_within(3), 0.0);
        assert_eq!(r.mean_total_hop(), 5.5);
        assert_eq!(r.total_hop_cdf.last().unwrap().2, 1.0);
    }

    #[test]
    fn no_bounces_in_baseline() {
        let sw = vec![SwitchCounts {
            name: "S7".into(),
            bounces: 0,
            forwards: 10,
            drops: 2,
        }];
        let r = bounce_report(&[rec(0, 0, 4)], &sw);
        assert_eq!(r.total_bounce_events, 0);
        assert!(r.bouncing_switches().is_empty());
    }
}
