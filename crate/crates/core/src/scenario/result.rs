use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::engine::{SimReport, SimTime};
use crate::fabric::QueueKind;
use crate::metrics::{
    bounce_report, ratio, reorder_density, reorder_entropy, time_ratio, util_variance,
    BounceReport, DeliveryRecord, FlowSummary, ReorderDistribution, SwitchCounts, SwitchUtil,
};
use crate::model::{FlowId, FrameId, HopCounters, PortId};
use crate::topology::NodeIndex;

use super::config::ScenarioConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowKindLabel {
    Burst,
    Session,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceEvent {
    /// Frame queued at its source host.
    Enqueue,
    /// Switch queued the frame toward its destination.
    Forward,
    /// Switch queued the frame back toward its previous hop.
    Bounce,
    /// Source host queued a frame that was bounced back to it.
    Reinject,
    Dequeue,
    Deliver,
    Drop,
}

impl TraceEvent {
    pub fn label(self) -> &'static str {
        match self {
            TraceEvent::Enqueue => "enqueue",
            TraceEvent::Forward => "forward",
            TraceEvent::Bounce => "bounce",
            TraceEvent::Reinject => "reinject",
            TraceEvent::Dequeue => "dequeue",
            TraceEvent::Deliver => "deliver",
            TraceEvent::Drop => "drop",
        }
    }

    /// Whether the event puts a frame into the row's queue.
    pub fn is_insertion(self) -> bool {
        matches!(
            self,
            TraceEvent::Enqueue | TraceEvent::Forward | TraceEvent::Bounce | TraceEvent::Reinject
        )
    }
}

/// One per-frame event. Counters are the frame's values after the event.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub time: SimTime,
    pub frame_id: FrameId,
    pub flow_id: FlowId,
    pub seq: u32,
    pub kind: &'static str,
    pub node: NodeIndex,
    pub port: PortId,
    pub queue: Option<QueueKind>,
    pub event: TraceEvent,
    pub counters: HopCounters,
}

/// Where every frame created during a run ended up.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameAccounting {
    pub created: u64,
    /// Reached the host they were addressed to.
    pub consumed: u64,
    /// Dropped at a full switch queue.
    pub dropped: u64,
    /// Refused by a full sender buffer.
    pub sender_overflow: u64,
    pub queued: u64,
    pub in_flight: u64,
    pub data_created: u64,
    /// Data frames lost to either kind of overflow.
    pub data_dropped: u64,
    pub duplicates: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult {
    pub flow_id: FlowId,
    pub kind: FlowKindLabel,
    /// Data source.
    pub src: String,
    pub dst: String,
    pub request_index: u32,
    pub started_at: SimTime,
    pub completed_at: Option<SimTime>,
    pub segments_total: u32,
    pub segments_sent: u64,
    pub retransmissions: u64,
    pub drops: u64,
    /// Data frames of this flow lost, by the node that dropped them.
    pub drops_by_node: BTreeMap<String, u64>,
    /// `r_i - s_i` in receive order.
    pub displacements: Vec<i64>,
    /// First copy of every data segment received.
    pub deliveries: Vec<DeliveryRecord>,
    pub bounces_by_switch: BTreeMap<String, u64>,
}

impl FlowResult {
    pub fn fct(&self) -> Option<SimTime> {
        self.completed_at.map(|c| c.saturating_sub(self.started_at))
    }

    pub fn summary(&self) -> FlowSummary {
        let mut hist = BTreeMap::new();
        for d in &self.deliveries {
            *hist.entry(d.counters.max_bounced_distance).or_insert(0) += 1;
        }
        FlowSummary {
            flow_id: self.flow_id,
            src: self.src.clone(),
            dst: self.dst.clone(),
            request_index: self.request_index,
            started_at: self.started_at,
            completed_at: self.completed_at,
            segments_total: self.segments_total,
            segments_sent: self.segments_sent,
            segments_received: self.deliveries.len() as u64,
            retransmissions: self.retransmissions,
            drops: self.drops,
            per_packet_delays: self.deliveries.iter().map(|d| d.delay()).collect(),
            total_hops: self.deliveries.iter().map(|d| d.counters.total_hop).collect(),
            bounces_by_switch: self.bounces_by_switch.clone(),
            max_bounced_distance_histogram: hist,
        }
    }
}

/// A ratio reported with its raw counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fraction {
    pub num: u64,
    pub den: u64,
    pub value: f64,
}

impl Fraction {
    pub fn new(num: u64, den: u64) -> Self {
        Self {
            num,
            den,
            value: ratio(num, den),
        }
    }
}

/// Scalars summarizing one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Headline {
    pub entropy: f64,
    pub d_threshold: u32,
    pub util_variance: f64,
    pub time_ratio: f64,
    pub drop_rate: Fraction,
    pub bounce_fraction: Fraction,
    pub bounce_events: u64,
    pub mean_total_hop: f64,
    pub mean_delay: Option<f64>,
    pub mean_fct: Option<f64>,
    pub flows_completed: Fraction,
    pub frames: FrameAccounting,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub config: ScenarioConfig,
    pub end: SimTime,
    pub engine: SimReport,
    pub flows: Vec<FlowResult>,
    pub switches: Vec<SwitchCounts>,
    pub switch_util: Vec<SwitchUtil>,
    pub frames: FrameAccounting,
    pub rng_draws: u64,
    pub trace: Option<Vec<TraceRow>>,
    pub node_names: Vec<String>,
}

impl RunResult {
    pub fn deliveries(&self) -> impl Iterator<Item = &DeliveryRecord> {
        self.flows.iter().flat_map(|f| f.deliveries.iter())
    }

    pub fn bounce_report(&self) -> BounceReport {
        let all: Vec<DeliveryRecord> = self.deliveries().copied().collect();
        bounce_report(&all, &self.switches)
    }

    pub fn switch(&self, name: &str) -> Option<&SwitchCounts> {
        self.switches.iter().find(|s| s.name == name)
    }

    /// Total switch drops, and the switches where they happened.
    pub fn dropping_switches(&self) -> Vec<&str> {
        self.switches
            .iter()
            .filter(|s| s.drops > 0)
            .map(|s| s.name.as_str())
            .collect()
    }

    pub fn d_threshold(&self) -> u32 {
        self.config.d_threshold.unwrap_or_else(|| {
            self.flows
                .iter()
                .map(|f| f.segments_total)
                .max()
                .unwrap_or(1)
                .max(1)
        })
    }

    /// Displacements of all flows pooled together.
    pub fn displacements(&self) -> Vec<i64> {
        self.flows
            .iter()
            .flat_map(|f| f.displacements.iter().copied())
            .collect()
    }

    pub fn reorder_density(&self) -> ReorderDistribution {
        reorder_density(&self.displacements(), self.d_threshold()).expect("threshold is positive")
    }

    pub fn entropy(&self) -> f64 {
        reorder_entropy(&self.reorder_density())
    }

    pub fn util_variance(&self) -> f64 {
        util_variance(&self.switch_util, self.end)
    }

    pub fn time_ratio(&self) -> f64 {
        time_ratio(
            self.switch_util.iter().flat_map(|s| s.normal.iter()),
            self.config.theta,
            self.end,
        )
    }

    pub fn drop_rate(&self) -> Fraction {
        Fraction::new(self.frames.data_dropped, self.frames.data_created)
    }

    /// Mean per-packet delay of delivered data frames, in seconds.
    pub fn mean_delay(&self) -> Option<f64> {
        let (mut sum, mut n) = (0.0, 0u64);
        for d in self.deliveries() {
            sum += d.delay().as_secs_f64();
            n += 1;
        }
        (n > 0).then(|| sum / n as f64)
    }

    pub fn session_flows(&self) -> impl Iterator<Item = &FlowResult> {
        self.flows.iter().filter(|f| f.kind == FlowKindLabel::Session)
    }

    /// Mean completion time of completed request-reply flows, in seconds.
    pub fn mean_fct(&self) -> Option<f64> {
        let fcts: Vec<f64> = self
            .session_flows()
            .filter_map(|f| f.fct())
            .map(|t| t.as_secs_f64())
            .collect();
        (!fcts.is_empty()).then(|| fcts.iter().sum::<f64>() / fcts.len() as f64)
    }

    pub fn headline(&self) -> Headline {
        let br = self.bounce_report();
        let sessions = self.session_flows().count() as u64;
        let completed = self.session_flows().filter(|f| f.completed_at.is_some()).count() as u64;
        Headline {
            entropy: self.entropy(),
            d_threshold: self.d_threshold(),
            util_variance: self.util_variance(),
            time_ratio: self.time_ratio(),
            drop_rate: self.drop_rate(),
            bounce_fraction: Fraction::new(br.bounced_frames, br.delivered_frames),
            bounce_events: br.total_bounce_events,
            mean_total_hop: br.mean_total_hop(),
            mean_delay: self.mean_delay(),
            mean_fct: self.mean_fct(),
            flows_completed: Fraction::new(completed, sessions),
            frames: self.frames,
        }
    }
}
