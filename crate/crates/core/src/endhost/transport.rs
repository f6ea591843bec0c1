//! Segment-granular windowed transport: a loss-oblivious sender for bounce
//! fabrics and a Reno sender for drop-tail fabrics.

use serde::{Deserialize, Serialize};

use crate::engine::SimTime;

use super::EndhostError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransportMode {
    /// Slow start up to the advertised window, no retransmission, no
    /// window reduction.
    Pabo,
    Reno,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenoCfg {
    pub fast_retransmit: bool,
    /// Seconds.
    pub rto_initial: f64,
    pub rto_min: f64,
    pub rto_max: f64,
    /// Pins the timeout, ignoring RTT samples and backoff.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rto_fixed: Option<f64>,
}

impl Default for RenoCfg {
    fn default() -> Self {
        Self {
            fast_retransmit: true,
            rto_initial: 1.0,
            rto_min: 0.2,
            rto_max: 240.0,
            rto_fixed: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportCfg {
    pub mode: TransportMode,
    pub mss: u32,
    pub advertised_window: u32,
    pub reno: RenoCfg,
}

impl TransportCfg {
    pub fn validate(&self) -> Result<(), EndhostError> {
        if self.mss == 0 {
            return Err(EndhostError::BadTransport("mss must be positive".into()));
        }
        if self.advertised_window < self.mss {
            return Err(EndhostError::BadTransport(format!(
                "advertised_window {} is smaller than mss {}",
                self.advertised_window, self.mss
            )));
        }
        let r = &self.reno;
        if !(r.rto_min > 0.0 && r.rto_min <= r.rto_initial && r.rto_initial <= r.rto_max) {
            return Err(EndhostError::BadTransport(
                "need 0 < rto_min <= rto_initial <= rto_max".into(),
            ));
        }
        if matches!(r.rto_fixed, Some(t) if !(t > 0.0)) {
            return Err(EndhostError::BadTransport("rto_fixed must be positive".into()));
        }
        Ok(())
    }

    /// Full segments that fit in the advertised window.
    pub fn window_segments(&self) -> u32 {
        (self.advertised_window / self.mss).max(1)
    }

    /// Number of segments and payload of the last one for `bytes`.
    pub fn segmentation(&self, bytes: u64) -> (u32, u32) {
        let mss = u64::from(self.mss);
        let n = bytes.div_ceil(mss).max(1);
        let last = bytes - (n - 1) * mss;
        (n as u32, last as u32)
    }
}

/// One segment handed to the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub seq: u32,
    pub retransmit: bool,
}

#[derive(Debug, Clone)]
pub struct Sender {
    cfg: TransportCfg,
    total: u32,
    snd_una: u32,
    snd_nxt: u32,
    high_sent: u32,
    cwnd: f64,
    ssthresh: f64,
    dupacks: u32,
    in_recovery: bool,
    first_sent: Vec<Option<SimTime>>,
    retransmitted: Vec<bool>,
    srtt: Option<f64>,
    rttvar: f64,
    rto: f64,
    rto_deadline: Option<SimTime>,
    pub retransmissions: u64,
    pub timeouts: u64,
}

impl Sender {
    pub fn new(cfg: TransportCfg, total: u32) -> Self {
        let rto = cfg.reno.rto_fixed.unwrap_or(cfg.reno.rto_initial);
        Self {
            cfg,
            total,
            snd_una: 0,
            snd_nxt: 0,
            high_sent: 0,
            cwnd: 1.0,
            ssthresh: f64::INFINITY,
            dupacks: 0,
            in_recovery: false,
            first_sent: vec![None; total as usize],
            retransmitted: vec![false; total as usize],
            srtt: None,
            rttvar: 0.0,
            rto,
            rto_deadline: None,
            retransmissions: 0,
            timeouts: 0,
        }
    }

    pub fn cwnd(&self) -> f64 {
        self.cwnd
    }

    pub fn snd_una(&self) -> u32 {
        self.snd_una
    }

    pub fn is_done(&self) -> bool {
        self.snd_una >= self.total
    }

    pub fn in_flight(&self) -> u32 {
        self.snd_nxt - self.snd_una
    }

    fn reno(&self) -> bool {
        self.cfg.mode == TransportMode::Reno
    }

    fn window(&self) -> u32 {
        let cwnd = self.cwnd.floor().max(1.0) as u32;
        let adv = self.cfg.window_segments();
        if self.in_recovery {
            // the inflated window may exceed the receiver's window only by
            // the segments that have left the network
            cwnd.min(adv + self.dupacks)
        } else {
            cwnd.min(adv)
        }
    }

    /// Pending timeout, if any. Never set in loss-oblivious mode.
    pub fn rto_deadline(&self) -> Option<SimTime> {
        self.rto_deadline
    }

    fn arm(&mut self, now: SimTime) {
        if self.reno() {
            self.rto_deadline = Some(now + SimTime::from_secs_f64(self.rto));
        }
    }

    fn emit(&mut self, seq: u32, now: SimTime) -> Segment {
        let i = seq as usize;
        let retransmit = self.first_sent[i].is_some();
        if retransmit {
            self.retransmitted[i] = true;
            self.retransmissions += 1;
        } else {
            self.first_sent[i] = Some(now);
        }
        self.high_sent = self.high_sent.max(seq + 1);
        if self.rto_deadline.is_none() {
            self.arm(now);
        }
        Segment { seq, retransmit }
    }

    /// Segments the window allows out now.
    pub fn take_sendable(&mut self, now: SimTime) -> Vec<Segment> {
        let mut out = Vec::new();
        while self.snd_nxt < self.total && self.snd_nxt - self.snd_una < self.window() {
            let seq = self.snd_nxt;
            self.snd_nxt += 1;
            out.push(self.emit(seq, now));
        }
        out
    }

    fn sample_rtt(&mut self, r: f64) {
        let reno = self.cfg.reno;
        if reno.rto_fixed.is_some() {
            return;
        }
        match self.srtt {
            None => {
                self.srtt = Some(r);
                self.rttvar = r / 2.0;
            }
            Some(s) => {
                self.rttvar = 0.75 * self.rttvar + 0.25 * (s - r).abs();
                self.srtt = Some(0.875 * s + 0.125 * r);
            }
        }
        let s = self.srtt.unwrap_or(r);
        self.rto = (s + 4.0 * self.rttvar).clamp(reno.rto_min, reno.rto_max);
    }

    /// Processes a cumulative acknowledgement. Returns a segment to
    /// retransmit immediately (fast retransmit), if any; further segments
    /// come from [`Sender::take_sendable`].
    pub fn on_ack(&mut self, next_expected: u32, now: SimTime) -> Option<Segment> {
        let ack = next_expected.min(self.total);
        if ack > self.snd_una {
            let newly = ack - self.snd_una;
            let last = (ack - 1) as usize;
            if !self.retransmitted[last] {
                if let Some(t) = self.first_sent[last] {
                    self.sample_rtt(now.saturating_sub(t).as_secs_f64());
                }
            }
            self.snd_una = ack;
            // after a go-back-N restart the ack may overtake snd_nxt
            self.snd_nxt = self.snd_nxt.max(ack);
            self.dupacks = 0;
            if self.in_recovery {
                self.in_recovery = false;
                self.cwnd = self.ssthresh;
            } else if self.cwnd < self.ssthresh {
                self.cwnd += f64::from(newly);
            } else {
                self.cwnd += f64::from(newly) / self.cwnd;
            }
            if self.cfg.mode == TransportMode::Pabo {
                self.cwnd = self.cwnd.min(f64::from(self.cfg.window_segments()));
            }
            self.rto_deadline = None;
            if self.snd_una < self.snd_nxt {
                self.arm(now);
            }
            return None;
        }
        if !self.reno() || ack < self.snd_una || self.snd_una == self.snd_nxt {
            return None;
        }
        self.dupacks += 1;
        if self.in_recovery {
            self.cwnd += 1.0;
            return None;
        }
        if self.dupacks == 3 && self.cfg.reno.fast_retransmit {
            let flight = f64::from(self.in_flight());
            self.ssthresh = (flight / 2.0).max(2.0);
            self.cwnd = self.ssthresh + 3.0;
            self.in_recovery = true;
            let seq = self.snd_una;
            return Some(self.emit(seq, now));
        }
        None
    }

    /// Retransmission timeout: collapse the window and go back to the first
    /// unacknowledged segment.
    pub fn on_timeout(&mut self, now: SimTime) {
        if !self.reno() || self.is_done() {
            self.rto_deadline = None;
            return;
        }
        self.timeouts += 1;
        let flight = f64::from(self.in_flight());
        self.ssthresh = (flight / 2.0).max(2.0);
        self.cwnd = 1.0;
        self.dupacks = 0;
        self.in_recovery = false;
        self.snd_nxt = self.snd_una;
        if self.cfg.reno.rto_fixed.is_none() {
            self.rto = (self.rto * 2.0).min(self.cfg.reno.rto_max);
        }
        self.rto_deadline = None;
        self.arm(now);
    }
}

/// Cumulative-ACK receiver with an unbounded reorder buffer.
#[derive(Debug, Clone)]
pub struct Receiver {
    total: u32,
    next_expected: u32,
    got: Vec<bool>,
    pub received_unique: u32,
    pub duplicates: u64,
    pub completed_at: Option<SimTime>,
}

impl Receiver {
    pub fn new(total: u32) -> Self {
        Self {
            total,
            next_expected: 0,
            got: vec![false; total as usize],
            received_unique: 0,
            duplicates: 0,
            completed_at: None,
        }
    }

    pub fn next_expected(&self) -> u32 {
        self.next_expected
    }

    pub fn is_complete(&self) -> bool {
        self.completed_at.is_some()
    }

    /// Returns whether the segment is new.
    pub fn on_data(&mut self, seq: u32, now: SimTime) -> bool {
        let i = seq as usize;
        if i >= self.got.len() || self.got[i] {
            self.duplicates += 1;
            return false;
        }
        self.got[i] = true;
        self.received_unique += 1;
        while self.next_expected < self.total && self.got[self.next_expected as usize] {
            self.next_expected += 1;
        }
        if self.next_expected == self.total && self.completed_at.is_none() {
            self.completed_at = Some(now);
        }
        true
    }
}
