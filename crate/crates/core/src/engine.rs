//! Discrete-event core: virtual clock, ordered event queue and seeded
//! random streams.
//!
//! Time is kept as integer nanoseconds. Events that fire at the same instant
//! are dispatched in insertion order, so a run is fully determined by its
//! configuration and seed.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashSet};
use std::fmt;
use std::panic::{self, AssertUnwindSafe};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Virtual time in nanoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct SimTime(pub u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub fn from_nanos(ns: u64) -> Self {
        SimTime(ns)
    }

    pub fn from_micros(us: u64) -> Self {
        SimTime(us * 1_000)
    }

    /// Rounds to the nearest nanosecond. Negative and NaN inputs map to zero.
    pub fn from_secs_f64(secs: f64) -> Self {
        if !(secs > 0.0) {
            return SimTime::ZERO;
        }
        SimTime((secs * 1e9).round() as u64)
    }

    pub fn as_nanos(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / 1e9
    }

    pub fn saturating_sub(self, other: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(other.0))
    }
}

impl std::ops::Add for SimTime {
    type Output = SimTime;
    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 + rhs.0)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.9}s", self.as_secs_f64())
    }
}

/// Handle returned by [`Scheduler::schedule`], usable for cancellation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EventId(pub u64);

/// Coarse event classification, used for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    FrameArrival,
    TransmissionComplete,
    GeneratorTick,
    TimerExpiry,
}

/// Node (and optionally port) an event is addressed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Target {
    pub node: usize,
    pub port: Option<usize>,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.port {
            Some(p) => write!(f, "node {} port {}", self.node, p),
            None => write!(f, "node {}", self.node),
        }
    }
}

/// Payload types carried by the scheduler.
pub trait SimEvent: fmt::Debug {
    fn kind(&self) -> EventKind;
    fn target(&self) -> Target;
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("cannot schedule event at {at} before current time {now}")]
    ScheduleInPast { at: SimTime, now: SimTime },
    #[error("handler for event #{id} ({kind:?} at {target}, t={time}) failed: {message}")]
    Handler {
        id: u64,
        time: SimTime,
        kind: EventKind,
        target: Target,
        message: String,
    },
    #[error("handler for event #{id} ({kind:?} at {target}, t={time}) panicked: {message}")]
    HandlerPanicked {
        id: u64,
        time: SimTime,
        kind: EventKind,
        target: Target,
        message: String,
    },
}

/// A scheduled event as seen by the dispatch loop.
#[derive(Debug)]
pub struct Event<E> {
    pub id: EventId,
    pub fire_time: SimTime,
    pub payload: E,
}

struct Entry<E> {
    at: SimTime,
    seq: u64,
    payload: E,
}

impl<E> PartialEq for Entry<E> {
    fn eq(&self, other: &Self) -> bool {
        self.at == other.at && self.seq == other.seq
    }
}
impl<E> Eq for Entry<E> {}
impl<E> PartialOrd for Entry<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<E> Ord for Entry<E> {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.at, self.seq).cmp(&(other.at, other.seq))
    }
}

/// Summary of a call to [`Scheduler::run`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimReport {
    pub dispatched: u64,
    pub scheduled: u64,
    pub cancelled: u64,
    pub final_clock: SimTime,
}

/// Receives events from the dispatch loop.
pub trait Handler<E> {
    type Error: fmt::Display;

    fn handle(
        &mut self,
        now: SimTime,
        event: Event<E>,
        sched: &mut Scheduler<E>,
    ) -> Result<(), Self::Error>;
}

/// Event queue keyed by `(fire_time, insertion sequence)`.
pub struct Scheduler<E> {
    now: SimTime,
    next_seq: u64,
    heap: BinaryHeap<Reverse<Entry<E>>>,
    live: HashSet<u64>,
    cancelled: HashSet<u64>,
    scheduled: u64,
    cancelled_total: u64,
    dispatched: u64,
}

impl<E> Default for Scheduler<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> Scheduler<E> {
    pub fn new() -> Self {
        Self {
            now: SimTime::ZERO,
            next_seq: 0,
            heap: BinaryHeap::new(),
            live: HashSet::new(),
            cancelled: HashSet::new(),
            scheduled: 0,
            cancelled_total: 0,
            dispatched: 0,
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn schedule(&mut self, at: SimTime, payload: E) -> Result<EventId, EngineError> {
        if at < self.now {
            return Err(EngineError::ScheduleInPast { at, now: self.now });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.scheduled += 1;
        self.live.insert(seq);
        self.heap.push(Reverse(Entry { at, seq, payload }));
        Ok(EventId(seq))
    }

    pub fn schedule_in(&mut self, delay: SimTime, payload: E) -> Result<EventId, EngineError> {
        self.schedule(self.now + delay, payload)
    }

    /// Returns false if the event was already dispatched or cancelled.
    pub fn cancel(&mut self, id: EventId) -> bool {
        if !self.live.remove(&id.0) {
            return false;
        }
        self.cancelled.insert(id.0);
        self.cancelled_total += 1;
        true
    }

    /// Events still waiting to fire, excluding cancelled ones, in no
    /// particular order.
    pub fn pending(&self) -> impl Iterator<Item = &E> {
        self.heap
            .iter()
            .filter(|Reverse(e)| !self.cancelled.contains(&e.seq))
            .map(|Reverse(e)| &e.payload)
    }

    pub fn pending_len(&self) -> usize {
        self.heap.len() - self.cancelled.len()
    }

    pub fn report(&self) -> SimReport {
        SimReport {
            dispatched: self.dispatched,
            scheduled: self.scheduled,
            cancelled: self.cancelled_total,
            final_clock: self.now,
        }
    }

    fn pop_live(&mut self, until: SimTime) -> Option<Entry<E>> {
        loop {
            match self.heap.peek() {
                Some(Reverse(e)) if e.at <= until => {}
                _ => return None,
            }
            let Reverse(entry) = self.heap.pop().expect("peeked");
            if self.cancelled.remove(&entry.seq) {
                continue;
            }
            self.live.remove(&entry.seq);
            return Some(entry);
        }
    }
}

impl<E: SimEvent> Scheduler<E> {
    /// Dispatches every event with `fire_time <= until`, then advances the
    /// clock to `until`.
    pub fn run<H: Handler<E>>(
        &mut self,
        until: SimTime,
        handler: &mut H,
    ) -> Result<SimReport, EngineError> {
        while let Some(entry) = self.pop_live(until) {
            debug_assert!(entry.at >= self.now);
            self.now = entry.at;
            let (kind, target) = (entry.payload.kind(), entry.payload.target());
            let event = Event {
                id: EventId(entry.seq),
                fire_time: entry.at,
                payload: entry.payload,
            };
            let outcome =
                panic::catch_unwind(AssertUnwindSafe(|| handler.handle(self.now, event, self)));
            self.dispatched += 1;
            match outcome {
                Ok(Ok(())) => {}
                Ok(Err(err)) => {
                    return Err(EngineError::Handler {
                        id: entry.seq,
                        time: entry.at,
                        kind,
                        target,
                        message: err.to_string(),
                    })
                }
                Err(panic) => {
                    let message = panic
                        .downcast_ref::<&str>()
                        .map(|s| s.to_string())
                        .or_else(|| panic.downcast_ref::<String>().cloned())
                        .unwrap_or_else(|| "non-string panic payload".to_string());
                    return Err(EngineError::HandlerPanicked {
                        id: entry.seq,
                        time: entry.at,
                        kind,
                        target,
                        message,
                    });
                }
            }
        }
        if until > self.now {
            self.now = until;
        }
        Ok(self.report())
    }
}

/// Stable 64-bit digest of a byte string; used to derive stream identifiers
/// and sweep seeds.
pub fn stable_hash64(bytes: &[u8]) -> u64 {
    let digest = Sha256::digest(bytes);
    let mut out = [0u8; 8];
    out.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(out)
}

/// A named, seeded random stream. One per decision site.
#[derive(Clone)]
pub struct RngStream {
    stream_id: u64,
    seed: u64,
    draw_count: u64,
    rng: ChaCha8Rng,
}

impl fmt::Debug for RngStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RngStream")
            .field("stream_id", &self.stream_id)
            .field("seed", &self.seed)
            .field("draw_count", &self.draw_count)
            .finish()
    }
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            stream_id,
            seed,
            draw_count: 0,
            rng,
        }
    }

    pub fn named(seed: u64, name: &str) -> Self {
        Self::new(seed, stable_hash64(name.as_bytes()))
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn draw_count(&self) -> u64 {
        self.draw_count
    }

    /// Uniform on `[0, 1)`.
    pub fn draw_uniform(&mut self) -> f64 {
        self.draw_count += 1;
        self.rng.random::<f64>()
    }
}
