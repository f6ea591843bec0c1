use std::collections::VecDeque;

use crate::engine::SimTime;
use crate::metrics::UtilTrace;
use crate::model::Frame;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QueueKind {
    Normal,
    Bounce,
}

impl QueueKind {
    pub fn label(self) -> &'static str {
        match self {
            QueueKind::Normal => "normal",
            QueueKind::Bounce => "bounce",
        }
    }
}

/// Egress side of a port: a bounce queue with strict priority over the
/// normal queue. Occupancy of both is traced.
#[derive(Debug)]
pub struct OutputPort {
    normal: VecDeque<Frame>,
    bounce: VecDeque<Frame>,
    normal_trace: UtilTrace,
    bounce_trace: UtilTrace,
    /// A frame is being serialized onto the link.
    pub busy: bool,
}

impl OutputPort {
    pub fn new(normal_capacity: usize, bounce_capacity: usize) -> Self {
        Self {
            normal: VecDeque::new(),
            bounce: VecDeque::new(),
            normal_trace: UtilTrace::new(normal_capacity),
            bounce_trace: UtilTrace::new(bounce_capacity),
            busy: false,
        }
    }

    pub fn capacity(&self, kind: QueueKind) -> usize {
        match kind {
            QueueKind::Normal => self.normal_trace.capacity,
            QueueKind::Bounce => self.bounce_trace.capacity,
        }
    }

    pub fn len(&self, kind: QueueKind) -> usize {
        match kind {
            QueueKind::Normal => self.normal.len(),
            QueueKind::Bounce => self.bounce.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.normal.is_empty() && self.bounce.is_empty()
    }

    /// Hands the frame back when the queue is full.
    pub fn enqueue(&mut self, kind: QueueKind, frame: Frame, now: SimTime) -> Result<(), Frame> {
        let (queue, trace) = match kind {
            QueueKind::Normal => (&mut self.normal, &mut self.normal_trace),
            QueueKind::Bounce => (&mut self.bounce, &mut self.bounce_trace),
        };
        if queue.len() >= trace.capacity {
            return Err(frame);
        }
        queue.push_back(frame);
        trace.record(now, queue.len());
        Ok(())
    }

    /// Head of the bounce queue if any, else head of the normal queue.
    pub fn next_to_transmit(&mut self, now: SimTime) -> Option<(Frame, QueueKind)> {
        if let Some(f) = self.bounce.pop_front() {
            self.bounce_trace.record(now, self.bounce.len());
            return Some((f, QueueKind::Bounce));
        }
        let f = self.normal.pop_front()?;
        self.normal_trace.record(now, self.normal.len());
        Some((f, QueueKind::Normal))
    }

    /// Most recently enqueued frame of a queue.
    pub fn back(&self, kind: QueueKind) -> Option<&Frame> {
        match kind {
            QueueKind::Normal => self.normal.back(),
            QueueKind::Bounce => self.bounce.back(),
        }
    }

    pub fn frames(&self) -> impl Iterator<Item = &Frame> {
        self.bounce.iter().chain(self.normal.iter())
    }

    pub fn trace(&self, kind: QueueKind) -> &UtilTrace {
        match kind {
            QueueKind::Normal => &self.normal_trace,
            QueueKind::Bounce => &self.bounce_trace,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FrameKind, MacAddr};

    fn frame(id: u64) -> Frame {
        Frame::new(
            id,
            FrameKind::Data,
            MacAddr::default(),
            MacAddr::default(),
            0,
            0,
            1500,
            SimTime::ZERO,
        )
    }

    #[test]
    fn bounce_first() {
        let mut p = OutputPort::new(4, 4);
        p.enqueue(QueueKind::Normal, frame(1), SimTime::ZERO).unwrap();
        p.enqueue(QueueKind::Normal, frame(2), SimTime::ZERO).unwrap();
        p.enqueue(QueueKind::Bounce, frame(10), SimTime::ZERO).unwrap();
        let ids: Vec<u64> = std::iter::from_fn(|| p.next_to_transmit(SimTime(1)))
            .map(|(f, _)| f.id)
            .collect();
        assert_eq!(ids, vec![10, 1, 2]);
    }

    #[test]
    fn normal_only_and_empty() {
        let mut p = OutputPort::new(4, 4);
        assert!(p.next_to_transmit(SimTime::ZERO).is_none());
        p.enqueue(QueueKind::Normal, frame(1), SimTime::ZERO).unwrap();
        let (f, k) = p.next_to_transmit(SimTime::ZERO).unwrap();
        assert_eq!((f.id, k), (1, QueueKind::Normal));
    }

    #[test]
    fn full_queue_returns_frame() {
        let mut p = OutputPort::new(1, 0);
        p.enqueue(QueueKind::Normal, frame(1), SimTime::ZERO).unwrap();
        let back = p.enqueue(QueueKind::Normal, frame(2), SimTime::ZERO).unwrap_err();
        assert_eq!(back.id, 2);
        assert!(p.enqueue(QueueKind::Bounce, frame(3), SimTime::ZERO).is_err());
    }
}
