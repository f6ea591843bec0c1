use std::collections::HashMap;

use crate::metrics::displacement;

/// Sending and receiving order of one flow's segments.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OrderLog {
    sent: HashMap<u32, u32>,
    next_send_order: u32,
    next_recv_order: u32,
    /// `(seq, s_i, r_i)` per first copy received.
    received: Vec<(u32, u32, u32)>,
}

impl OrderLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sending order of `seq`: a fresh one on first transmission, the
    /// original one on retransmission.
    pub fn stamp_send(&mut self, seq: u32) -> u32 {
        *self.sent.entry(seq).or_insert_with(|| {
            self.next_send_order += 1;
            self.next_send_order
        })
    }

    /// Assigns the next receiving order unless the segment is a duplicate.
    pub fn record_receive(&mut self, seq: u32, send_order: u32, duplicate: bool) -> Option<u32> {
        if duplicate {
            return None;
        }
        self.next_recv_order += 1;
        self.received.push((seq, send_order, self.next_recv_order));
        Some(self.next_recv_order)
    }

    pub fn sent_count(&self) -> u32 {
        self.next_send_order
    }

    pub fn received(&self) -> &[(u32, u32, u32)] {
        &self.received
    }

    pub fn displacements(&self) -> Vec<i64> {
        self.received
            .iter()
            .map(|&(_, s, r)| displacement(s, r))
            .collect()
    }
}
