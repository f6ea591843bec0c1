use crate::engine::{RngStream, SimTime};
use crate::metrics::{SwitchCounts, SwitchUtil};
use crate::model::{Frame, PortId};
use crate::topology::RouteTable;

use super::{bounce_probability, BounceParams, FabricError, Fib, OutputPort, QueueKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SwitchMode {
    Pabo(BounceParams),
    DropTail,
}

/// Where `handle_frame` put a frame.
#[derive(Debug, PartialEq)]
pub enum Disposition {
    Forwarded { port: PortId },
    Bounced { port: PortId },
    /// Normal queue full. The frame is handed back for accounting.
    Dropped { port: PortId, frame: Frame },
}

#[derive(Debug)]
pub struct Switch {
    pub name: String,
    mode: SwitchMode,
    routes: RouteTable,
    ports: Vec<OutputPort>,
    fib: Fib,
    rng: RngStream,
    counts: SwitchCounts,
}

impl Switch {
    pub fn new(
        name: impl Into<String>,
        mode: SwitchMode,
        routes: RouteTable,
        n_ports: usize,
        normal_capacity: usize,
        bounce_capacity: usize,
        rng: RngStream,
    ) -> Self {
        let name = name.into();
        Self {
            counts: SwitchCounts {
                name: name.clone(),
                ..SwitchCounts::default()
            },
            name,
            mode,
            routes,
            ports: (0..n_ports)
                .map(|_| OutputPort::new(normal_capacity, bounce_capacity))
                .collect(),
            fib: Fib::new(vec![normal_capacity; n_ports]),
            rng,
        }
    }

    pub fn mode(&self) -> SwitchMode {
        self.mode
    }

    pub fn port(&self, port: PortId) -> &OutputPort {
        &self.ports[port]
    }

    pub fn ports(&self) -> &[OutputPort] {
        &self.ports
    }

    pub fn fib(&self) -> &Fib {
        &self.fib
    }

    pub fn counts(&self) -> &SwitchCounts {
        &self.counts
    }

    pub fn rng_draws(&self) -> u64 {
        self.rng.draw_count()
    }

    fn route(&self, frame: &Frame) -> Result<PortId, FabricError> {
        let port = self
            .routes
            .lookup(&frame.dst)
            .ok_or_else(|| FabricError::NoRoute {
                switch: self.name.clone(),
                dst: frame.dst,
            })?;
        if port >= self.ports.len() {
            return Err(FabricError::NoSuchPort {
                switch: self.name.clone(),
                dst: frame.dst,
                port,
            });
        }
        Ok(port)
    }

    /// Decides between forwarding and bouncing and enqueues the frame.
    ///
    /// A frame that reached this switch by normal forwarding remembers its
    /// ingress port on its trail. A bounce pops that entry and sends the frame
    /// back out through it, so a frame bounced repeatedly keeps retreating
    /// along the path it came by.
    pub fn handle_frame(
        &mut self,
        mut frame: Frame,
        in_port: PortId,
        now: SimTime,
    ) -> Result<Disposition, FabricError> {
        let out = self.route(&frame)?;
        if !frame.bounced {
            frame.trail.push(in_port);
        }
        let p = match self.mode {
            SwitchMode::Pabo(params) if frame.is_data() => {
                bounce_probability(self.fib.util(out), frame.counters.bounced_hop, params)?
            }
            _ => 0.0,
        };
        let bounce = if p <= 0.0 {
            false
        } else if p >= 1.0 {
            true
        } else {
            self.rng.draw_uniform() < p
        };

        if bounce {
            let back = frame.trail.pop().ok_or_else(|| FabricError::EmptyTrail {
                switch: self.name.clone(),
                frame: frame.id,
            })?;
            frame.record_bounce();
            let capacity = self.ports[back].capacity(QueueKind::Bounce);
            self.ports[back]
                .enqueue(QueueKind::Bounce, frame, now)
                .map_err(|_| FabricError::BounceOverflow {
                    switch: self.name.clone(),
                    port: back,
                    capacity,
                })?;
            self.counts.bounces += 1;
            return Ok(Disposition::Bounced { port: back });
        }

        frame.record_forward();
        match self.ports[out].enqueue(QueueKind::Normal, frame, now) {
            Ok(()) => {
                self.fib.update_util(out, 1)?;
                self.counts.forwards += 1;
                Ok(Disposition::Forwarded { port: out })
            }
            Err(frame) => {
                self.counts.drops += 1;
                Ok(Disposition::Dropped { port: out, frame })
            }
        }
    }

    /// Takes the next frame for the link behind `port`, bounce queue first.
    pub fn next_to_transmit(
        &mut self,
        port: PortId,
        now: SimTime,
    ) -> Result<Option<(Frame, QueueKind)>, FabricError> {
        let next = self.ports[port].next_to_transmit(now);
        if let Some((_, QueueKind::Normal)) = next {
            self.fib.update_util(port, -1)?;
        }
        Ok(next)
    }

    pub fn set_busy(&mut self, port: PortId, busy: bool) {
        self.ports[port].busy = busy;
    }

    pub fn queued_frames(&self) -> usize {
        self.ports.iter().map(|p| p.frames().count()).sum()
    }

    pub fn util_traces(&self) -> SwitchUtil {
        SwitchUtil {
            name: self.name.clone(),
            normal: self
                .ports
                .iter()
                .map(|p| p.trace(QueueKind::Normal).clone())
                .collect(),
            bounce: self
                .ports
                .iter()
                .map(|p| p.trace(QueueKind::Bounce).clone())
                .collect(),
        }
    }
}
