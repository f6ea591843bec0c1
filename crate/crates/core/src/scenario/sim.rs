use std::collections::BTreeMap;

use thiserror::Error;

use crate::endhost::{Arrival, BurstGen, EndhostError, Host, OrderLog, Receiver, Segment, Sender, TransportCfg, TransportMode};
use crate::engine::{
    EngineError, Event, EventId, EventKind, Handler, RngStream, Scheduler, SimEvent, SimReport,
    SimTime, Target,
};
use crate::fabric::{Disposition, FabricError, QueueKind, Switch, SwitchMode};
use crate::metrics::{DeliveryRecord, SwitchCounts, SwitchUtil};
use crate::model::{Frame, FrameId, FrameKind, FlowId, Link, MacAddr, PortId};
use crate::topology::{Network, NodeIndex, PortPeer};

use super::config::{ConfigError, Mode, ScenarioConfig};
use super::result::{FlowKindLabel, FlowResult, FrameAccounting, RunResult, TraceEvent, TraceRow};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Fabric(#[from] FabricError),
    #[error(transparent)]
    Endhost(#[from] EndhostError),
    #[error("frame conservation violated: {0}")]
    Conservation(String),
}

#[derive(Debug)]
pub enum Ev {
    Arrive {
        node: NodeIndex,
        port: PortId,
        frame: Frame,
    },
    TxDone {
        node: NodeIndex,
        port: PortId,
    },
    BurstTick {
        flow: FlowId,
    },
    Request {
        flow: FlowId,
    },
    RequestRetry {
        flow: FlowId,
    },
    Rto {
        flow: FlowId,
    },
}

impl SimEvent for Ev {
    fn kind(&self) -> EventKind {
        match self {
            Ev::Arrive { .. } => EventKind::FrameArrival,
            Ev::TxDone { .. } => EventKind::TransmissionComplete,
            Ev::BurstTick { .. } | Ev::Request { .. } => EventKind::GeneratorTick,
            Ev::RequestRetry { .. } | Ev::Rto { .. } => EventKind::TimerExpiry,
        }
    }

    fn target(&self) -> Target {
        match *self {
            Ev::Arrive { node, port, .. } | Ev::TxDone { node, port } => Target {
                node,
                port: Some(port),
            },
            Ev::BurstTick { flow }
            | Ev::Request { flow }
            | Ev::RequestRetry { flow }
            | Ev::Rto { flow } => Target {
                node: flow as usize,
                port: None,
            },
        }
    }
}

enum Node {
    Host(Host),
    Switch(Switch),
}

enum FlowKind {
    Burst {
        gen: BurstGen,
    },
    Session {
        request_index: u32,
        request_len: u32,
        sender: Option<Sender>,
        receiver: Receiver,
        rto: Option<(EventId, SimTime)>,
        retry: Option<EventId>,
        retry_backoff: f64,
    },
}

struct Flow {
    id: FlowId,
    kind: FlowKind,
    /// Data source and sink.
    src: NodeIndex,
    dst: NodeIndex,
    segments_total: u32,
    last_payload: u32,
    payload: u32,
    started_at: SimTime,
    log: OrderLog,
    next_seq: u32,
    segments_sent: u64,
    drops_by_node: BTreeMap<String, u64>,
    deliveries: Vec<DeliveryRecord>,
    bounces_by_switch: BTreeMap<String, u64>,
}

struct World {
    net: Network,
    link: Link,
    nodes: Vec<Node>,
    flows: Vec<Flow>,
    transport: TransportCfg,
    end: SimTime,
    next_frame: FrameId,
    frames: FrameAccounting,
    trace: Option<Vec<TraceRow>>,
}

impl World {
    fn new(cfg: &ScenarioConfig) -> Result<Self, SimError> {
        let net = cfg.topology.build().with_link(cfg.link());
        let params = cfg.bounce_params()?;
        let q = cfg.queues;
        let nodes = net
            .nodes
            .iter()
            .map(|spec| match &spec.routes {
                None => Node::Host(Host::new(spec.name.clone(), spec.mac, q.sender, q.host_bounce)),
                Some(routes) => {
                    let (mode, normal, bounce) = match cfg.mode {
                        Mode::Pabo => (SwitchMode::Pabo(params), q.switch_normal, q.switch_bounce),
                        Mode::Baseline => (SwitchMode::DropTail, 2 * q.switch_normal, 0),
                    };
                    Node::Switch(Switch::new(
                        spec.name.clone(),
                        mode,
                        routes.clone(),
                        spec.ports.len(),
                        normal,
                        bounce,
                        RngStream::named(cfg.seed, &format!("bounce/{}", spec.name)),
                    ))
                }
            })
            .collect();
        let transport = cfg.transport();
        let mut flows = Vec::new();
        let host = |name: &str| net.host_index(name).map_err(|e| ConfigError::Invalid {
            field: "traffic".into(),
            message: e.to_string(),
        });
        for b in &cfg.bursts {
            let gen = b.generator();
            flows.push(Flow::new(
                flows.len() as FlowId,
                FlowKind::Burst {
                    gen: BurstGen::new(gen, SimTime::from_secs_f64(b.start)),
                },
                host(&b.src)?,
                host(&b.dst)?,
                u32::MAX,
                gen.payload,
                gen.payload,
                SimTime::from_secs_f64(b.start),
            ));
        }
        for s in &cfg.sessions {
            let (total, last) = transport.segmentation(s.reply_len);
            for k in 0..s.requests {
                for server in &s.servers {
                    let start = SimTime::from_secs_f64(s.start + s.gap * f64::from(k));
                    flows.push(Flow::new(
                        flows.len() as FlowId,
                        FlowKind::Session {
                            request_index: k,
                            request_len: s.request_len,
                            sender: None,
                            receiver: Receiver::new(total),
                            rto: None,
                            retry: None,
                            retry_backoff: transport
                                .reno
                                .rto_fixed
                                .unwrap_or(transport.reno.rto_initial),
                        },
                        host(server)?,
                        host(&s.client)?,
                        total,
                        last,
                        transport.mss,
                        start,
                    ));
                }
            }
        }
        Ok(Self {
            link: net.link,
            net,
            nodes,
            flows,
            transport,
            end: cfg.end_time(),
            next_frame: 0,
            frames: FrameAccounting::default(),
            trace: cfg.trace.then(Vec::new),
        })
    }

    fn mac(&self, node: NodeIndex) -> MacAddr {
        self.net.nodes[node].mac
    }

    fn trace_row(&mut self, now: SimTime, node: NodeIndex, port: PortId, queue: Option<QueueKind>, event: TraceEvent, f: &Frame) {
        if let Some(rows) = self.trace.as_mut() {
            rows.push(TraceRow {
                time: now,
                frame_id: f.id,
                flow_id: f.flow_id,
                seq: f.seq,
                kind: f.kind.label(),
                node,
                port,
                queue,
                event,
                counters: f.counters,
            });
        }
    }

    fn trace_back(&mut self, now: SimTime, node: NodeIndex, port: PortId, queue: QueueKind, event: TraceEvent) {
        if self.trace.is_none() {
            return;
        }
        let row = {
            let out = match &self.nodes[node] {
                Node::Host(h) => &h.port,
                Node::Switch(s) => s.port(port),
            };
            let f = out.back(queue).expect("frame just enqueued");
            TraceRow {
                time: now,
                frame_id: f.id,
                flow_id: f.flow_id,
                seq: f.seq,
                kind: f.kind.label(),
                node,
                port,
                queue: Some(queue),
                event,
                counters: f.counters,
            }
        };
        if let Some(rows) = self.trace.as_mut() {
            rows.push(row);
        }
    }

    fn new_frame(&mut self, kind: FrameKind, src: NodeIndex, dst: NodeIndex, flow: FlowId, seq: u32, payload: u32, now: SimTime) -> Frame {
        let id = self.next_frame;
        self.next_frame += 1;
        self.frames.created += 1;
        if kind == FrameKind::Data {
            self.frames.data_created += 1;
        }
        Frame::new(id, kind, self.mac(src), self.mac(dst), flow, seq, payload, now)
    }

    /// Puts a freshly created frame into its host's sender buffer.
    fn host_send(&mut self, node: NodeIndex, frame: Frame, now: SimTime, sched: &mut Scheduler<Ev>) -> Result<(), SimError> {
        let Node::Host(h) = &mut self.nodes[node] else {
            unreachable!("flows are bound to hosts");
        };
        match h.send(frame, now) {
            Ok(()) => {
                self.trace_back(now, node, 0, QueueKind::Normal, TraceEvent::Enqueue);
                self.start_tx(node, 0, now, sched)
            }
            Err(frame) => {
                self.frames.sender_overflow += 1;
                if frame.is_data() {
                    self.frames.data_dropped += 1;
                    self.count_drop(frame.flow_id, node);
                }
                self.trace_row(now, node, 0, Some(QueueKind::Normal), TraceEvent::Drop, &frame);
                Ok(())
            }
        }
    }

    fn count_drop(&mut self, flow: FlowId, node: NodeIndex) {
        let name = &self.net.nodes[node].name;
        *self.flows[flow as usize]
            .drops_by_node
            .entry(name.clone())
            .or_insert(0) += 1;
    }

    fn start_tx(&mut self, node: NodeIndex, port: PortId, now: SimTime, sched: &mut Scheduler<Ev>) -> Result<(), SimError> {
        let next = match &mut self.nodes[node] {
            Node::Host(h) => {
                if h.port.busy {
                    return Ok(());
                }
                let next = h.port.next_to_transmit(now);
                h.port.busy = next.is_some();
                next
            }
            Node::Switch(s) => {
                if s.port(port).busy {
                    return Ok(());
                }
                let next = s.next_to_transmit(port, now)?;
                s.set_busy(port, next.is_some());
                next
            }
        };
        let Some((frame, queue)) = next else {
            return Ok(());
        };
        self.trace_row(now, node, port, Some(queue), TraceEvent::Dequeue, &frame);
        let tx = self.link.tx_time(frame.payload_len);
        let PortPeer { node: peer, port: peer_port } = self.net.nodes[node].ports[port];
        sched.schedule(now + tx, Ev::TxDone { node, port })?;
        sched.schedule(
            now + tx + self.link.propagation_delay,
            Ev::Arrive {
                node: peer,
                port: peer_port,
                frame,
            },
        )?;
        Ok(())
    }

    fn on_switch(&mut self, node: NodeIndex, port: PortId, frame: Frame, now: SimTime, sched: &mut Scheduler<Ev>) -> Result<(), SimError> {
        let Node::Switch(sw) = &mut self.nodes[node] else {
            unreachable!()
        };
        let data_flow = frame.is_data().then_some(frame.flow_id);
        match sw.handle_frame(frame, port, now)? {
            Disposition::Forwarded { port: out } => {
                self.trace_back(now, node, out, QueueKind::Normal, TraceEvent::Forward);
                self.start_tx(node, out, now, sched)
            }
            Disposition::Bounced { port: back } => {
                if let Some(flow) = data_flow {
                    let name = &self.net.nodes[node].name;
                    *self.flows[flow as usize]
                        .bounces_by_switch
                        .entry(name.clone())
                        .or_insert(0) += 1;
                }
                self.trace_back(now, node, back, QueueKind::Bounce, TraceEvent::Bounce);
                self.start_tx(node, back, now, sched)
            }
            Disposition::Dropped { port: out, frame } => {
                self.frames.dropped += 1;
                if let Some(flow) = data_flow {
                    self.frames.data_dropped += 1;
                    self.count_drop(flow, node);
                }
                self.trace_row(now, node, out, Some(QueueKind::Normal), TraceEvent::Drop, &frame);
                Ok(())
            }
        }
    }

    fn on_host(&mut self, node: NodeIndex, frame: Frame, now: SimTime, sched: &mut Scheduler<Ev>) -> Result<(), SimError> {
        let Node::Host(h) = &mut self.nodes[node] else {
            unreachable!()
        };
        match h.classify(&frame)? {
            Arrival::Reinject => {
                h.reinject(frame, now)?;
                self.trace_back(now, node, 0, QueueKind::Bounce, TraceEvent::Reinject);
                self.start_tx(node, 0, now, sched)
            }
            Arrival::Deliver => {
                self.frames.consumed += 1;
                self.trace_row(now, node, 0, None, TraceEvent::Deliver, &frame);
                match frame.kind {
                    FrameKind::Data => self.deliver_data(frame, now, sched),
                    FrameKind::Ack { next_expected } => {
                        self.on_ack(frame.flow_id, next_expected, now, sched)
                    }
                    FrameKind::Request { .. } => self.on_request(frame.flow_id, now, sched),
                }
            }
        }
    }

    fn deliver_data(&mut self, frame: Frame, now: SimTime, sched: &mut Scheduler<Ev>) -> Result<(), SimError> {
        let fid = frame.flow_id;
        let flow = &mut self.flows[fid as usize];
        let (new, ack) = match &mut flow.kind {
            FlowKind::Burst { .. } => (true, None),
            FlowKind::Session { receiver, retry, .. } => {
                if let Some(id) = retry.take() {
                    sched.cancel(id);
                }
                let new = receiver.on_data(frame.seq, now);
                (new, Some(receiver.next_expected()))
            }
        };
        flow.log.record_receive(frame.seq, frame.send_order, !new);
        if new {
            flow.deliveries.push(DeliveryRecord {
                flow_id: fid,
                seq: frame.seq,
                payload_len: frame.payload_len,
                counters: frame.counters,
                created_at: frame.created_at,
                delivered_at: now,
            });
        } else {
            self.frames.duplicates += 1;
        }
        if let Some(next_expected) = ack {
            let (src, dst) = (flow.dst, flow.src);
            let ack = self.new_frame(FrameKind::Ack { next_expected }, src, dst, fid, next_expected, 0, now);
            self.host_send(src, ack, now, sched)?;
        }
        Ok(())
    }

    fn emit_segments(&mut self, fid: FlowId, segments: Vec<Segment>, now: SimTime, sched: &mut Scheduler<Ev>) -> Result<(), SimError> {
        for seg in segments {
            let flow = &self.flows[fid as usize];
            let payload = if seg.seq + 1 == flow.segments_total {
                flow.last_payload
            } else {
                flow.payload
            };
            let (src, dst) = (flow.src, flow.dst);
            let mut frame = self.new_frame(FrameKind::Data, src, dst, fid, seg.seq, payload, now);
            let flow = &mut self.flows[fid as usize];
            frame.send_order = flow.log.stamp_send(seg.seq);
            flow.segments_sent += 1;
            self.host_send(src, frame, now, sched)?;
        }
        self.sync_rto(fid, sched)
    }

    fn sync_rto(&mut self, fid: FlowId, sched: &mut Scheduler<Ev>) -> Result<(), SimError> {
        let FlowKind::Session { sender: Some(sender), rto, .. } = &mut self.flows[fid as usize].kind else {
            return Ok(());
        };
        let want = sender.rto_deadline();
        if rto.map(|(_, at)| at) == want {
            return Ok(());
        }
        if let Some((id, _)) = rto.take() {
            sched.cancel(id);
        }
        if let Some(at) = want {
            let id = sched.schedule(at, Ev::Rto { flow: fid })?;
            *rto = Some((id, at));
        }
        Ok(())
    }

    fn on_ack(&mut self, fid: FlowId, next_expected: u32, now: SimTime, sched: &mut Scheduler<Ev>) -> Result<(), SimError> {
        let FlowKind::Session { sender: Some(sender), .. } = &mut self.flows[fid as usize].kind else {
            return Ok(());
        };
        let mut segs: Vec<Segment> = sender.on_ack(next_expected, now).into_iter().collect();
        segs.extend(sender.take_sendable(now));
        self.emit_segments(fid, segs, now, sched)
    }

    fn on_request(&mut self, fid: FlowId, now: SimTime, sched: &mut Scheduler<Ev>) -> Result<(), SimError> {
        let transport = self.transport;
        let flow = &mut self.flows[fid as usize];
        let total = flow.segments_total;
        let FlowKind::Session { sender, .. } = &mut flow.kind else {
            return Ok(());
        };
        if sender.is_some() {
            return Ok(());
        }
        let s = sender.insert(Sender::new(transport, total));
        let segs = s.take_sendable(now);
        self.emit_segments(fid, segs, now, sched)
    }

    fn send_request(&mut self, fid: FlowId, now: SimTime, sched: &mut Scheduler<Ev>) -> Result<(), SimError> {
        let reno = self.transport.mode == TransportMode::Reno;
        let flow = &mut self.flows[fid as usize];
        let FlowKind::Session { request_index, request_len, sender, retry, retry_backoff, .. } = &mut flow.kind else {
            return Ok(());
        };
        if sender.is_some() {
            return Ok(());
        }
        let (kind, len) = (FrameKind::Request { request_index: *request_index }, *request_len);
        if reno {
            let at = now + SimTime::from_secs_f64(*retry_backoff);
            *retry_backoff = (*retry_backoff * 2.0).min(self.transport.reno.rto_max);
            *retry = Some(sched.schedule(at, Ev::RequestRetry { flow: fid })?);
        }
        let (client, server) = (flow.dst, flow.src);
        let frame = self.new_frame(kind, client, server, fid, 0, len, now);
        self.host_send(client, frame, now, sched)
    }

    fn on_burst_tick(&mut self, fid: FlowId, now: SimTime, sched: &mut Scheduler<Ev>) -> Result<(), SimError> {
        let flow = &mut self.flows[fid as usize];
        let FlowKind::Burst { gen } = &mut flow.kind else {
            return Ok(());
        };
        let next = gen.tick();
        let seq = flow.next_seq;
        flow.next_seq += 1;
        let (src, dst, payload) = (flow.src, flow.dst, flow.payload);
        let mut frame = self.new_frame(FrameKind::Data, src, dst, fid, seq, payload, now);
        let flow = &mut self.flows[fid as usize];
        frame.send_order = flow.log.stamp_send(seq);
        flow.segments_sent += 1;
        if next < self.end {
            sched.schedule(next, Ev::BurstTick { flow: fid })?;
        }
        self.host_send(src, frame, now, sched)
    }
}

impl Flow {
    #[allow(clippy::too_many_arguments)]
    fn new(
        id: FlowId,
        kind: FlowKind,
        src: NodeIndex,
        dst: NodeIndex,
        segments_total: u32,
        last_payload: u32,
        payload: u32,
        started_at: SimTime,
    ) -> Self {
        Self {
            id,
            kind,
            src,
            dst,
            segments_total,
            last_payload,
            payload,
            started_at,
            log: OrderLog::new(),
            next_seq: 0,
            segments_sent: 0,
            drops_by_node: BTreeMap::new(),
            deliveries: Vec::new(),
            bounces_by_switch: BTreeMap::new(),
        }
    }
}

impl Handler<Ev> for World {
    type Error = SimError;

    fn handle(&mut self, now: SimTime, event: Event<Ev>, sched: &mut Scheduler<Ev>) -> Result<(), SimError> {
        match event.payload {
            Ev::Arrive { node, port, frame } => match self.nodes[node] {
                Node::Switch(_) => self.on_switch(node, port, frame, now, sched),
                Node::Host(_) => self.on_host(node, frame, now, sched),
            },
            Ev::TxDone { node, port } => {
                match &mut self.nodes[node] {
                    Node::Host(h) => h.port.busy = false,
                    Node::Switch(s) => s.set_busy(port, false),
                }
                self.start_tx(node, port, now, sched)
            }
            Ev::BurstTick { flow } => self.on_burst_tick(flow, now, sched),
            Ev::Request { flow } | Ev::RequestRetry { flow } => self.send_request(flow, now, sched),
            Ev::Rto { flow } => {
                let FlowKind::Session { sender: Some(sender), rto, .. } = &mut self.flows[flow as usize].kind else {
                    return Ok(());
                };
                *rto = None;
                sender.on_timeout(now);
                let segs = sender.take_sendable(now);
                self.emit_segments(flow, segs, now, sched)
            }
        }
    }
}

/// Runs a scenario to its configured end time.
pub fn run(cfg: &ScenarioConfig) -> Result<RunResult, SimError> {
    cfg.validate()?;
    let mut world = World::new(cfg)?;
    let mut sched: Scheduler<Ev> = Scheduler::new();
    for flow in &world.flows {
        if flow.started_at >= world.end {
            continue;
        }
        let ev = match flow.kind {
            FlowKind::Burst { .. } => Ev::BurstTick { flow: flow.id },
            FlowKind::Session { .. } => Ev::Request { flow: flow.id },
        };
        sched.schedule(flow.started_at, ev)?;
    }
    let report = sched.run(world.end, &mut world)?;
    finish(cfg, world, &sched, report)
}

fn finish(cfg: &ScenarioConfig, world: World, sched: &Scheduler<Ev>, report: SimReport) -> Result<RunResult, SimError> {
    let mut frames = world.frames;
    for ev in sched.pending() {
        if let Ev::Arrive { .. } = ev {
            frames.in_flight += 1;
        }
    }
    let mut switches = Vec::new();
    let mut switch_util = Vec::new();
    let mut rng_draws = 0;
    for node in &world.nodes {
        match node {
            Node::Host(h) => frames.queued += h.port.frames().count() as u64,
            Node::Switch(s) => {
                frames.queued += s.queued_frames() as u64;
                switches.push(s.counts().clone());
                switch_util.push(s.util_traces());
                rng_draws += s.rng_draws();
            }
        }
    }
    let accounted = frames.consumed + frames.dropped + frames.sender_overflow + frames.queued + frames.in_flight;
    if accounted != frames.created {
        return Err(SimError::Conservation(format!(
            "created {} but consumed+dropped+overflowed+queued+in flight = {accounted}",
            frames.created
        )));
    }

    let net = &world.net;
    let flows = world
        .flows
        .into_iter()
        .map(|f| {
            let (kind, request_index, completed_at, retransmissions, segments_total) = match &f.kind {
                FlowKind::Burst { .. } => (FlowKindLabel::Burst, 0, None, 0, f.segments_sent as u32),
                FlowKind::Session { request_index, receiver, sender, .. } => (
                    FlowKindLabel::Session,
                    *request_index,
                    receiver.completed_at,
                    sender.as_ref().map_or(0, |s| s.retransmissions),
                    f.segments_total,
                ),
            };
            FlowResult {
                flow_id: f.id,
                kind,
                src: net.nodes[f.src].name.clone(),
                dst: net.nodes[f.dst].name.clone(),
                request_index,
                started_at: f.started_at,
                completed_at,
                segments_total,
                segments_sent: f.segments_sent,
                retransmissions,
                drops: f.drops_by_node.values().sum(),
                drops_by_node: f.drops_by_node,
                displacements: f.log.displacements(),
                deliveries: f.deliveries,
                bounces_by_switch: f.bounces_by_switch,
            }
        })
        .collect();
    Ok(RunResult {
        config: cfg.clone(),
        end: world.end,
        engine: report,
        flows,
        switches: switches.into_iter().collect::<Vec<SwitchCounts>>(),
        switch_util: switch_util.into_iter().collect::<Vec<SwitchUtil>>(),
        frames,
        rng_draws,
        trace: world.trace,
        node_names: net.nodes.iter().map(|n| n.name.clone()).collect(),
    })
}
