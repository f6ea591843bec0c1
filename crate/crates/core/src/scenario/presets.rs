use crate::endhost::RenoCfg;
use crate::topology::many_to_one_servers;

use super::config::{
    BurstCfg, LinkCfg, Mode, QueueCfg, ScenarioConfig, SessionCfg, TopologyKind, TransportSection,
};

/// `(name, description)` of every built-in scenario.
pub const PRESETS: [(&str, &str); 9] = [
    ("tree-mild", "tree, three servers bursting 500 frames per generating to H4"),
    ("tree-moderate", "tree, bursts of 1500 frames"),
    ("tree-severe", "tree, bursts of 2500 frames"),
    ("oo-sweep", "tree, request-reply from H4 to H1-H3, small queues, for theta/lambda sweeps"),
    ("ft-3to1", "fattree, 3 servers answering client H9"),
    ("ft-6to1", "fattree, 6 servers answering client H9"),
    ("ft-9to1", "fattree, 9 servers answering client H9"),
    ("ft-12to1", "fattree, 12 servers answering client H9"),
    ("ft-m2m", "fattree, H1/H5/H13 answer H9 while H4/H8/H16 answer H10"),
];

/// Segment size of the request-reply presets.
pub const SESSION_MSS: u32 = 536;

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

fn tree_burst(name: &str, packets: u32) -> ScenarioConfig {
    ScenarioConfig {
        name: name.into(),
        topology: TopologyKind::Tree,
        mode: Mode::Pabo,
        seed: 1,
        duration: 1.0,
        theta: 0.8,
        lambda: 50.0,
        d_threshold: None,
        trace: false,
        queues: QueueCfg::default(),
        link: LinkCfg::default(),
        transport: TransportSection::default(),
        bursts: ["H1", "H2", "H3"]
            .iter()
            .map(|src| BurstCfg {
                src: (*src).into(),
                dst: "H4".into(),
                start: 0.0,
                packets_per_generate: packets,
                send_interval: 10e-6,
                pause_interval: 0.2,
                payload: 1500,
            })
            .collect(),
        sessions: vec![],
    }
}

fn session(client: &str, servers: Vec<String>) -> SessionCfg {
    SessionCfg {
        client: client.into(),
        servers,
        start: 0.0,
        requests: 4,
        gap: 1.0,
        request_len: 200,
        reply_len: 1 << 20,
    }
}

fn fattree(name: &str, sessions: Vec<SessionCfg>) -> ScenarioConfig {
    ScenarioConfig {
        name: name.into(),
        topology: TopologyKind::Fattree,
        mode: Mode::Pabo,
        seed: 1,
        duration: 5.0,
        theta: 0.95,
        lambda: 50.0,
        d_threshold: None,
        trace: false,
        queues: QueueCfg {
            switch_normal: 100,
            switch_bounce: 100,
            ..QueueCfg::default()
        },
        link: LinkCfg::default(),
        transport: TransportSection {
            mss: SESSION_MSS,
            advertised_window: 50000,
            reno: RenoCfg::default(),
        },
        bursts: vec![],
        sessions,
    }
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| (*s).to_string()).collect()
}

pub fn preset(name: &str) -> Option<ScenarioConfig> {
    let cfg = match name {
        "tree-mild" => tree_burst(name, 500),
        "tree-moderate" => tree_burst(name, 1500),
        "tree-severe" => tree_burst(name, 2500),
        "oo-sweep" => ScenarioConfig {
            duration: 4.0,
            queues: QueueCfg {
                switch_normal: 100,
                switch_bounce: 100,
                ..QueueCfg::default()
            },
            transport: TransportSection {
                mss: SESSION_MSS,
                advertised_window: 45535,
                reno: RenoCfg {
                    fast_retransmit: false,
                    rto_fixed: Some(240.0),
                    ..RenoCfg::default()
                },
            },
            bursts: vec![],
            sessions: vec![session("H4", names(&["H1", "H2", "H3"]))],
            ..tree_burst(name, 1)
        },
        "ft-3to1" | "ft-6to1" | "ft-9to1" | "ft-12to1" => {
            let n: usize = name[3..name.len() - 3].parse().ok()?;
            fattree(name, vec![session("H9", many_to_one_servers(n)?)])
        }
        "ft-m2m" => fattree(
            name,
            vec![
                session("H9", names(&["H1", "H5", "H13"])),
                session("H10", names(&["H4", "H8", "H16"])),
            ],
        ),
        _ => return None,
    };
    Some(cfg)
}
