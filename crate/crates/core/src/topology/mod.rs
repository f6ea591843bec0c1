//! Network builders: the seven-switch aggregation tree and the k=4 Fattree
//! with two-level routing.

mod fattree;
mod routing;
mod tree;

use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{Link, MacAddr, PortId};

pub use fattree::{build_fattree, fattree_host_ip, many_to_one_servers, FATTREE_K};
pub use routing::{MaskKind, RouteTable, TwoLevelEntry, TwoLevelTable, SHARED_LEADING_OCTETS};
pub use tree::{build_tree, TREE_WIRING};

pub type NodeIndex = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TopologyError {
    #[error("address component {0} does not fit in one octet")]
    OctetOverflow(u32),
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("{0} is not a host")]
    NotAHost(String),
    #[error("no route at {switch} for {dst}")]
    NoRoute { switch: String, dst: MacAddr },
    #[error("forwarding loop from {src} to {dst}")]
    Loop { src: String, dst: String },
    #[error("frame for {dst} reached host {at}")]
    Misdelivered { at: String, dst: String },
}

/// Maps an IPv4 address `10.pod.switch.id` to `0A-AA-0A-pod-switch-id`.
pub fn mac_for_ip(pod: u32, switch: u32, id: u32) -> Result<MacAddr, TopologyError> {
    let octet = |v: u32| u8::try_from(v).map_err(|_| TopologyError::OctetOverflow(v));
    Ok(MacAddr([0x0A, 0xAA, 0x0A, octet(pod)?, octet(switch)?, octet(id)?]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwitchTier {
    Tree,
    Edge,
    Aggregation,
    Core,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRole {
    Host,
    Switch(SwitchTier),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PortPeer {
    pub node: NodeIndex,
    pub port: PortId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub name: String,
    pub role: NodeRole,
    /// Shared by every port of the node.
    pub mac: MacAddr,
    pub ports: Vec<PortPeer>,
    pub routes: Option<RouteTable>,
}

impl NodeSpec {
    pub fn is_host(&self) -> bool {
        self.role == NodeRole::Host
    }
}

/// Immutable wiring plus routing. Every link uses the same parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub nodes: Vec<NodeSpec>,
    pub link: Link,
}

/// One step of a table walk: the switch and the port it forwards on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Hop {
    pub node: NodeIndex,
    pub out_port: PortId,
}

impl Network {
    pub(crate) fn new(nodes: Vec<NodeSpec>) -> Self {
        Self {
            nodes,
            link: Link::default(),
        }
    }

    pub fn with_link(mut self, link: Link) -> Self {
        self.link = link;
        self
    }

    pub fn index_of(&self, name: &str) -> Result<NodeIndex, TopologyError> {
        self.nodes
            .iter()
            .position(|n| n.name == name)
            .ok_or_else(|| TopologyError::UnknownNode(name.to_string()))
    }

    pub fn host_index(&self, name: &str) -> Result<NodeIndex, TopologyError> {
        let idx = self.index_of(name)?;
        if !self.nodes[idx].is_host() {
            return Err(TopologyError::NotAHost(name.to_string()));
        }
        Ok(idx)
    }

    pub fn hosts(&self) -> impl Iterator<Item = NodeIndex> + '_ {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].is_host())
    }

    pub fn switches(&self) -> impl Iterator<Item = NodeIndex> + '_ {
        (0..self.nodes.len()).filter(|&i| !self.nodes[i].is_host())
    }

    pub fn host_by_mac(&self, mac: &MacAddr) -> Option<NodeIndex> {
        self.hosts().find(|&i| self.nodes[i].mac == *mac)
    }

    /// Walks the route tables from `src` to `dst` without traffic. The result
    /// lists every switch visited with its output port.
    pub fn walk(&self, src: NodeIndex, dst: NodeIndex) -> Result<Vec<Hop>, TopologyError> {
        let dst_mac = self.nodes[dst].mac;
        let limit = 2 * self.nodes.len();
        let mut hops = Vec::new();
        let mut at = self.nodes[src].ports[0].node;
        loop {
            let node = &self.nodes[at];
            if node.is_host() {
                if at == dst {
                    return Ok(hops);
                }
                return Err(TopologyError::Misdelivered {
                    at: node.name.clone(),
                    dst: self.nodes[dst].name.clone(),
                });
            }
            if hops.len() >= limit {
                return Err(TopologyError::Loop {
                    src: self.nodes[src].name.clone(),
                    dst: self.nodes[dst].name.clone(),
                });
            }
            let port = node
                .routes
                .as_ref()
                .and_then(|r| r.lookup(&dst_mac))
                .ok_or_else(|| TopologyError::NoRoute {
                    switch: node.name.clone(),
                    dst: dst_mac,
                })?;
            hops.push(Hop {
                node: at,
                out_port: port,
            });
            at = node.ports[port].node;
        }
    }

    /// Links traversed host to host, counting both host links.
    pub fn hop_count(&self, src: NodeIndex, dst: NodeIndex) -> Result<usize, TopologyError> {
        Ok(self.walk(src, dst)?.len() + 1)
    }

    pub fn nodes_csv(&self) -> String {
        let mut out = String::from("name,role,mac,ports\n");
        for n in &self.nodes {
            let role = match n.role {
                NodeRole::Host => "host",
                NodeRole::Switch(SwitchTier::Tree) => "switch",
                NodeRole::Switch(SwitchTier::Edge) => "edge",
                NodeRole::Switch(SwitchTier::Aggregation) => "aggregation",
                NodeRole::Switch(SwitchTier::Core) => "core",
            };
            let _ = writeln!(out, "{},{},{},{}", n.name, role, n.mac, n.ports.len());
        }
        out
    }

    /// One row per link, listed once from its lower-indexed end.
    pub fn edges_csv(&self) -> String {
        let mut out = String::from("a,a_port,b,b_port\n");
        for (i, n) in self.nodes.iter().enumerate() {
            for (p, peer) in n.ports.iter().enumerate() {
                if (i, p) < (peer.node, peer.port) {
                    let _ = writeln!(
                        out,
                        "{},{},{},{}",
                        n.name, p, self.nodes[peer.node].name, peer.port
                    );
                }
            }
        }
        out
    }
}

/// Wires `a:pa` to `b:pb`, growing port vectors as needed.
pub(crate) fn connect(nodes: &mut [NodeSpec], a: NodeIndex, pa: PortId, b: NodeIndex, pb: PortId) {
    for (n, p, peer) in [
        (a, pa, PortPeer { node: b, port: pb }),
        (b, pb, PortPeer { node: a, port: pa }),
    ] {
        let ports = &mut nodes[n].ports;
        if ports.len() <= p {
            ports.resize(
                p + 1,
                PortPeer {
                    node: usize::MAX,
                    port: usize::MAX,
                },
            );
        }
        ports[p] = peer;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mac_for_ip_examples() {
        assert_eq!(mac_for_ip(0, 0, 1).unwrap().to_string(), "0A-AA-0A-00-00-01");
        assert_eq!(mac_for_ip(2, 0, 2).unwrap().to_string(), "0A-AA-0A-02-00-02");
        assert_eq!(mac_for_ip(0, 0, 0).unwrap().to_string(), "0A-AA-0A-00-00-00");
        assert_eq!(mac_for_ip(256, 0, 0), Err(TopologyError::OctetOverflow(256)));
    }

    #[test]
    fn exports_list_each_link_once() {
        let net = build_tree();
        let edges = net.edges_csv();
        assert_eq!(edges.lines().count(), 1 + 10);
        assert_eq!(net.nodes_csv().lines().count(), 1 + 11);
    }
}
