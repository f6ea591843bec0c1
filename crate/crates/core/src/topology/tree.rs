use std::collections::{BTreeMap, VecDeque};

use super::{connect, mac_for_ip, Network, NodeRole, NodeSpec, RouteTable, SwitchTier};

/// Link list for the aggregation tree as `(a, a_port, b, b_port)`.
///
/// Each server has its own first-hop switch (S1-S3) and middle switch
/// (S4-S6); the three branches join at S7, which serves the client H4.
/// Every server is three switches away from the client.
pub const TREE_WIRING: [(&str, usize, &str, usize); 10] = [
    ("H1", 0, "S1", 0),
    ("H2", 0, "S2", 0),
    ("H3", 0, "S3", 0),
    ("S1", 1, "S4", 0),
    ("S2", 1, "S5", 0),
    ("S3", 1, "S6", 0),
    ("S4", 1, "S7", 0),
    ("S5", 1, "S7", 1),
    ("S6", 1, "S7", 2),
    ("S7", 3, "H4", 0),
];

pub fn build_tree() -> Network {
    let mut nodes = Vec::new();
    for i in 1..=4u32 {
        nodes.push(NodeSpec {
            name: format!("H{i}"),
            role: NodeRole::Host,
            mac: mac_for_ip(0, 0, i).expect("fits"),
            ports: Vec::new(),
            routes: None,
        });
    }
    for i in 1..=7u32 {
        nodes.push(NodeSpec {
            name: format!("S{i}"),
            role: NodeRole::Switch(SwitchTier::Tree),
            mac: mac_for_ip(1, 0, i).expect("fits"),
            ports: Vec::new(),
            routes: None,
        });
    }
    let idx = |nodes: &[NodeSpec], name: &str| {
        nodes
            .iter()
            .position(|n| n.name == name)
            .expect("wiring names a known node")
    };
    for (a, pa, b, pb) in TREE_WIRING {
        let (ia, ib) = (idx(&nodes, a), idx(&nodes, b));
        connect(&mut nodes, ia, pa, ib, pb);
    }

    // The tree has unique paths, so a BFS from each host gives every
    // switch's port toward that host.
    let hosts: Vec<usize> = (0..nodes.len()).filter(|&i| nodes[i].is_host()).collect();
    let mut tables: Vec<BTreeMap<_, _>> = vec![BTreeMap::new(); nodes.len()];
    for &h in &hosts {
        let mac = nodes[h].mac;
        let mut seen = vec![false; nodes.len()];
        let mut queue = VecDeque::from([h]);
        seen[h] = true;
        while let Some(cur) = queue.pop_front() {
            for peer in nodes[cur].ports.clone() {
                if !seen[peer.node] {
                    seen[peer.node] = true;
                    // peer reaches `cur` (and so `h`) through peer.port
                    tables[peer.node].insert(mac, peer.port);
                    if !nodes[peer.node].is_host() {
                        queue.push_back(peer.node);
                    }
                }
            }
        }
    }
    for (node, table) in nodes.iter_mut().zip(tables) {
        if !node.is_host() {
            node.routes = Some(RouteTable::Exact(table));
        }
    }
    Network::new(nodes)
}
