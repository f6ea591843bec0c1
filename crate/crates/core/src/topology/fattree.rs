use super::{
    connect, mac_for_ip, Network, NodeRole, NodeSpec, RouteTable, SwitchTier, TwoLevelEntry,
    TwoLevelTable,
};

pub const FATTREE_K: usize = 4;

/// Address of host `host` (0 or 1) on edge switch `edge` of `pod`: hosts use
/// `10.pod.edge.{2,3}`.
pub fn fattree_host_ip(pod: u32, edge: u32, host: u32) -> (u32, u32, u32) {
    (pod, edge, host + 2)
}

/// Server sets for the many-to-one experiments with client H9.
pub fn many_to_one_servers(count: usize) -> Option<Vec<String>> {
    let names: &[&str] = match count {
        3 => &["H1", "H5", "H13"],
        6 => &["H1", "H5", "H13", "H3", "H7", "H15"],
        9 => &["H1", "H5", "H13", "H3", "H7", "H15", "H2", "H8", "H14"],
        12 => &[
            "H1", "H2", "H3", "H4", "H5", "H6", "H7", "H8", "H13", "H14", "H15", "H11",
        ],
        _ => return None,
    };
    Some(names.iter().map(|s| s.to_string()).collect())
}

/// k=4 Fattree. Naming: pod `p` holds edge switches `S(4p+1)` (left) and
/// `S(4p+2)` (right) and aggregation switches `S(4p+3)` (left) and
/// `S(4p+4)` (right). Hosts `H(4p+2e+h+1)`. Cores C1, C2 hang off left
/// aggregation switches, C3, C4 off right ones; core port `p` leads to pod
/// `p`.
///
/// Port layout: edge 0,1 = hosts, 2 = left agg, 3 = right agg; aggregation
/// 0,1 = edges, 2,3 = cores.
pub fn build_fattree() -> Network {
    let k = FATTREE_K as u32;
    let half = k / 2;
    let mut nodes = Vec::new();
    let mac = |a, b, c| mac_for_ip(a, b, c).expect("fits");

    for p in 0..k {
        for e in 0..half {
            for h in 0..half {
                let (a, b, c) = fattree_host_ip(p, e, h);
                nodes.push(NodeSpec {
                    name: format!("H{}", p * k + e * half + h + 1),
                    role: NodeRole::Host,
                    mac: mac(a, b, c),
                    ports: Vec::new(),
                    routes: None,
                });
            }
        }
    }
    let host_idx = |p: u32, e: u32, h: u32| (p * k + e * half + h) as usize;
    let hosts = nodes.len();

    for p in 0..k {
        for e in 0..half {
            nodes.push(switch(format!("S{}", p * k + e + 1), SwitchTier::Edge, mac(p, e, 1)));
        }
        for a in 0..half {
            nodes.push(switch(
                format!("S{}", p * k + half + a + 1),
                SwitchTier::Aggregation,
                mac(p, half + a, 1),
            ));
        }
    }
    let edge_idx = |p: u32, e: u32| hosts + (p * k + e) as usize;
    let agg_idx = |p: u32, a: u32| hosts + (p * k + half + a) as usize;
    let cores = nodes.len();
    for j in 0..half * half {
        nodes.push(switch(
            format!("C{}", j + 1),
            SwitchTier::Core,
            mac(k, j / half + 1, j % half + 1),
        ));
    }
    let core_idx = |j: u32| cores + j as usize;

    for p in 0..k {
        for e in 0..half {
            for h in 0..half {
                connect(&mut nodes, host_idx(p, e, h), 0, edge_idx(p, e), h as usize);
            }
            for a in 0..half {
                connect(
                    &mut nodes,
                    edge_idx(p, e),
                    (half + a) as usize,
                    agg_idx(p, a),
                    e as usize,
                );
            }
        }
        for a in 0..half {
            for c in 0..half {
                connect(
                    &mut nodes,
                    agg_idx(p, a),
                    (half + c) as usize,
                    core_idx(a * half + c),
                    p as usize,
                );
            }
        }
    }

    // Left-side switches send last octet 02 up port 2 and 03 up port 3;
    // right-side switches swap them.
    let uplinks = |side: u32| -> Vec<TwoLevelEntry> {
        (0..half)
            .map(|h| {
                let octet = h + 2;
                let port = if side == 0 { octet } else { 2 * half + 1 - octet };
                TwoLevelEntry::suffix(mac(0, 0, octet), 1, port as usize)
            })
            .collect()
    };
    for p in 0..k {
        for e in 0..half {
            let mut entries: Vec<TwoLevelEntry> = (0..half)
                .map(|h| {
                    let (a, b, c) = fattree_host_ip(p, e, h);
                    TwoLevelEntry::prefix(mac(a, b, c), 4, h as usize)
                })
                .collect();
            entries.extend(uplinks(e));
            nodes[edge_idx(p, e)].routes = Some(RouteTable::TwoLevel(TwoLevelTable::new(entries)));
        }
        for a in 0..half {
            let mut entries: Vec<TwoLevelEntry> = (0..half)
                .map(|e| TwoLevelEntry::prefix(mac(p, e, 0), 3, e as usize))
                .collect();
            entries.extend(uplinks(a));
            nodes[agg_idx(p, a)].routes = Some(RouteTable::TwoLevel(TwoLevelTable::new(entries)));
        }
    }
    for j in 0..half * half {
        let entries = (0..k)
            .map(|p| TwoLevelEntry::prefix(mac(p, 0, 0), 2, p as usize))
            .collect();
        nodes[core_idx(j)].routes = Some(RouteTable::TwoLevel(TwoLevelTable::new(entries)));
    }
    Network::new(nodes)
}

fn switch(name: String, tier: SwitchTier, mac: crate::model::MacAddr) -> NodeSpec {
    NodeSpec {
        name,
        role: NodeRole::Switch(tier),
        mac,
        ports: Vec::new(),
        routes: None,
    }
}
