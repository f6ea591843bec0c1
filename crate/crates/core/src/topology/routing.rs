//! Route tables: exact MAC match and the two-level prefix/suffix table.

use std::collections::BTreeMap;

use crate::model::{MacAddr, PortId};

/// Leading octets shared by every address in the Fattree scheme; prefix
/// matching starts after them.
pub const SHARED_LEADING_OCTETS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskKind {
    /// Compare `mask_octets` octets left to right, after the shared octets.
    Prefix,
    /// Compare `mask_octets` octets right to left.
    Suffix,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoLevelEntry {
    pub pattern: MacAddr,
    pub mask_kind: MaskKind,
    pub mask_octets: u8,
    pub port: PortId,
}

impl TwoLevelEntry {
    pub fn prefix(pattern: MacAddr, mask_octets: u8, port: PortId) -> Self {
        assert!(usize::from(mask_octets) <= 6 - SHARED_LEADING_OCTETS);
        Self {
            pattern,
            mask_kind: MaskKind::Prefix,
            mask_octets,
            port,
        }
    }

    pub fn suffix(pattern: MacAddr, mask_octets: u8, port: PortId) -> Self {
        assert!(usize::from(mask_octets) <= 6 - SHARED_LEADING_OCTETS);
        Self {
            pattern,
            mask_kind: MaskKind::Suffix,
            mask_octets,
            port,
        }
    }

    pub fn matches(&self, dst: &MacAddr) -> bool {
        let (p, d) = (self.pattern.octets(), dst.octets());
        let n = usize::from(self.mask_octets);
        match self.mask_kind {
            MaskKind::Prefix => {
                p[..SHARED_LEADING_OCTETS] == d[..SHARED_LEADING_OCTETS]
                    && p[SHARED_LEADING_OCTETS..SHARED_LEADING_OCTETS + n]
                        == d[SHARED_LEADING_OCTETS..SHARED_LEADING_OCTETS + n]
            }
            MaskKind::Suffix => p[6 - n..] == d[6 - n..],
        }
    }
}

/// Prefix entries handle intra-pod destinations, suffix entries spread
/// inter-pod traffic across uplinks.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TwoLevelTable {
    pub entries: Vec<TwoLevelEntry>,
}

impl TwoLevelTable {
    pub fn new(entries: Vec<TwoLevelEntry>) -> Self {
        Self { entries }
    }

    /// First matching prefix entry, otherwise first matching suffix entry.
    pub fn lookup(&self, dst: &MacAddr) -> Option<PortId> {
        let first = |kind: MaskKind| {
            self.entries
                .iter()
                .filter(|e| e.mask_kind == kind)
                .find(|e| e.matches(dst))
                .map(|e| e.port)
        };
        first(MaskKind::Prefix).or_else(|| first(MaskKind::Suffix))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RouteTable {
    Exact(BTreeMap<MacAddr, PortId>),
    TwoLevel(TwoLevelTable),
}

impl RouteTable {
    pub fn lookup(&self, dst: &MacAddr) -> Option<PortId> {
        match self {
            RouteTable::Exact(map) => map.get(dst).copied(),
            RouteTable::TwoLevel(t) => t.lookup(dst),
        }
    }
}
