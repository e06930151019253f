//! Radio packets and their accounting categories.

use std::fmt;

use crate::graph::VertexId;

/// Fixed per-packet header cost in bytes.
pub const HEADER_BYTES: u32 = 32;

/// Wire kind of a packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PacketKind {
    GriGo,
    GriReturn,
    GriInfo,
    Flood,
    ZkpMsg,
    InsertionMsg,
}

impl PacketKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PacketKind::GriGo => "gri-go",
            PacketKind::GriReturn => "gri-return",
            PacketKind::GriInfo => "gri-info",
            PacketKind::Flood => "flood",
            PacketKind::ZkpMsg => "zkp-msg",
            PacketKind::InsertionMsg => "insertion-msg",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "gri-go" => PacketKind::GriGo,
            "gri-return" => PacketKind::GriReturn,
            "gri-info" => PacketKind::GriInfo,
            "flood" => PacketKind::Flood,
            "zkp-msg" => PacketKind::ZkpMsg,
            "insertion-msg" => PacketKind::InsertionMsg,
            _ => return None,
        })
    }
}

impl fmt::Display for PacketKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What a packet is for; traffic shares are tallied by purpose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Purpose {
    ProofOfLife,
    Insertion,
    AccessControl,
    Probe,
}

impl Purpose {
    pub fn as_str(self) -> &'static str {
        match self {
            Purpose::ProofOfLife => "pol",
            Purpose::Insertion => "insert",
            Purpose::AccessControl => "zkp",
            Purpose::Probe => "probe",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "pol" => Purpose::ProofOfLife,
            "insert" => Purpose::Insertion,
            "zkp" => Purpose::AccessControl,
            "probe" => Purpose::Probe,
            _ => return None,
        })
    }

    /// Bytes one roster entry occupies for this purpose. A proof of life is
    /// a per-node attestation blob; announcement answers are bare ids.
    pub fn roster_entry_bytes(self) -> u32 {
        match self {
            Purpose::ProofOfLife => 64,
            _ => 8,
        }
    }
}

/// One radio transmission. Forwarded copies keep the logical `id` (that is
/// what duplicate suppression keys on) and carry the relaying `src`.
#[derive(Debug, Clone)]
pub struct Packet {
    pub id: u64,
    pub kind: PacketKind,
    pub purpose: Purpose,
    /// Transmitter of this instance.
    pub src: VertexId,
    /// Creator of the logical packet.
    pub origin: VertexId,
    /// `None` is a local broadcast to everyone in range.
    pub dst: Option<VertexId>,
    /// Broadcast session this packet belongs to; 0 when standalone.
    pub session: u64,
    /// Identifiers accumulated on the return path; grows monotonically.
    pub hop_trail: Vec<VertexId>,
    /// Gathered identifiers a return packet carries up the tree.
    pub roster: BTreeSet<VertexId>,
    /// Header plus payload bytes.
    pub size: u32,
    pub created_at: f64,
}

use std::collections::BTreeSet;

impl Packet {
    /// A fresh standalone packet with no trail or roster.
    pub fn new(
        id: u64,
        kind: PacketKind,
        purpose: Purpose,
        src: VertexId,
        size: u32,
        created_at: f64,
    ) -> Self {
        Self {
            id,
            kind,
            purpose,
            src,
            origin: src,
            dst: None,
            session: 0,
            hop_trail: Vec::new(),
            roster: BTreeSet::new(),
            size,
            created_at,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names_round_trip() {
        for kind in [
            PacketKind::GriGo,
            PacketKind::GriReturn,
            PacketKind::GriInfo,
            PacketKind::Flood,
            PacketKind::ZkpMsg,
            PacketKind::InsertionMsg,
        ] {
            assert_eq!(PacketKind::parse(kind.as_str()), Some(kind));
        }
        assert_eq!(PacketKind::parse("nope"), None);
    }

    #[test]
    fn proof_entries_dominate_bare_ids() {
        assert!(Purpose::ProofOfLife.roster_entry_bytes() > Purpose::Insertion.roster_entry_bytes());
    }
}
