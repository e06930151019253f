//! The trace stream: one tab-separated record per line, the sole input to
//! the metrics layer.

use std::fmt;

use super::packet::PacketKind;

/// What a trace line reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceEvent {
    /// A node originated a transmission.
    Tx,
    /// A node relayed an existing packet.
    Fwd,
    /// A delivery.
    Rx,
    /// A transmission that reached nobody (out of range at send time) or
    /// was killed by the loss model.
    Drop,
    /// A scheduled delivery whose target was gone when it landed.
    Expire,
    /// A life-cycle state change; `extra` carries `to=<state>`.
    State,
    /// Periodic link-count sample; `extra` carries `count=<n>`.
    Links,
    /// Protocol milestone (insertion, access control, prune, roster).
    Proto,
    /// Network termination.
    Term,
}

impl TraceEvent {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceEvent::Tx => "tx",
            TraceEvent::Fwd => "fwd",
            TraceEvent::Rx => "rx",
            TraceEvent::Drop => "drop",
            TraceEvent::Expire => "expire",
            TraceEvent::State => "state",
            TraceEvent::Links => "links",
            TraceEvent::Proto => "proto",
            TraceEvent::Term => "term",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "tx" => TraceEvent::Tx,
            "fwd" => TraceEvent::Fwd,
            "rx" => TraceEvent::Rx,
            "drop" => TraceEvent::Drop,
            "expire" => TraceEvent::Expire,
            "state" => TraceEvent::State,
            "links" => TraceEvent::Links,
            "proto" => TraceEvent::Proto,
            "term" => TraceEvent::Term,
            _ => return None,
        })
    }
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One record. Columns: time, event, node, packet-kind, packet-id,
/// size-bytes, extra (`-` where a column does not apply).
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub time: f64,
    pub event: TraceEvent,
    pub node: u32,
    pub packet_kind: Option<PacketKind>,
    pub packet_id: u64,
    pub size: u32,
    pub extra: String,
}

impl TraceRecord {
    pub fn to_line(&self) -> String {
        format!(
            "{:.6}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.time,
            self.event,
            self.node,
            self.packet_kind.map_or("-", |k| k.as_str()),
            self.packet_id,
            self.size,
            if self.extra.is_empty() { "-" } else { &self.extra },
        )
    }

    pub fn parse_line(line: &str) -> Option<Self> {
        let mut cols = line.split('\t');
        let time: f64 = cols.next()?.parse().ok()?;
        let event = TraceEvent::parse(cols.next()?)?;
        let node: u32 = cols.next()?.parse().ok()?;
        let kind_col = cols.next()?;
        let packet_kind = if kind_col == "-" {
            None
        } else {
            Some(PacketKind::parse(kind_col)?)
        };
        let packet_id: u64 = cols.next()?.parse().ok()?;
        let size: u32 = cols.next()?.parse().ok()?;
        let extra_col = cols.next()?;
        if cols.next().is_some() {
            return None;
        }
        Some(Self {
            time,
            event,
            node,
            packet_kind,
            packet_id,
            size,
            extra: if extra_col == "-" {
                String::new()
            } else {
                extra_col.to_string()
            },
        })
    }

    /// Looks up `key=value` inside the extra column.
    pub fn extra_field(&self, key: &str) -> Option<&str> {
        self.extra
            .split(',')
            .find_map(|kv| kv.strip_prefix(key)?.strip_prefix('='))
    }
}

/// Renders records as the trace text, one line each.
pub fn render(records: &[TraceRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&r.to_line());
        out.push('\n');
    }
    out
}
